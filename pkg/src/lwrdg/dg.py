"""Single-road modal discontinuous Galerkin machinery.

Each cell carries coefficients of the scaled Legendre basis

    psi_0 = 1, psi_1 = xi, psi_2 = xi**2 - 1/3, psi_3 = xi**3 - 3/5 xi,

with ``xi = (x - x_j) / (dx_j / 2)``. The basis is orthogonal, so the mass
matrix is diagonal and the zeroth coefficient is the cell average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from . import kernels
from .errors import ConfigError, DomainError
from .fundamental_diagram import FluxModel, godunov_array, lax_friedrichs_array

__all__ = [
    "MAX_DEGREE",
    "Mesh1D",
    "RoadState",
    "BasisTables",
    "basis_tables",
    "project_initial",
    "trace_left",
    "trace_right",
    "dg_residual",
    "evaluate",
    "sample",
]

MAX_DEGREE = 3
FLUX_KINDS = {"lf": kernels.FLUX_LF, "godunov": kernels.FLUX_GODUNOV}

# Gauss-Lobatto nodes on [-1, 1] and weights normalized to [-1/2, 1/2]
_LOBATTO = {
    2: (np.array([-1.0, 1.0]), np.array([0.5, 0.5])),
    3: (np.array([-1.0, 0.0, 1.0]), np.array([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0])),
}


def _leading(l: int) -> float:
    return math.factorial(2 * l) / (2.0**l * math.factorial(l) ** 2)


def _psi(l: int) -> legendre.Legendre:
    return legendre.Legendre.basis(l) / _leading(l)


def lobatto_count(k: int) -> int:
    """Fewest Gauss-Lobatto nodes whose rule is exact for degree k."""
    return max(2, math.ceil((k + 3) / 2))


@dataclass(frozen=True)
class BasisTables:
    k: int
    xq: np.ndarray          # Gauss-Legendre nodes, k+2 of them
    wq: np.ndarray
    phi_q: np.ndarray       # (k+1, nq) basis values at xq
    dphi_q: np.ndarray      # (k+1, nq) d psi / d xi at xq
    psi_right: np.ndarray   # psi_l(+1)
    psi_left: np.ndarray    # psi_l(-1)
    mass: np.ndarray        # int_{-1}^{1} psi_l^2 d xi
    inv_mass: np.ndarray
    x_gl: np.ndarray        # Gauss-Lobatto nodes used by the bound limiter
    w_gl: np.ndarray
    phi_gl: np.ndarray      # (k+1, n_gl)

    def values(self, xi) -> np.ndarray:
        """Basis values at arbitrary reference points, shape (k+1, len(xi))."""
        xi = np.asarray(xi, dtype=float)
        return np.array([_psi(l)(xi) for l in range(self.k + 1)])


@lru_cache(maxsize=None)
def basis_tables(k: int) -> BasisTables:
    if not 0 <= k <= MAX_DEGREE:
        raise ConfigError(f"degree must be in 0..{MAX_DEGREE}, got {k}")
    xq, wq = legendre.leggauss(k + 2)
    polys = [_psi(l) for l in range(k + 1)]
    phi_q = np.array([p(xq) for p in polys])
    dphi_q = np.array([p.deriv()(xq) for p in polys])
    psi_r = np.array([p(1.0) for p in polys])
    psi_l = np.array([p(-1.0) for p in polys])
    mass = np.array([2.0 / ((2 * l + 1) * _leading(l) ** 2) for l in range(k + 1)])
    x_gl, w_gl = _LOBATTO[lobatto_count(k)]
    phi_gl = np.array([p(x_gl) for p in polys])
    tabs = BasisTables(k, xq, wq, phi_q, dphi_q, psi_r, psi_l, mass, 1.0 / mass,
                       x_gl, w_gl, phi_gl)
    for name in ("xq", "wq", "phi_q", "dphi_q", "psi_right", "psi_left", "mass",
                 "inv_mass", "x_gl", "w_gl", "phi_gl"):
        arr = np.ascontiguousarray(getattr(tabs, name))
        arr.setflags(write=False)
        object.__setattr__(tabs, name, arr)
    return tabs


@dataclass(frozen=True)
class Mesh1D:
    x_min: float
    x_max: float
    widths: np.ndarray

    @classmethod
    def uniform(cls, x_min: float, x_max: float, n_cells: int) -> "Mesh1D":
        if n_cells < 1 or not x_max > x_min:
            raise ConfigError(f"bad mesh [{x_min}, {x_max}] with {n_cells} cells")
        w = np.full(n_cells, (x_max - x_min) / n_cells)
        w.setflags(write=False)
        return cls(float(x_min), float(x_max), w)

    @property
    def n_cells(self) -> int:
        return len(self.widths)

    @property
    def edges(self) -> np.ndarray:
        e = self.x_min + np.concatenate(([0.0], np.cumsum(self.widths)))
        e[-1] = self.x_max
        return e

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    def locate(self, x) -> np.ndarray:
        """Cell index containing each x (right edge belongs to the last cell)."""
        idx = np.searchsorted(self.edges, x, side="right") - 1
        return np.clip(idx, 0, self.n_cells - 1)


@dataclass
class RoadState:
    mesh: Mesh1D
    k: int
    coeffs: np.ndarray  # (n_cells, k+1)

    def __post_init__(self):
        self.coeffs = np.ascontiguousarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.mesh.n_cells, self.k + 1):
            raise ConfigError(
                f"coefficient array shape {self.coeffs.shape} does not match "
                f"({self.mesh.n_cells}, {self.k + 1})"
            )

    @property
    def averages(self) -> np.ndarray:
        return self.coeffs[:, 0]

    def mass(self) -> float:
        return math.fsum(self.coeffs[:, 0] * self.mesh.widths)

    def copy(self) -> "RoadState":
        return RoadState(self.mesh, self.k, self.coeffs.copy())

    def lobatto_values(self) -> np.ndarray:
        return self.coeffs @ basis_tables(self.k).phi_gl


def project_initial(mesh: Mesh1D, k: int, rho0: Callable, n_quad: int | None = None) -> RoadState:
    """L2 projection of ``rho0`` onto piecewise polynomials of degree k.

    ``n_quad`` Gauss-Legendre points per cell; defaults to max(k+2, 10) so that
    smooth data are projected to round-off.
    """
    tabs = basis_tables(k)
    n_quad = max(k + 2, 10) if n_quad is None else n_quad
    xq, wq = legendre.leggauss(n_quad)
    phi = tabs.values(xq)
    x = mesh.centers[:, None] + 0.5 * mesh.widths[:, None] * xq[None, :]
    vals = np.asarray(rho0(x), dtype=float) * np.ones_like(x)
    coeffs = (vals * wq) @ phi.T * tabs.inv_mass
    # constant data is represented exactly rather than up to quadrature round-off
    flat = np.all(vals == vals[:, :1], axis=1)
    coeffs[flat] = 0.0
    coeffs[flat, 0] = vals[flat, 0]
    return RoadState(mesh, k, coeffs)


def _check_cell(state: RoadState, j: int):
    if not 0 <= j < state.mesh.n_cells:
        raise DomainError(f"cell index {j} out of range 0..{state.mesh.n_cells - 1}")


def trace_left(state: RoadState, j: int) -> float:
    """Limit of rho_h at the left edge of cell j, from inside the cell."""
    _check_cell(state, j)
    return float(state.coeffs[j] @ basis_tables(state.k).psi_left)


def trace_right(state: RoadState, j: int) -> float:
    _check_cell(state, j)
    return float(state.coeffs[j] @ basis_tables(state.k).psi_right)


def _residual_generic(state: RoadState, model: FluxModel, fl: float, fr: float, flux: str) -> np.ndarray:
    tabs = basis_tables(state.k)
    c = state.coeffs
    fq = model.f(c @ tabs.phi_q)
    # volume term relative to f(average), so constant cells give exactly zero
    f_ref = model.f(c[:, 0])[:, None]
    vol = ((fq - f_ref) * tabs.wq) @ tabs.dphi_q.T + f_ref * (tabs.psi_right - tabs.psi_left)
    tr_r = c @ tabs.psi_right
    tr_l = c @ tabs.psi_left
    n = len(c)
    F = np.empty(n + 1)
    F[0] = fl
    F[n] = fr
    numflux = lax_friedrichs_array if flux == "lf" else godunov_array
    F[1:n] = numflux(model, tr_r[:-1], tr_l[1:])
    res = vol - F[1:, None] * tabs.psi_right + F[:-1, None] * tabs.psi_left
    return res * tabs.inv_mass * (2.0 / state.mesh.widths)[:, None]


def dg_residual(state: RoadState, model: FluxModel, flux_left_bdry: float,
                flux_right_bdry: float, flux: str = "lf", out: np.ndarray | None = None) -> np.ndarray:
    """Time derivative of the modal coefficients of one road.

    The fluxes through the two road ends are supplied by the caller; interior
    interfaces use the Lax-Friedrichs (``"lf"``) or Godunov flux.
    """
    if flux not in FLUX_KINDS:
        raise ConfigError(f"numerical flux must be one of {sorted(FLUX_KINDS)}, got {flux!r}")
    if model.quadratic is None:
        res = _residual_generic(state, model, flux_left_bdry, flux_right_bdry, flux)
        if out is not None:
            out[...] = res
            return out
        return res
    if out is None:
        out = np.empty_like(state.coeffs)
    tabs = basis_tables(state.k)
    v, rm = model.quadratic
    kernels.backend.residual_quadratic(
        state.coeffs, state.mesh.widths, tabs.phi_q, tabs.dphi_q, tabs.wq,
        tabs.psi_right, tabs.psi_left, tabs.inv_mass, v, rm, FLUX_KINDS[flux],
        float(flux_left_bdry), float(flux_right_bdry), out,
    )
    return out


def evaluate(state: RoadState, x) -> np.ndarray:
    """rho_h at arbitrary points of the road (cell-interior values)."""
    x = np.asarray(x, dtype=float)
    mesh = state.mesh
    j = mesh.locate(x)
    xi = (x - mesh.centers[j]) / (0.5 * mesh.widths[j])
    phi = basis_tables(state.k).values(xi)  # (k+1, npts)
    return np.einsum("pl,lp->p", state.coeffs[j], phi)


def sample(state: RoadState, per_cell: int = 4):
    """Equally spaced samples inside each cell: (x, rho_h, cell average)."""
    mesh = state.mesh
    offs = (np.arange(per_cell) + 0.5) / per_cell * 2.0 - 1.0
    phi = basis_tables(state.k).values(offs)
    x = (mesh.centers[:, None] + 0.5 * mesh.widths[:, None] * offs[None, :]).ravel()
    rho = (state.coeffs @ phi).ravel()
    avg = np.repeat(state.coeffs[:, 0], per_cell)
    return x, rho, avg
