"""Slope (TVB minmod) and bound-preserving limiters for modal DG states.

Both limiters leave the zeroth coefficient (the cell average) untouched, so
they never change the mass of a road.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .dg import RoadState, basis_tables
from .errors import ConfigError, IntegrityError

__all__ = ["TvbConfig", "BpConfig", "minmod_bar", "apply_tvb", "apply_bp", "AVERAGE_TOL"]

# cell averages may sit this far outside the bounds from round-off alone
AVERAGE_TOL = 1e-12


@dataclass(frozen=True)
class TvbConfig:
    M: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not self.M >= 0.0:
            raise ConfigError(f"TVB constant M must be nonnegative, got {self.M!r}")


@dataclass(frozen=True)
class BpConfig:
    rho_max: float
    rho_min: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 <= self.rho_min < self.rho_max:
            raise ConfigError(f"need 0 <= rho_min < rho_max, got {self.rho_min}, {self.rho_max}")


def minmod_bar(a1, a2, a3, threshold):
    """Modified minmod: keeps ``a1`` when it is already below ``threshold``."""
    out = kernels._pykernels.minmod_bar(a1, a2, a3, threshold)
    return float(out) if np.ndim(out) == 0 else out


def apply_tvb(state: RoadState, cfg: TvbConfig, periodic: bool = False) -> int:
    """Limit ``state`` in place; returns the number of modified cells.

    End cells of a non-periodic road reuse their single neighbour difference
    for both minmod arguments.
    """
    if not cfg.enabled or state.k == 0:
        return 0
    tabs = basis_tables(state.k)
    return kernels.backend.tvb_limit(state.coeffs, state.mesh.widths, tabs.psi_right,
                                     tabs.psi_left, float(cfg.M), bool(periodic))


def apply_bp(state: RoadState, cfg: BpConfig, where: str = "") -> None:
    """Rescale each cell about its average so Gauss-Lobatto values stay in bounds."""
    if not cfg.enabled:
        return
    tabs = basis_tables(state.k)
    bad = kernels.backend.bp_limit(state.coeffs, tabs.phi_gl, cfg.rho_min, cfg.rho_max, AVERAGE_TOL)
    if bad >= 0:
        avg = state.coeffs[bad, 0]
        raise IntegrityError(
            f"{where}cell {bad}: average {avg!r} outside [{cfg.rho_min}, {cfg.rho_max}] "
            "before bound limiting (time step too large?)"
        )
