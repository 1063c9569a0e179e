"""Oracles and error metrology.

* the exact smooth solution of the periodic accuracy problem,
* a brute-force grid search for junction fluxes, independent of the
  closed-form solvers,
* L1/Linf norms, convergence tables and first-order reference runs.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import legendre

from . import kernels
from .config import NetworkConfig
from .dg import RoadState, basis_tables
from .errors import ConfigError, DomainError
from .junction import JunctionFluxes, JunctionKind
from .limiters import TvbConfig
from .network import RunResult, run
from .presets import build_preset

__all__ = [
    "exact_smooth_solution",
    "lp_junction_oracle",
    "error_norms",
    "ErrorRow",
    "ErrorReport",
    "convergence_study",
    "accuracy_config",
    "reference_config",
    "coarse_grain",
    "l1_average_distance",
    "observed_orders",
    "compare_to_reference",
    "FuzzReport",
    "sample_junction_instance",
    "junction_fuzz",
]


# ------------------------------------------------------------ exact solution

def exact_smooth_solution(x, t: float, tol: float = 1e-14, max_iter: int = 100):
    """Solution of rho_t + (rho(1-rho))_x = 0 with rho_0 = 0.5 + 0.5 sin(2 pi x).

    Solves rho = rho_0(x - (1 - 2 rho) t) by Newton's method. Characteristics
    first cross at t = 1/(2 pi); later times raise :class:`DomainError`.
    """
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    if 2.0 * math.pi * t >= 1.0:
        raise DomainError(f"t={t!r} is past the shock formation time 1/(2 pi)")
    x = np.asarray(x, dtype=float)
    rho = 0.5 + 0.5 * np.sin(2.0 * np.pi * x)
    if t == 0:
        return rho
    for _ in range(max_iter):
        theta = 2.0 * np.pi * (x - (1.0 - 2.0 * rho) * t)
        g = rho - 0.5 - 0.5 * np.sin(theta)
        dg = 1.0 - 2.0 * np.pi * t * np.cos(theta)
        step = g / dg
        rho = rho - step
        if np.all(np.abs(step) <= tol):
            return rho
    raise DomainError(f"Newton iteration did not converge at t={t!r}")


# ------------------------------------------------------------ LP grid oracle

def _lattice_scan(lo_a, hi_a, lo_b, hi_b, step, cons, band, wa=0.0, wb=0.0):
    cons = np.ascontiguousarray(cons, dtype=float)
    return kernels.backend.lp_grid_scan(float(lo_a), float(hi_a), float(lo_b), float(hi_b),
                                        float(step), cons, float(band), float(wa), float(wb))


def lp_junction_oracle(kind, demands: Sequence[float], supplies: Sequence[float],
                       alpha: Optional[float] = None, beta: Optional[float] = None,
                       q: Optional[float] = None, grid: float = 1e-3,
                       levels: int = 4, zoom_points: int = 200) -> JunctionFluxes:
    """Junction fluxes by exhaustive search over a lattice of spacing ``grid``.

    Maximizes the total incoming flux over the feasible set. For 2x1 the
    optimum is a segment; the point closest to the priority line
    (1-q) g_a = q g_b is taken among lattice points within half a step of
    the maximum. For 2x2 the search zooms ``levels`` times into the
    near-optimal region with ``zoom_points`` points per side.
    """
    if grid > 1e-3:
        raise ConfigError(f"grid resolution must be <= 1e-3, got {grid}")
    kind = JunctionKind(kind) if not isinstance(kind, JunctionKind) else kind
    h = grid
    if kind is JunctionKind.ONE_ONE:
        (d,), (s,) = demands, supplies
        g = _lattice_scan(0, d, 0, 0, h, [[1.0, 0.0, s]], 0.0)[0]
        return JunctionFluxes((g,), (g,))
    if kind is JunctionKind.ONE_TWO:
        (d,), (sb, sc) = demands, supplies
        cons = [[alpha, 0.0, sb], [1.0 - alpha, 0.0, sc]]
        g = _lattice_scan(0, d, 0, 0, h, cons, 0.0)[0]
        return JunctionFluxes((g,), (alpha * g, (1.0 - alpha) * g))
    if kind is JunctionKind.TWO_ONE:
        (da, db), (sc,) = demands, supplies
        r = _lattice_scan(0, da, 0, db, h, [[1.0, 1.0, sc]], 0.5 * h, 1.0 - q, q)
        ga, gb = r[3], r[4]
        return JunctionFluxes((ga, gb), (ga + gb,))
    (da, db), (sc, sd) = demands, supplies
    cons = [[alpha, beta, sc], [1.0 - alpha, 1.0 - beta, sd]]
    lo_a, hi_a, lo_b, hi_b, step = 0.0, da, 0.0, db, h
    for _ in range(levels):
        r = _lattice_scan(lo_a, hi_a, lo_b, hi_b, step, cons, 2.0 * step)
        ga, gb = r[0], r[1]
        lo_a, hi_a = max(0.0, r[5] - 2 * step), min(da, r[6] + 2 * step)
        lo_b, hi_b = max(0.0, r[7] - 2 * step), min(db, r[8] + 2 * step)
        step = max(hi_a - lo_a, hi_b - lo_b) / zoom_points
        if step < 1e-12:
            break
    return JunctionFluxes((ga, gb), (alpha * ga + beta * gb, (1 - alpha) * ga + (1 - beta) * gb))


# ------------------------------------------------------------ error norms

def error_norms(state: RoadState, exact: Callable) -> tuple:
    """(L1, Linf) distance between ``state`` and the callable ``exact``.

    L1 uses the (k+2)-point Gauss-Legendre rule on every cell; Linf is the
    maximum over those points and both one-sided values at every cell edge.
    """
    tabs = basis_tables(state.k)
    mesh = state.mesh
    c = state.coeffs
    half = 0.5 * mesh.widths
    x = mesh.centers[:, None] + half[:, None] * tabs.xq[None, :]
    err = np.abs(c @ tabs.phi_q - exact(x))
    l1 = float(np.sum(half * (err @ tabs.wq)))
    edges = mesh.edges
    e_left = np.abs(c @ tabs.psi_left - exact(edges[:-1]))
    e_right = np.abs(c @ tabs.psi_right - exact(edges[1:]))
    linf = float(max(err.max(), e_left.max(), e_right.max()))
    return l1, linf


def observed_orders(errors: Sequence[float]) -> list:
    """log2(e_N / e_2N) between successive refinements (None for the first)."""
    out = [None]
    for a, b in zip(errors[:-1], errors[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else None)
    return out


@dataclass
class ErrorRow:
    n: int
    l1: float
    l1_order: Optional[float]
    linf: float
    linf_order: Optional[float]
    rho_min: float
    rho_max: float
    seconds: float = 0.0


@dataclass
class ErrorReport:
    degree: int
    bp: bool
    rows: list = field(default_factory=list)

    def row(self, n: int) -> ErrorRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def to_text(self) -> str:
        def fmt_order(o):
            return "--" if o is None else f"{o:.2f}"
        head = f"P{self.degree} ({'with' if self.bp else 'without'} BP limiter)"
        lines = [head, f"{'N':>5} {'L1 error':>10} {'order':>6} {'Linf error':>11} {'order':>6} "
                       f"{'min':>10} {'max':>10}"]
        for r in self.rows:
            lines.append(f"{r.n:>5} {r.l1:>10.2E} {fmt_order(r.l1_order):>6} {r.linf:>11.2E} "
                         f"{fmt_order(r.linf_order):>6} {r.rho_min:>10.6f} {r.rho_max:>10.6f}")
        return "\n".join(lines)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        if header:
            w.writerow(["degree", "bp", "N", "L1_error", "L1_order", "Linf_error", "Linf_order",
                        "min", "max", "seconds"])
        for r in self.rows:
            w.writerow([self.degree, int(self.bp), r.n, f"{r.l1:.6e}",
                        "" if r.l1_order is None else f"{r.l1_order:.4f}", f"{r.linf:.6e}",
                        "" if r.linf_order is None else f"{r.linf_order:.4f}",
                        f"{r.rho_min:.9f}", f"{r.rho_max:.9f}", f"{r.seconds:.3f}"])
        return buf.getvalue()


# CFL numbers for the accuracy study; P2 and P3 use 0.05 so that the spatial
# error dominates
ACCURACY_CFL = {0: 1.0, 1: 0.33, 2: 0.05, 3: 0.05}


def accuracy_config(degree: int, n: int, bp: bool, cfl: Optional[dict] = None) -> NetworkConfig:
    cfg = build_preset("accuracy").with_cells(n)
    return cfg.with_solver(degree=degree, bp=bp, tvb=TvbConfig(enabled=False),
                           cfl=dict(cfl or ACCURACY_CFL))


def convergence_study(degrees: Sequence[int] = (0, 1, 2, 3),
                      meshes: Sequence[int] = (10, 20, 40, 80, 160, 320),
                      bp: bool = False, cfl: Optional[dict] = None, t: float = 0.1) -> list:
    """Error tables for the periodic accuracy problem, one report per degree.

    Min and max are taken over the Gauss-Lobatto values of the final state.
    """
    reports = []
    exact = lambda x: exact_smooth_solution(x, t)
    for k in degrees:
        rows = []
        for n in meshes:
            cfg = accuracy_config(k, n, bp, cfl).with_solver(t_end=t, output_times=(t,))
            t0 = time.perf_counter()
            res = run(cfg)
            secs = time.perf_counter() - t0
            st = res.state.roads[0]
            l1, linf = error_norms(st, exact)
            vals = st.lobatto_values()
            rows.append(ErrorRow(n, l1, None, linf, None, float(vals.min()), float(vals.max()), secs))
        for r, o1, oi in zip(rows, observed_orders([r.l1 for r in rows]),
                             observed_orders([r.linf for r in rows])):
            r.l1_order, r.linf_order = o1, oi
        reports.append(ErrorReport(k, bp, rows))
    return reports


# ------------------------------------------------------------ network references

REFERENCE_CELLS = 1600


def reference_config(cfg: NetworkConfig, cells_per_unit: int = REFERENCE_CELLS) -> NetworkConfig:
    """First-order Godunov finite volume version of ``cfg`` on a fine mesh."""
    fine = cfg.with_cells(cells_per_unit)
    roads = tuple(replace(r, degree=None) for r in fine.roads)
    return replace(fine, roads=roads).with_solver(
        degree=0, flux="godunov", bp=True, tvb=TvbConfig(enabled=False))


def coarse_grain(fine: np.ndarray, factor: int) -> np.ndarray:
    """Means of consecutive groups of ``factor`` values."""
    fine = np.asarray(fine, dtype=float)
    if factor < 1 or len(fine) % factor:
        raise ConfigError(f"{len(fine)} cells cannot be grouped by {factor}")
    return fine.reshape(-1, factor).mean(axis=1)


def l1_average_distance(coarse: RoadState, fine: RoadState) -> float:
    """L1 distance between cell averages, the fine ones grouped onto the coarse mesh."""
    factor = fine.mesh.n_cells // coarse.mesh.n_cells
    ref = coarse_grain(fine.averages, factor)
    return float(np.sum(coarse.mesh.widths * np.abs(coarse.averages - ref)))


def compare_to_reference(runs: dict, reference: RunResult) -> dict:
    """{label: {time: {road: L1 distance}}} for runs keyed by label."""
    out = {}
    ids = reference.state.net.ids
    for label, res in runs.items():
        per_t = {}
        for t, snap in res.snapshots.items():
            ref = reference.snapshots[t]
            per_t[t] = {rid: l1_average_distance(snap.roads[i], ref.roads[i])
                        for i, rid in enumerate(ids)}
        out[label] = per_t
    return out


# ------------------------------------------------------------ junction fuzzing

@dataclass
class FuzzReport:
    kind: JunctionKind
    trials: int
    max_error: float = 0.0
    mismatches: int = 0
    max_imbalance: float = 0.0
    conservation_violations: int = 0
    infeasible: int = 0
    seconds: float = 0.0
    worst: Optional[dict] = None

    @property
    def ok(self) -> bool:
        return self.mismatches == 0 and self.conservation_violations == 0 and self.infeasible == 0

    def line(self) -> str:
        return (f"{self.kind.value}: {self.trials} trials, max |closed form - oracle| = "
                f"{self.max_error:.2e}, mismatches = {self.mismatches}, max imbalance = "
                f"{self.max_imbalance:.1e}, conservation violations = {self.conservation_violations}, "
                f"infeasible = {self.infeasible}, {self.seconds:.1f}s")


FUZZ_TOL = 2e-3
CONSERVATION_TOL = 1e-13


def sample_junction_instance(kind: JunctionKind, rng: np.random.Generator, cap: float = 0.25,
                             min_split_gap: float = 0.05) -> dict:
    """Random demands, supplies and junction parameters.

    For 2x2 junctions alpha and beta are kept ``min_split_gap`` apart; the
    grid oracle cannot resolve the thin feasible wedge when they nearly
    coincide.
    """
    n_in, n_out = {JunctionKind.ONE_ONE: (1, 1), JunctionKind.ONE_TWO: (1, 2),
                   JunctionKind.TWO_ONE: (2, 1), JunctionKind.TWO_TWO: (2, 2)}[kind]
    inst = {"demands": tuple(rng.uniform(0.0, cap, n_in)),
            "supplies": tuple(rng.uniform(0.0, cap, n_out)),
            "alpha": None, "beta": None, "q": None}
    if kind in (JunctionKind.ONE_TWO, JunctionKind.TWO_TWO):
        inst["alpha"] = float(rng.uniform(0.05, 0.95))
    if kind is JunctionKind.TWO_TWO:
        while True:
            beta = float(rng.uniform(0.05, 0.95))
            if abs(beta - inst["alpha"]) >= min_split_gap:
                break
        inst["beta"] = beta
    if kind is JunctionKind.TWO_ONE:
        inst["q"] = float(rng.uniform(0.05, 0.95))
    return inst


def junction_fuzz(kind, trials: int, seed: int = 0) -> FuzzReport:
    """Compare the closed-form junction solver with the grid oracle."""
    from .junction import JunctionSpec, solve

    kind = JunctionKind(kind) if not isinstance(kind, JunctionKind) else kind
    rng = np.random.default_rng(seed)
    rep = FuzzReport(kind, trials)
    n_in, n_out = {JunctionKind.ONE_ONE: (1, 1), JunctionKind.ONE_TWO: (1, 2),
                   JunctionKind.TWO_ONE: (2, 1), JunctionKind.TWO_TWO: (2, 2)}[kind]
    ins = tuple(f"i{m}" for m in range(n_in))
    outs = tuple(f"o{m}" for m in range(n_out))
    t0 = time.perf_counter()
    for _ in range(trials):
        inst = sample_junction_instance(kind, rng)
        spec = JunctionSpec(ins, outs, alpha=inst["alpha"], beta=inst["beta"], q=inst["q"])
        got = solve(spec, inst["demands"], inst["supplies"])
        ref = lp_junction_oracle(kind, inst["demands"], inst["supplies"],
                                 inst["alpha"], inst["beta"], inst["q"])
        err = max(abs(a - b) for a, b in zip(got.gamma_in + got.gamma_out, ref.gamma_in + ref.gamma_out))
        imbalance = abs(math.fsum(got.gamma_in) - math.fsum(got.gamma_out))
        feasible = (all(0.0 <= g <= d + CONSERVATION_TOL for g, d in zip(got.gamma_in, inst["demands"]))
                    and all(-CONSERVATION_TOL <= g <= s + CONSERVATION_TOL
                            for g, s in zip(got.gamma_out, inst["supplies"])))
        if err > rep.max_error:
            rep.max_error = err
            rep.worst = {**inst, "solver": got, "oracle": ref}
        rep.mismatches += err > FUZZ_TOL
        rep.max_imbalance = max(rep.max_imbalance, imbalance)
        rep.conservation_violations += imbalance > CONSERVATION_TOL
        rep.infeasible += not feasible
    rep.seconds = time.perf_counter() - t0
    return rep
