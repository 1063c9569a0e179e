"""Runge-Kutta DG time stepping on a road network.

Roads are coupled only through the fluxes at their ends. At every
Runge-Kutta stage the junction fluxes are recomputed from the demand and
supply of the current traces, open ends use a ghost density, and periodic
roads close on themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import BoundarySpec, NetworkConfig
from .dg import Mesh1D, RoadState, basis_tables, dg_residual, project_initial
from .errors import IntegrityError
from .fundamental_diagram import FluxModel
from .junction import solve
from .limiters import BpConfig, apply_bp, apply_tvb

__all__ = [
    "TRACE_TOL",
    "Network",
    "NetworkState",
    "RunResult",
    "compute_dt",
    "junction_coupling",
    "open_boundary_flux",
    "rk3_step",
    "run",
]

# traces this far outside [0, rho_max] at a junction indicate a broken limiter
TRACE_TOL = 1e-10


def _f(model: FluxModel, rho: float) -> float:
    if model.quadratic is not None:
        v, rm = model.quadratic
        return v * rho * (1.0 - rho / rm)
    return float(model.f(rho))


def _numflux(model: FluxModel, kind: str, a: float, b: float) -> float:
    fa = _f(model, a)
    fb = _f(model, b)
    if kind == "lf":
        return 0.5 * (fa + fb) + 0.5 * model.lf_alpha * (a - b)
    if a <= b:
        return min(fa, fb)
    if b <= model.sigma <= a:
        return model.f_sigma
    return max(fa, fb)


def _demand(model: FluxModel, rho: float) -> float:
    return _f(model, rho) if rho <= model.sigma else model.f_sigma


def _supply(model: FluxModel, rho: float) -> float:
    return model.f_sigma if rho <= model.sigma else _f(model, rho)


class Network:
    """Immutable, index-based view of a validated :class:`NetworkConfig`."""

    def __init__(self, cfg: NetworkConfig):
        self.cfg = cfg
        self.ids = [r.id for r in cfg.roads]
        self.index = {rid: i for i, rid in enumerate(self.ids)}
        self.models = [r.flux for r in cfg.roads]
        self.degrees = [cfg.degree_of(r) for r in cfg.roads]
        self.meshes = [Mesh1D.uniform(r.x_min, r.x_max, r.n_cells) for r in cfg.roads]
        n = len(self.ids)
        self.periodic = [False] * n
        self.left_bc: list[Optional[BoundarySpec]] = [None] * n
        self.right_bc: list[Optional[BoundarySpec]] = [None] * n
        for b in cfg.boundaries:
            i = self.index[b.road]
            if b.kind == "periodic":
                self.periodic[i] = True
            elif b.end == "left":
                self.left_bc[i] = b
            else:
                self.right_bc[i] = b
        self.junctions = [
            (j, [self.index[r] for r in j.incoming], [self.index[r] for r in j.outgoing])
            for j in cfg.junctions
        ]
        s = cfg.solver
        self.flux = s.flux
        self.bp = [BpConfig(m.rho_max, enabled=s.bp) for m in self.models]
        self.tvb = s.tvb
        self.tables = [basis_tables(k) for k in self.degrees]

    @property
    def n_roads(self) -> int:
        return len(self.ids)

    def initial_state(self) -> "NetworkState":
        roads = []
        for i, r in enumerate(self.cfg.roads):
            st = project_initial(self.meshes[i], self.degrees[i], r.initial)
            self._limit(i, st, "initial data")
            roads.append(st)
        return NetworkState(self, roads, 0.0, 0)

    def _limit(self, i: int, st: RoadState, when: str) -> None:
        if self.tvb.enabled and st.k > 0:
            apply_tvb(st, self.tvb, periodic=self.periodic[i])
        apply_bp(st, self.bp[i], where=f"road {self.ids[i]!r} ({when}): ")

    def traces(self, roads):
        tl = [float(st.coeffs[0] @ tb.psi_left) for st, tb in zip(roads, self.tables)]
        tr = [float(st.coeffs[-1] @ tb.psi_right) for st, tb in zip(roads, self.tables)]
        return tl, tr

    def _checked_trace(self, i: int, rho: float, where: str) -> float:
        rm = self.models[i].rho_max
        if not -TRACE_TOL <= rho <= rm + TRACE_TOL:
            raise IntegrityError(
                f"{where}: trace {rho!r} of road {self.ids[i]!r} outside [0, {rm}]"
            )
        return min(max(rho, 0.0), rm)

    def end_fluxes(self, roads):
        """Fluxes through every road end and the net inflow through open ends."""
        tl, tr = self.traces(roads)
        n = self.n_roads
        fl = [0.0] * n
        fr = [0.0] * n
        for spec, ins, outs in self.junctions:
            where = f"junction {spec.name or spec.kind.value}"
            dem = [_demand(self.models[i], self._checked_trace(i, tr[i], where)) for i in ins]
            sup = [_supply(self.models[i], self._checked_trace(i, tl[i], where)) for i in outs]
            sol = solve(spec, dem, sup)
            for i, g in zip(ins, sol.gamma_in):
                fr[i] = g
            for i, g in zip(outs, sol.gamma_out):
                fl[i] = g
        external = 0.0
        for i in range(n):
            m = self.models[i]
            if self.periodic[i]:
                fl[i] = fr[i] = _numflux(m, self.flux, tr[i], tl[i])
                continue
            b = self.left_bc[i]
            if b is not None:
                ghost = b.density if b.kind == "inflow" else tl[i]
                fl[i] = _numflux(m, self.flux, ghost, tl[i])
                external += fl[i]
            b = self.right_bc[i]
            if b is not None:
                ghost = b.density if b.kind == "inflow" else tr[i]
                fr[i] = _numflux(m, self.flux, tr[i], ghost)
                external -= fr[i]
        return fl, fr, external

    def operator(self, roads):
        fl, fr, external = self.end_fluxes(roads)
        res = [dg_residual(st, self.models[i], fl[i], fr[i], self.flux) for i, st in enumerate(roads)]
        return res, external

    def max_dt(self) -> float:
        """Largest stable step: CFL restriction, capped by the bound limiter's."""
        s = self.cfg.solver
        dt = math.inf
        for i, mesh in enumerate(self.meshes):
            k = self.degrees[i]
            dx = float(mesh.widths.min())
            a = self.models[i].lf_alpha
            scale = dx ** (4.0 / 3.0) if k == 3 else dx
            dt = min(dt, s.cfl[k] * scale / a)
            if s.bp:
                dt = min(dt, float(self.tables[i].w_gl.min()) * dx / a)
        return dt


@dataclass
class NetworkState:
    net: Network
    roads: list
    t: float = 0.0
    step: int = 0

    def copy(self) -> "NetworkState":
        return NetworkState(self.net, [r.copy() for r in self.roads], self.t, self.step)

    def road(self, road_id: str) -> RoadState:
        return self.roads[self.net.index[road_id]]

    def mass(self) -> float:
        return math.fsum(r.mass() for r in self.roads)

    def extrema(self):
        lo = min(float(r.lobatto_values().min()) for r in self.roads)
        hi = max(float(r.lobatto_values().max()) for r in self.roads)
        return lo, hi


def compute_dt(state: NetworkState) -> float:
    return state.net.max_dt()


def junction_coupling(state: NetworkState) -> dict:
    """Junction fluxes for the current traces: {name or index: JunctionFluxes}."""
    net = state.net
    tl, tr = net.traces(state.roads)
    out = {}
    for n, (spec, ins, outs) in enumerate(net.junctions):
        where = f"junction {spec.name or n}"
        dem = [_demand(net.models[i], net._checked_trace(i, tr[i], where)) for i in ins]
        sup = [_supply(net.models[i], net._checked_trace(i, tl[i], where)) for i in outs]
        out[spec.name or n] = solve(spec, dem, sup)
    return out


def open_boundary_flux(state: NetworkState, road_id: str, end: str) -> float:
    """Numerical flux through an open road end (positive in +x)."""
    net = state.net
    i = net.index[road_id]
    fl, fr, _ = net.end_fluxes(state.roads)
    return fl[i] if end == "left" else fr[i]


def _finite(net: Network, roads, t: float) -> None:
    for i, st in enumerate(roads):
        bad = ~np.isfinite(st.coeffs).all(axis=1)
        if bad.any():
            raise IntegrityError(f"non-finite coefficients on road {net.ids[i]!r}, "
                                 f"cell {int(np.argmax(bad))}, at t={t!r}")


def rk3_step(state: NetworkState, dt: float):
    """One SSP-RK3 step with limiting after every stage.

    Returns the new state and the time integral of the net inflow through
    open road ends over the step, consistent with the stage weights.
    """
    net = state.net
    u0 = state.roads
    when = f"t={state.t!r}"

    L0, e0 = net.operator(u0)
    u1 = [RoadState(st.mesh, st.k, st.coeffs + dt * r) for st, r in zip(u0, L0)]
    _finite(net, u1, state.t)
    for i, st in enumerate(u1):
        net._limit(i, st, when)

    L1, e1 = net.operator(u1)
    # convex combinations written as increments so that a steady state is kept bit-exact
    u2 = [RoadState(a.mesh, a.k, a.coeffs + 0.25 * ((b.coeffs + dt * r) - a.coeffs))
          for a, b, r in zip(u0, u1, L1)]
    _finite(net, u2, state.t)
    for i, st in enumerate(u2):
        net._limit(i, st, when)

    L2, e2 = net.operator(u2)
    u3 = [RoadState(a.mesh, a.k, a.coeffs + (2.0 / 3.0) * ((b.coeffs + dt * r) - a.coeffs))
          for a, b, r in zip(u0, u2, L2)]
    _finite(net, u3, state.t)
    for i, st in enumerate(u3):
        net._limit(i, st, when)

    inflow = dt * (e0 / 6.0 + e1 / 6.0 + 2.0 * e2 / 3.0)
    return NetworkState(net, u3, state.t + dt, state.step + 1), inflow


@dataclass
class RunResult:
    config: NetworkConfig
    state: NetworkState
    snapshots: dict = field(default_factory=dict)  # time -> NetworkState
    dts: list = field(default_factory=list)
    mass_initial: float = 0.0
    mass_final: float = 0.0
    boundary_inflow: float = 0.0
    rho_min: float = math.inf
    rho_max: float = -math.inf

    @property
    def steps(self) -> int:
        return len(self.dts)

    @property
    def mass_drift(self) -> float:
        return self.mass_final - self.mass_initial - self.boundary_inflow

    @property
    def relative_mass_drift(self) -> float:
        scale = max(abs(self.mass_initial), abs(self.mass_final), abs(self.boundary_inflow), 1e-300)
        return abs(self.mass_drift) / scale

    def summary(self) -> dict:
        return {
            "name": self.config.name,
            "t_end": self.state.t,
            "steps": self.steps,
            "dt_min": min(self.dts) if self.dts else None,
            "dt_max": max(self.dts) if self.dts else None,
            "mass_initial": self.mass_initial,
            "mass_final": self.mass_final,
            "boundary_inflow": self.boundary_inflow,
            "mass_drift": self.mass_drift,
            "relative_mass_drift": self.relative_mass_drift,
            "rho_min": self.rho_min,
            "rho_max": self.rho_max,
            "output_times": sorted(self.snapshots),
        }


def run(cfg: NetworkConfig, observer: Optional[Callable[[NetworkState], None]] = None) -> RunResult:
    """Advance ``cfg`` from t=0 to its final time.

    Steps are shortened to land exactly on every output time; ``observer``
    is called with the state after every step.
    """
    net = Network(cfg)
    state = net.initial_state()
    s = cfg.solver
    targets = sorted({float(t) for t in s.output_times if t > 0.0} | {float(s.t_end)})
    res = RunResult(cfg, state, mass_initial=state.mass())
    res.rho_min, res.rho_max = state.extrema()
    if 0.0 in s.output_times:
        res.snapshots[0.0] = state.copy()
    dt_max = net.max_dt()
    inflow = []
    for target in targets:
        while state.t < target:
            dt = min(dt_max, target - state.t)
            state, q = rk3_step(state, dt)
            if target - state.t <= 1e-12 * max(1.0, target):
                state.t = target
            res.dts.append(dt)
            inflow.append(q)
            lo, hi = state.extrema()
            res.rho_min = min(res.rho_min, lo)
            res.rho_max = max(res.rho_max, hi)
            if observer is not None:
                observer(state)
        if target in s.output_times:
            res.snapshots[target] = state.copy()
    res.state = state
    res.mass_final = state.mass()
    res.boundary_inflow = math.fsum(inflow)
    return res
