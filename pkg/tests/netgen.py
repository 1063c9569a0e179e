"""Random small road networks for the bound-preservation and conservation checks."""

import numpy as np

from lwrdg.config import BoundarySpec, InitialCondition, NetworkConfig, RoadSpec, SolverConfig
from lwrdg.fundamental_diagram import GREENSHIELDS, NARROW, quadratic
from lwrdg.junction import JunctionSpec
from lwrdg.limiters import TvbConfig

# (incoming count, outgoing count) of the single junction
TEMPLATES = [(1, 1), (1, 2), (2, 1), (2, 2)]


def _model(rng):
    pick = rng.integers(3)
    if pick == 0:
        return GREENSHIELDS
    if pick == 1:
        return NARROW
    return quadratic(float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 1.5)))


def _initial(rng, rho_max):
    n = int(rng.integers(1, 4))
    cuts = np.sort(rng.uniform(0, 1, 2 * n))
    pieces = [(cuts[2 * i], cuts[2 * i + 1], float(rng.uniform(0, rho_max))) for i in range(n)]
    return pieces, float(rng.uniform(0, rho_max))


def random_network(rng, degree=0, flux="godunov", cfl=0.5, t_end=None, tvb=False, bp=True,
                   max_cells=15):
    """A single junction joining 2-4 roads, each with open outer ends."""
    n_in, n_out = TEMPLATES[rng.integers(len(TEMPLATES))]
    roads, bcs = [], []
    ids_in = [f"in{i}" for i in range(n_in)]
    ids_out = [f"out{i}" for i in range(n_out)]
    for rid in ids_in + ids_out:
        m = _model(rng)
        length = float(rng.uniform(0.5, 2.0))
        x0 = float(rng.uniform(-1, 1))
        pieces, default = _initial(rng, m.rho_max)
        pieces = [(x0 + a * length, x0 + b * length, v) for a, b, v in pieces]
        n_cells = int(rng.integers(3, max_cells + 1))
        roads.append(RoadSpec(rid, x0, x0 + length, m, n_cells,
                              InitialCondition.piecewise(pieces, default)))
        end = "left" if rid.startswith("in") else "right"
        if rng.random() < 0.5:
            bcs.append(BoundarySpec(rid, "inflow", end, float(rng.uniform(0, m.rho_max))))
        else:
            bcs.append(BoundarySpec(rid, "outflow", end))
    alpha = beta = q = None
    if n_out == 2:
        alpha = float(rng.uniform(0.05, 0.95))
    if n_in == 2 and n_out == 2:
        while True:
            beta = float(rng.uniform(0.05, 0.95))
            if abs(beta - alpha) > 0.05:
                break
    if n_in == 2 and n_out == 1:
        q = float(rng.uniform(0.05, 0.95))
    junction = JunctionSpec(tuple(ids_in), tuple(ids_out), alpha=alpha, beta=beta, q=q, name="J")
    if t_end is None:
        t_end = float(rng.uniform(0.2, 1.0))
    solver = SolverConfig(degree=degree, t_end=t_end, output_times=(t_end,), cfl={degree: cfl},
                          flux=flux, tvb=TvbConfig(enabled=tvb), bp=bp)
    return NetworkConfig(tuple(roads), (junction,), tuple(bcs), solver, name="random")
