"""Named scenario presets.

Every preset is a validated :class:`NetworkConfig` on a mesh of 40 cells per
unit length; ``NetworkConfig.with_cells`` and ``with_solver`` adapt it.
"""

from __future__ import annotations

from scipy import optimize

from .config import (BoundarySpec, InitialCondition, NetworkConfig, RoadSpec,
                     SolverConfig)
from .errors import ConfigError
from .fundamental_diagram import GREENSHIELDS, NARROW
from .junction import JunctionSpec

__all__ = ["PRESETS", "build_preset", "bottleneck", "jam_threshold", "TWO_TWO_RHO"]

CELLS_PER_UNIT = 40
TWO_TWO_RHO = 0.82732683535
# alternating pattern on [0,0.2], [0.4,0.6], [0.8,1]
_STRIPES = ((0.0, 0.2), (0.4, 0.6), (0.8, 1.0))


def _stripes(inside, outside):
    return InitialCondition.piecewise([(a, b, inside) for a, b in _STRIPES], outside)


def _road(rid, ic, model=GREENSHIELDS, interval=(0.0, 1.0), cells=CELLS_PER_UNIT):
    n = max(1, int(round(cells * (interval[1] - interval[0]))))
    return RoadSpec(rid, interval[0], interval[1], model, n, ic)


def _const(v):
    return InitialCondition.constant(v)


def _inflow(road, density):
    return BoundarySpec(road, "inflow", "left", density)


def _outflow(road):
    return BoundarySpec(road, "outflow", "right")


def _solver(times, degree=1):
    return SolverConfig(degree=degree, t_end=max(times), output_times=tuple(times))


def accuracy():
    road = _road("1", InitialCondition.sine(0.5, 0.5, 2.0))
    return NetworkConfig((road,), (), (BoundarySpec("1", "periodic"),), _solver([0.1]), name="accuracy")


def accuracy_step():
    ic = InitialCondition.piecewise([(0.0, 0.3, 1.0), (0.6, 1.0, 1.0)], 0.0)
    road = _road("1", ic)
    return NetworkConfig((road,), (), (BoundarySpec("1", "periodic"),), _solver([0.1]),
                         name="accuracy-step")


def bottleneck(rho1, rho2, inflow, times, name="bottleneck"):
    """Road 1 on [0,1] (wide) feeding road 2 on [1,2] (narrow)."""
    roads = (_road("1", rho1), _road("2", rho2, NARROW, (1.0, 2.0)))
    junctions = (JunctionSpec(("1",), ("2",), name="S"),)
    bcs = (_inflow("1", inflow), _outflow("2"))
    return NetworkConfig(roads, junctions, bcs, _solver(times), name=name)


def two_one():
    roads = (_road("1", _stripes(0.1, 0.2)),
             _road("2", InitialCondition.sine(0.1, 0.05, 5.0)),
             _road("3", _const(0.1)))
    junctions = (JunctionSpec(("1", "2"), ("3",), q=0.5, name="J"),)
    bcs = (_inflow("1", 0.1), _inflow("2", 0.1), _outflow("3"))
    return NetworkConfig(roads, junctions, bcs, _solver([0.25, 0.5, 1.0]), name="two-one")


def _two_two(rho1, rho2, rho3, rho4, in1, in2, times, name):
    roads = (_road("1", rho1), _road("2", rho2), _road("3", rho3), _road("4", rho4))
    junctions = (JunctionSpec(("1", "2"), ("3", "4"), alpha=0.4, beta=0.3, name="J"),)
    bcs = (_inflow("1", in1), _inflow("2", in2), _outflow("3"), _outflow("4"))
    return NetworkConfig(roads, junctions, bcs, _solver(times), name=name)


def two_two_const():
    # the density behind the front on road 1 is not given; 0.4 makes road 1 uniform
    rho1 = InitialCondition.piecewise([(0.0, 0.5, 0.4)], 0.4)
    return _two_two(rho1, _const(TWO_TWO_RHO), _const(TWO_TWO_RHO), _const(0.5),
                    0.4, TWO_TWO_RHO, [25.0, 470.0], "two-two-const")


def two_two_step():
    return _two_two(_stripes(0.2, 0.4), InitialCondition.sine(0.2, 0.1, 5.0),
                    _const(0.5), _const(0.5), 0.2, 0.2, [0.25, 0.5], "two-two-step")


def traffic_circle():
    ring = ("1R", "2R", "3R", "4R")
    roads = [_road("1", _stripes(0.25, 0.35)),
             _road("2", InitialCondition.sine(0.2, 0.2, 5.0)),
             _road("3", _const(0.5)), _road("4", _const(0.5))]
    roads += [_road(r, _const(0.5)) for r in ring]
    junctions = (
        JunctionSpec(("1", "4R"), ("1R",), q=0.25, name="J1"),
        JunctionSpec(("1R",), ("2R", "3"), alpha=0.5, name="J2"),
        JunctionSpec(("2", "2R"), ("3R",), q=0.25, name="J3"),
        JunctionSpec(("3R",), ("4R", "4"), alpha=0.5, name="J4"),
    )
    bcs = (_inflow("1", 0.25), _inflow("2", 0.4), _outflow("3"), _outflow("4"))
    return NetworkConfig(tuple(roads), junctions, bcs, _solver([0.5, 1.0]), name="traffic-circle")


PRESETS = {
    "accuracy": accuracy,
    "accuracy-step": accuracy_step,
    "bottleneck-1": lambda: bottleneck(_const(0.66), _const(0.66), 0.25, [0.5, 1.0, 4.0], "bottleneck-1"),
    "bottleneck-2": lambda: bottleneck(_const(0.0), _const(0.0), 0.4, [2.0, 4.0, 10.0], "bottleneck-2"),
    "bottleneck-3": lambda: bottleneck(InitialCondition.sine(0.4, 0.2, 5.0), _const(0.66), 0.25,
                                       [0.2, 0.5, 0.7], "bottleneck-3"),
    "two-one": two_one,
    "two-two-const": two_two_const,
    "two-two-step": two_two_step,
    "traffic-circle": traffic_circle,
}


def build_preset(name: str) -> NetworkConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def jam_threshold(wide=GREENSHIELDS, narrow=NARROW) -> float:
    """Free-flow inflow density above which the bottleneck backs up.

    The unique rho <= sigma of the wide road whose flux equals the capacity
    of the narrow road.
    """
    cap = narrow.f_sigma
    g = lambda r: float(wide.f(r)) - cap
    return optimize.brentq(g, 0.0, wide.sigma, xtol=1e-15)

