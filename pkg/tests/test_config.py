import json
from pathlib import Path

import jsonschema
import pytest

from lwrdg import config as cfgmod
from lwrdg.errors import ConfigError
from lwrdg.presets import PRESETS, TWO_TWO_RHO, build_preset, jam_threshold

ROOT = Path(__file__).resolve().parents[1]
SCHEMA = json.loads((ROOT / "src" / "lwrdg" / "schema" / "network.schema.json").read_text())


def _base():
    return {
        "roads": [{"id": "a", "interval": [0, 1], "n_cells": 10, "initial": 0.2},
                  {"id": "b", "interval": [1, 2], "n_cells": 10, "initial": 0.2},
                  {"id": "c", "interval": [1, 2], "n_cells": 10, "initial": 0.2}],
        "junctions": [{"incoming": ["a"], "outgoing": ["b", "c"], "alpha": 0.4}],
        "boundaries": [{"road": "a", "type": "inflow", "end": "left", "density": 0.2},
                       {"road": "b", "type": "outflow", "end": "right"},
                       {"road": "c", "type": "outflow", "end": "right"}],
        "solver": {"degree": 1, "t_end": 0.5},
    }


def test_minimal_config_loads():
    cfg = cfgmod.from_dict(_base())
    assert [r.id for r in cfg.roads] == ["a", "b", "c"]
    assert cfg.solver.cfl == cfgmod.DEFAULT_CFL
    assert cfg.junctions[0].alpha == 0.4


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d["junctions"][0]["outgoing"].__setitem__(1, "zz"), "unknown road 'zz'"),
    (lambda d: d["junctions"].append({"incoming": ["b", "c"], "outgoing": ["a", "a"],
                                      "alpha": 0.4, "beta": 0.4}), "junctions[1]"),
    (lambda d: d.__setitem__("junctions", [{"incoming": ["a", "b"], "outgoing": ["c"], "q": 1.0}]),
     "junctions[0]"),
    (lambda d: d["boundaries"][0].__setitem__("density", 1.5), "boundaries[0].density"),
    (lambda d: d["roads"][0].__setitem__("speed", 2), "roads[0]: unknown key"),
    (lambda d: d["solver"].__setitem__("t_end", -1), "solver.t_end"),
    (lambda d: d["solver"].__setitem__("flux", "roe"), "solver.flux"),
    (lambda d: d["roads"][1].__setitem__("id", "a"), "roads[1].id: duplicate"),
    (lambda d: d["roads"][0].__setitem__("interval", [1, 0]), "roads[0].interval"),
    (lambda d: d["roads"][0].__setitem__("initial", 1.2), "roads[0].initial"),
    (lambda d: d["roads"][0].__setitem__("n_cells", "ten"), "roads[0].n_cells"),
    (lambda d: d["boundaries"].pop(), "right end of road 'c'"),
    (lambda d: d["boundaries"].append({"road": "a", "type": "outflow", "end": "right"}),
     "already attached"),
    (lambda d: d["solver"].__setitem__("output_times", [0.7]), "solver.output_times"),
    (lambda d: d["roads"][0].__setitem__("flux", "cubic"), "roads[0].flux"),
    (lambda d: d.__setitem__("extra", 1), "config: unknown key"),
])
def test_validation_names_offending_key(mutate, message):
    d = _base()
    mutate(d)
    with pytest.raises(ConfigError, match=message.replace("[", r"\[").replace("]", r"\]")):
        cfgmod.from_dict(d)


def test_two_two_alpha_equal_beta_rejected():
    d = _base()
    d["roads"].append({"id": "e", "interval": [0, 1], "n_cells": 5, "initial": 0.1})
    d["junctions"] = [{"incoming": ["a", "e"], "outgoing": ["b", "c"], "alpha": 0.3, "beta": 0.3}]
    d["boundaries"].append({"road": "e", "type": "inflow", "end": "left", "density": 0.1})
    with pytest.raises(ConfigError, match="junctions\\[0\\]"):
        cfgmod.from_dict(d)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_round_trip_through_json(name, tmp_path):
    cfg = build_preset(name)
    path = tmp_path / f"{name}.json"
    cfgmod.dump(cfg, path)
    data = json.loads(path.read_text())
    jsonschema.validate(data, SCHEMA)
    again = cfgmod.load(path)
    assert cfgmod.to_dict(again) == cfgmod.to_dict(cfg)


@pytest.mark.parametrize("path", sorted((ROOT / "configs").glob("*.json")), ids=lambda p: p.name)
def test_shipped_configs_validate(path):
    data = json.loads(path.read_text())
    jsonschema.validate(data, SCHEMA)
    cfg = cfgmod.from_dict(data)
    assert cfg.roads


def test_invalid_json_is_config_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{roads: ")
    with pytest.raises(ConfigError, match="invalid JSON"):
        cfgmod.load(p)


def test_with_cells_and_solver():
    cfg = build_preset("bottleneck-1").with_cells(80).with_solver(degree=2)
    assert [r.n_cells for r in cfg.roads] == [80, 80]
    assert cfg.solver.degree == 2


def test_initial_condition_kinds():
    ic = cfgmod.InitialCondition.piecewise([(0.0, 0.2, 0.4)], 0.1)
    assert list(ic([0.0, 0.2, 0.3])) == [0.4, 0.4, 0.1]
    assert ic.bounds() == (0.1, 0.4)
    s = cfgmod.InitialCondition.sine(0.1, 0.05, 5.0)
    assert s(0.1) == pytest.approx(0.15)
    assert cfgmod.InitialCondition.from_dict(0.3, "x") == cfgmod.InitialCondition.constant(0.3)
    with pytest.raises(ConfigError, match="x.type"):
        cfgmod.InitialCondition.from_dict({"type": "spline"}, "x")


def test_preset_bottleneck_one():
    cfg = build_preset("bottleneck-1")
    r1, r2 = cfg.roads
    assert (r1.x_min, r1.x_max, r2.x_min, r2.x_max) == (0.0, 1.0, 1.0, 2.0)
    assert r1.initial.value == r2.initial.value == 0.66
    assert r1.flux.rho_max == 1.0 and r2.flux.rho_max == pytest.approx(2 / 3)
    assert cfg.boundaries[0].density == 0.25


def test_preset_two_two():
    step = build_preset("two-two-step")
    assert step.road("3").initial.value == step.road("4").initial.value == 0.5
    assert [b.density for b in step.boundaries if b.kind == "inflow"] == [0.2, 0.2]
    j = step.junctions[0]
    assert (j.alpha, j.beta) == (0.4, 0.3)
    const = build_preset("two-two-const")
    assert const.road("2").initial.value == TWO_TWO_RHO == 0.82732683535


def test_preset_traffic_circle_topology():
    cfg = build_preset("traffic-circle")
    assert len(cfg.roads) == 8 and len(cfg.junctions) == 4
    # follow the ring: each ring road feeds a junction whose outputs include the next one
    nxt = {}
    for j in cfg.junctions:
        for i in j.incoming:
            for o in j.outgoing:
                if i.endswith("R") and o.endswith("R"):
                    nxt[i] = o
    assert nxt == {"1R": "2R", "2R": "3R", "3R": "4R", "4R": "1R"}
    qs = {j.name: (j.q, j.alpha) for j in cfg.junctions}
    assert qs == {"J1": (0.25, None), "J2": (None, 0.5), "J3": (0.25, None), "J4": (None, 0.5)}


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        build_preset("roundabout")


def test_jam_threshold():
    # f1(r) = 1/6 on the free branch: r = (1 - sqrt(1/3)) / 2
    assert jam_threshold() == pytest.approx((1 - 3**-0.5) / 2, abs=1e-14)
    assert abs(jam_threshold() - 0.2113) <= 1e-3
