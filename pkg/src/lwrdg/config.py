"""Network configuration: dataclasses, validation and JSON round-trip.

Config files are JSON objects with keys ``roads``, ``junctions``,
``boundaries`` and ``solver``; see ``schema/network.schema.json``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .dg import MAX_DEGREE
from .errors import ConfigError
from .fundamental_diagram import FluxModel, model_from_key, model_to_key
from .junction import JunctionSpec
from .limiters import TvbConfig

__all__ = [
    "DEFAULT_CFL",
    "InitialCondition",
    "RoadSpec",
    "BoundarySpec",
    "SolverConfig",
    "NetworkConfig",
    "from_dict",
    "to_dict",
    "load",
    "dump",
]

DEFAULT_CFL = {0: 1.0, 1: 0.33, 2: 0.20, 3: 0.14}


@dataclass(frozen=True)
class InitialCondition:
    """Initial density as a function of the global coordinate x.

    ``constant``: value; ``sine``: base + amplitude*sin(pi*wavenumber*x);
    ``piecewise``: ``value`` on each closed interval in ``pieces``, else ``default``.
    """

    kind: str
    value: float = 0.0
    base: float = 0.0
    amplitude: float = 0.0
    wavenumber: float = 0.0
    pieces: tuple = ()
    default: float = 0.0

    @classmethod
    def constant(cls, value):
        return cls("constant", value=float(value))

    @classmethod
    def sine(cls, base, amplitude, wavenumber):
        return cls("sine", base=float(base), amplitude=float(amplitude), wavenumber=float(wavenumber))

    @classmethod
    def piecewise(cls, pieces, default):
        pieces = tuple((float(a), float(b), float(v)) for a, b, v in pieces)
        return cls("piecewise", pieces=pieces, default=float(default))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.value)
        if self.kind == "sine":
            return self.base + self.amplitude * np.sin(np.pi * self.wavenumber * x)
        out = np.full_like(x, self.default)
        for a, b, v in self.pieces:
            out[(x >= a) & (x <= b)] = v
        return out

    def bounds(self):
        if self.kind == "constant":
            return self.value, self.value
        if self.kind == "sine":
            return self.base - abs(self.amplitude), self.base + abs(self.amplitude)
        vals = [self.default] + [v for _, _, v in self.pieces]
        return min(vals), max(vals)

    def to_dict(self):
        if self.kind == "constant":
            return {"type": "constant", "value": self.value}
        if self.kind == "sine":
            return {"type": "sine", "base": self.base, "amplitude": self.amplitude,
                    "wavenumber": self.wavenumber}
        return {"type": "piecewise", "default": self.default, "pieces": [list(p) for p in self.pieces]}

    @classmethod
    def from_dict(cls, d, where):
        if isinstance(d, (int, float)):
            return cls.constant(d)
        if not isinstance(d, dict) or "type" not in d:
            raise ConfigError(f"{where}: expected a number or an object with 'type'")
        kind = d["type"]
        try:
            if kind == "constant":
                return cls.constant(d["value"])
            if kind == "sine":
                return cls.sine(d["base"], d["amplitude"], d["wavenumber"])
            if kind == "piecewise":
                return cls.piecewise(d["pieces"], d["default"])
        except KeyError as exc:
            raise ConfigError(f"{where}: missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: malformed {kind} initial condition") from None
        raise ConfigError(f"{where}.type: unknown initial condition {kind!r}")


@dataclass(frozen=True)
class RoadSpec:
    id: str
    x_min: float
    x_max: float
    flux: FluxModel
    n_cells: int
    initial: InitialCondition
    degree: Optional[int] = None

    @property
    def length(self):
        return self.x_max - self.x_min


@dataclass(frozen=True)
class BoundarySpec:
    """An open road end. ``kind`` is ``inflow``, ``outflow`` or ``periodic``.

    A periodic entry joins both ends of one road and ignores ``end``.
    """

    road: str
    kind: str
    end: str = "left"
    density: Optional[float] = None


@dataclass(frozen=True)
class SolverConfig:
    degree: int = 1
    t_end: float = 1.0
    output_times: tuple = ()
    cfl: dict = field(default_factory=lambda: dict(DEFAULT_CFL))
    flux: str = "lf"
    tvb: TvbConfig = TvbConfig()
    bp: bool = True
    samples_per_cell: int = 4


@dataclass(frozen=True)
class NetworkConfig:
    roads: tuple
    junctions: tuple = ()
    boundaries: tuple = ()
    solver: SolverConfig = SolverConfig()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "roads", tuple(self.roads))
        object.__setattr__(self, "junctions", tuple(self.junctions))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        validate(self)

    def road(self, road_id):
        for r in self.roads:
            if r.id == road_id:
                return r
        raise KeyError(road_id)

    def degree_of(self, road: RoadSpec) -> int:
        return self.solver.degree if road.degree is None else road.degree

    def with_solver(self, **changes) -> "NetworkConfig":
        return replace(self, solver=replace(self.solver, **changes))

    def with_cells(self, cells_per_unit: int) -> "NetworkConfig":
        roads = [replace(r, n_cells=max(1, int(round(cells_per_unit * r.length)))) for r in self.roads]
        return replace(self, roads=tuple(roads))


def validate(cfg: NetworkConfig) -> None:
    ids = {}
    for i, r in enumerate(cfg.roads):
        where = f"roads[{i}]"
        if not isinstance(r.id, str) or not r.id:
            raise ConfigError(f"{where}.id: must be a nonempty string")
        if r.id in ids:
            raise ConfigError(f"{where}.id: duplicate road id {r.id!r}")
        ids[r.id] = r
        if not (math.isfinite(r.x_min) and math.isfinite(r.x_max) and r.x_max > r.x_min):
            raise ConfigError(f"{where}.interval: need x_min < x_max, got [{r.x_min}, {r.x_max}]")
        if int(r.n_cells) != r.n_cells or r.n_cells < 1:
            raise ConfigError(f"{where}.n_cells: must be a positive integer, got {r.n_cells!r}")
        k = cfg.degree_of(r)
        if k not in range(MAX_DEGREE + 1):
            raise ConfigError(f"{where}.degree: must be in 0..{MAX_DEGREE}, got {k!r}")
        lo, hi = r.initial.bounds()
        if lo < 0.0 or hi > r.flux.rho_max + 1e-14:
            raise ConfigError(f"{where}.initial: densities [{lo}, {hi}] leave [0, {r.flux.rho_max}]")

    attached = {}

    def attach(road_id, end, owner):
        if road_id not in ids:
            raise ConfigError(f"{owner}: unknown road {road_id!r}")
        key = (road_id, end)
        if key in attached:
            raise ConfigError(f"{owner}: {end} end of road {road_id!r} is already attached to {attached[key]}")
        attached[key] = owner

    for i, j in enumerate(cfg.junctions):
        where = f"junctions[{i}]"
        if not isinstance(j, JunctionSpec):
            raise ConfigError(f"{where}: expected a JunctionSpec")
        for r in j.incoming:
            attach(r, "right", f"{where}.incoming")
        for r in j.outgoing:
            attach(r, "left", f"{where}.outgoing")

    for i, b in enumerate(cfg.boundaries):
        where = f"boundaries[{i}]"
        if b.kind == "periodic":
            attach(b.road, "left", where)
            attach(b.road, "right", where)
            continue
        if b.end not in ("left", "right"):
            raise ConfigError(f"{where}.end: must be 'left' or 'right', got {b.end!r}")
        if b.kind == "inflow":
            if b.density is None:
                raise ConfigError(f"{where}.density: required for inflow boundaries")
            attach(b.road, b.end, where)
            rho_max = ids[b.road].flux.rho_max
            if not 0.0 <= b.density <= rho_max:
                raise ConfigError(f"{where}.density: {b.density!r} outside [0, {rho_max}]")
        elif b.kind == "outflow":
            attach(b.road, b.end, where)
        else:
            raise ConfigError(f"{where}.type: unknown boundary type {b.kind!r}")

    for rid in ids:
        for end in ("left", "right"):
            if (rid, end) not in attached:
                raise ConfigError(f"roads: {end} end of road {rid!r} is attached to no junction or boundary")

    s = cfg.solver
    if not s.t_end > 0:
        raise ConfigError(f"solver.t_end: must be positive, got {s.t_end!r}")
    for t in s.output_times:
        if not 0.0 <= t <= s.t_end:
            raise ConfigError(f"solver.output_times: {t!r} outside [0, t_end={s.t_end}]")
    for k, c in s.cfl.items():
        if not c > 0:
            raise ConfigError(f"solver.cfl[{k}]: must be positive, got {c!r}")
    used = {cfg.degree_of(r) for r in cfg.roads}
    missing = used - set(s.cfl)
    if missing:
        raise ConfigError(f"solver.cfl: no CFL number for degree(s) {sorted(missing)}")
    if s.flux not in ("lf", "godunov"):
        raise ConfigError(f"solver.flux: must be 'lf' or 'godunov', got {s.flux!r}")
    if s.samples_per_cell < 1:
        raise ConfigError("solver.samples_per_cell: must be positive")


# ---------------------------------------------------------------- JSON mapping

def _num(d, key, where, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{where}.{key}: required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    return v


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def from_dict(data: dict) -> NetworkConfig:
    _check_keys(data, {"name", "description", "roads", "junctions", "boundaries", "solver"}, "config")
    if "roads" not in data or not isinstance(data["roads"], list) or not data["roads"]:
        raise ConfigError("roads: a nonempty list is required")
    roads = []
    for i, r in enumerate(data["roads"]):
        where = f"roads[{i}]"
        _check_keys(r, {"id", "interval", "flux", "n_cells", "degree", "initial"}, where)
        if "id" not in r:
            raise ConfigError(f"{where}.id: required")
        iv = r.get("interval", [0.0, 1.0])
        if not (isinstance(iv, list) and len(iv) == 2):
            raise ConfigError(f"{where}.interval: expected [x_min, x_max]")
        try:
            model = model_from_key(r.get("flux", "quadratic"))
        except ConfigError as exc:
            raise ConfigError(f"{where}.{exc}") from None
        if "initial" not in r:
            raise ConfigError(f"{where}.initial: required")
        degree = r.get("degree")
        roads.append(RoadSpec(
            id=str(r["id"]),
            x_min=float(iv[0]),
            x_max=float(iv[1]),
            flux=model,
            n_cells=int(_num(r, "n_cells", where)),
            initial=InitialCondition.from_dict(r["initial"], f"{where}.initial"),
            degree=None if degree is None else int(degree),
        ))

    junctions = []
    for i, j in enumerate(data.get("junctions", [])):
        where = f"junctions[{i}]"
        _check_keys(j, {"name", "incoming", "outgoing", "alpha", "beta", "q"}, where)
        for key in ("incoming", "outgoing"):
            if not isinstance(j.get(key), list):
                raise ConfigError(f"{where}.{key}: expected a list of road ids")
        try:
            junctions.append(JunctionSpec(
                incoming=tuple(str(x) for x in j["incoming"]),
                outgoing=tuple(str(x) for x in j["outgoing"]),
                alpha=j.get("alpha"), beta=j.get("beta"), q=j.get("q"),
                name=j.get("name", ""),
            ))
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    boundaries = []
    for i, b in enumerate(data.get("boundaries", [])):
        where = f"boundaries[{i}]"
        _check_keys(b, {"road", "end", "type", "density"}, where)
        if "road" not in b or "type" not in b:
            raise ConfigError(f"{where}: 'road' and 'type' are required")
        dens = b.get("density")
        if dens is not None:
            dens = float(_num(b, "density", where))
        boundaries.append(BoundarySpec(road=str(b["road"]), kind=b["type"],
                                       end=b.get("end", "left"), density=dens))

    s = data.get("solver", {})
    _check_keys(s, {"degree", "t_end", "output_times", "cfl", "flux", "tvb_M", "tvb", "bp",
                    "samples_per_cell"}, "solver")
    cfl = dict(DEFAULT_CFL)
    if "cfl" in s:
        c = s["cfl"]
        if isinstance(c, (int, float)) and not isinstance(c, bool):
            cfl = {k: float(c) for k in cfl}
        elif isinstance(c, dict):
            try:
                cfl.update({int(k): float(v) for k, v in c.items()})
            except (TypeError, ValueError):
                raise ConfigError("solver.cfl: expected a number or {degree: number}") from None
        else:
            raise ConfigError("solver.cfl: expected a number or {degree: number}")
    solver = SolverConfig(
        degree=int(s.get("degree", 1)),
        t_end=float(_num(s, "t_end", "solver", 1.0)),
        output_times=tuple(float(t) for t in s.get("output_times", [])),
        cfl=cfl,
        flux=s.get("flux", "lf"),
        tvb=TvbConfig(M=float(s.get("tvb_M", 0.0)), enabled=bool(s.get("tvb", True))),
        bp=bool(s.get("bp", True)),
        samples_per_cell=int(s.get("samples_per_cell", 4)),
    )
    return NetworkConfig(tuple(roads), tuple(junctions), tuple(boundaries), solver,
                         name=data.get("name", ""))


def to_dict(cfg: NetworkConfig) -> dict:
    roads = []
    for r in cfg.roads:
        d = {"id": r.id, "interval": [r.x_min, r.x_max], "flux": model_to_key(r.flux),
             "n_cells": r.n_cells, "initial": r.initial.to_dict()}
        if r.degree is not None:
            d["degree"] = r.degree
        roads.append(d)
    junctions = []
    for j in cfg.junctions:
        d = {"incoming": list(j.incoming), "outgoing": list(j.outgoing)}
        for key in ("alpha", "beta", "q"):
            if getattr(j, key) is not None:
                d[key] = getattr(j, key)
        if j.name:
            d["name"] = j.name
        junctions.append(d)
    boundaries = []
    for b in cfg.boundaries:
        d = {"road": b.road, "type": b.kind}
        if b.kind != "periodic":
            d["end"] = b.end
        if b.density is not None:
            d["density"] = b.density
        boundaries.append(d)
    s = cfg.solver
    solver = {"degree": s.degree, "t_end": s.t_end, "output_times": list(s.output_times),
              "cfl": {str(k): v for k, v in sorted(s.cfl.items())}, "flux": s.flux,
              "tvb": s.tvb.enabled, "tvb_M": s.tvb.M, "bp": s.bp,
              "samples_per_cell": s.samples_per_cell}
    out = {"roads": roads, "junctions": junctions, "boundaries": boundaries, "solver": solver}
    if cfg.name:
        out = {"name": cfg.name, **out}
    return out


def load(path) -> NetworkConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(data)


def dump(cfg: NetworkConfig, path) -> None:
    Path(path).write_text(json.dumps(to_dict(cfg), indent=2) + "\n")
