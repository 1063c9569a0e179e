"""Concave fundamental diagrams and the pointwise fluxes built on them.

A :class:`FluxModel` bundles ``f``, its derivative, the jam density, the
critical density ``sigma`` and the global Lax-Friedrichs speed. Quadratic
(Greenshields) models carry their parameters in ``quadratic`` so that the
compiled kernels can evaluate them without calling back into Python.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .errors import ConfigError, DomainError

__all__ = [
    "FluxModel",
    "quadratic",
    "concave",
    "GREENSHIELDS",
    "NARROW",
    "model_from_key",
    "tau",
    "demand",
    "supply",
    "lax_friedrichs",
    "godunov",
]

_DOMAIN_TOL = 1e-14


@dataclass(frozen=True)
class FluxModel:
    f: Callable
    f_prime: Callable
    rho_max: float
    sigma: float
    lf_alpha: float
    name: str = "concave"
    # (v_free, rho_max) when f = v_free * rho * (1 - rho / rho_max)
    quadratic: Optional[tuple] = None
    params: dict = field(default_factory=dict, compare=False)

    @property
    def f_sigma(self) -> float:
        return float(self.f(self.sigma))

    def check(self, rho, what="density"):
        if not (-_DOMAIN_TOL <= rho <= self.rho_max + _DOMAIN_TOL):
            raise DomainError(f"{what} {rho!r} outside [0, {self.rho_max}]")

    def inverse(self, flux: float, branch: str) -> float:
        """Density on the ``"free"`` or ``"congested"`` branch with f(rho) = flux."""
        fs = self.f_sigma
        if flux < -_DOMAIN_TOL or flux > fs * (1 + 1e-14) + _DOMAIN_TOL:
            raise DomainError(f"flux {flux!r} outside [0, {fs}]")
        flux = min(max(flux, 0.0), fs)
        if self.quadratic is not None:
            v, rm = self.quadratic
            disc = math.sqrt(max(0.0, 1.0 - 4.0 * flux / (v * rm)))
            if branch == "free":
                # stable form of rm/2 * (1 - disc)
                return 2.0 * flux / (v * (1.0 + disc))
            return 0.5 * rm * (1.0 + disc)
        if branch == "free":
            lo, hi = 0.0, self.sigma
        else:
            lo, hi = self.sigma, self.rho_max
        g = lambda r: float(self.f(r)) - flux
        if g(lo) == 0.0:
            return lo
        if g(hi) == 0.0:
            return hi
        return optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def quadratic(rho_max: float = 1.0, v_free: float = 1.0, name: str = "quadratic") -> FluxModel:
    """Greenshields flux ``v_free * rho * (1 - rho / rho_max)``."""
    if not (rho_max > 0 and v_free > 0):
        raise ConfigError(f"quadratic model needs rho_max > 0 and v_free > 0, got {rho_max}, {v_free}")
    rho_max = float(rho_max)
    v_free = float(v_free)

    def f(rho):
        return v_free * rho * (1.0 - rho / rho_max)

    def f_prime(rho):
        return v_free * (1.0 - 2.0 * rho / rho_max)

    return FluxModel(
        f=f,
        f_prime=f_prime,
        rho_max=rho_max,
        sigma=0.5 * rho_max,
        lf_alpha=v_free,
        name=name,
        quadratic=(v_free, rho_max),
        params={"rho_max": rho_max, "v_free": v_free},
    )


def concave(f: Callable, f_prime: Callable, rho_max: float, name: str = "concave") -> FluxModel:
    """Wrap an arbitrary strictly concave flux with f(0) = f(rho_max) = 0.

    The critical density comes from a bounded scalar search; the
    Lax-Friedrichs speed is max(|f'(0)|, |f'(rho_max)|), which is exact
    because f' is decreasing.
    """
    res = optimize.minimize_scalar(
        lambda r: -float(f(r)), bounds=(0.0, rho_max), method="bounded",
        options={"xatol": 1e-13},
    )
    sigma = float(res.x)
    alpha = max(abs(float(f_prime(0.0))), abs(float(f_prime(rho_max))))
    return FluxModel(f=f, f_prime=f_prime, rho_max=float(rho_max), sigma=sigma,
                     lf_alpha=alpha, name=name)


GREENSHIELDS = quadratic(1.0, 1.0, name="quadratic")
NARROW = quadratic(2.0 / 3.0, 1.0, name="bottleneck-narrow")


def model_from_key(spec) -> FluxModel:
    """Build a model from a config entry (a string key or a dict with ``model``)."""
    if isinstance(spec, str):
        spec = {"model": spec}
    if not isinstance(spec, dict) or "model" not in spec:
        raise ConfigError(f"flux: expected a model key or {{'model': ...}}, got {spec!r}")
    key = spec["model"]
    if key == "quadratic":
        unknown = set(spec) - {"model", "rho_max", "v_free"}
        if unknown:
            raise ConfigError(f"flux: unknown keys {sorted(unknown)}")
        return quadratic(spec.get("rho_max", 1.0), spec.get("v_free", 1.0))
    if key == "bottleneck-narrow":
        return NARROW
    raise ConfigError(f"flux.model: unknown flux model {key!r}")


def model_to_key(model: FluxModel):
    if model.name == "bottleneck-narrow":
        return "bottleneck-narrow"
    if model.quadratic is None:
        raise ConfigError("only quadratic flux models can be serialized")
    v, rm = model.quadratic
    return {"model": "quadratic", "rho_max": rm, "v_free": v}


def tau(model: FluxModel, rho: float) -> float:
    """Companion density on the other side of sigma carrying the same flux."""
    model.check(rho)
    if model.quadratic is not None:
        return model.rho_max - rho
    if rho == model.sigma:
        return rho
    branch = "congested" if rho < model.sigma else "free"
    return model.inverse(float(model.f(rho)), branch)


def demand(model: FluxModel, rho: float) -> float:
    model.check(rho)
    if rho <= model.sigma:
        return float(model.f(rho))
    return model.f_sigma


def supply(model: FluxModel, rho: float) -> float:
    model.check(rho)
    if rho <= model.sigma:
        return model.f_sigma
    return float(model.f(rho))


def lax_friedrichs(model: FluxModel, rho_left: float, rho_right: float) -> float:
    model.check(rho_left)
    model.check(rho_right)
    return 0.5 * (float(model.f(rho_left)) + float(model.f(rho_right))) \
        + 0.5 * model.lf_alpha * (rho_left - rho_right)


def godunov(model: FluxModel, rho_left: float, rho_right: float) -> float:
    model.check(rho_left)
    model.check(rho_right)
    fl = float(model.f(rho_left))
    fr = float(model.f(rho_right))
    if rho_left <= rho_right:
        return min(fl, fr)
    if rho_right <= model.sigma <= rho_left:
        return model.f_sigma
    return max(fl, fr)


def lax_friedrichs_array(model: FluxModel, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Unchecked vectorized Lax-Friedrichs flux; accepts out-of-range traces."""
    return 0.5 * (model.f(left) + model.f(right)) + 0.5 * model.lf_alpha * (left - right)


def godunov_array(model: FluxModel, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    fl = model.f(left)
    fr = model.f(right)
    rising = np.minimum(fl, fr)
    falling = np.where((right <= model.sigma) & (model.sigma <= left), model.f_sigma, np.maximum(fl, fr))
    return np.where(left <= right, rising, falling)
