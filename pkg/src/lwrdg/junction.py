"""Closed-form Riemann solvers at junctions.

The solvers work on fluxes: each incoming road contributes its demand
(largest flux it can send) and each outgoing road its supply (largest flux
it can absorb). Distribution fractions route traffic from incoming to
outgoing roads, the total through-flux is maximized, and a right-of-way
parameter splits a saturated outgoing road between two incoming ones.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ConfigError, DomainError
from .fundamental_diagram import FluxModel, demand, supply

__all__ = [
    "JunctionKind",
    "JunctionSpec",
    "JunctionFluxes",
    "solve_one_one",
    "solve_one_two",
    "solve_two_one",
    "solve_two_two",
    "solve",
    "reconstruct_trace_density",
]


class JunctionKind(enum.Enum):
    ONE_ONE = "1x1"
    ONE_TWO = "1x2"
    TWO_ONE = "2x1"
    TWO_TWO = "2x2"

    @classmethod
    def from_counts(cls, n_in: int, n_out: int) -> "JunctionKind":
        try:
            return {(1, 1): cls.ONE_ONE, (1, 2): cls.ONE_TWO,
                    (2, 1): cls.TWO_ONE, (2, 2): cls.TWO_TWO}[(n_in, n_out)]
        except KeyError:
            raise ConfigError(
                f"junction with {n_in} incoming and {n_out} outgoing roads is not supported"
            ) from None


@dataclass(frozen=True)
class JunctionSpec:
    incoming: tuple
    outgoing: tuple
    alpha: Optional[float] = None
    beta: Optional[float] = None
    q: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "incoming", tuple(self.incoming))
        object.__setattr__(self, "outgoing", tuple(self.outgoing))
        kind = self.kind
        label = self.name or f"{list(self.incoming)}->{list(self.outgoing)}"
        if kind in (JunctionKind.ONE_TWO, JunctionKind.TWO_TWO):
            _check_fraction(self.alpha, f"junction {label}: alpha")
        if kind is JunctionKind.TWO_TWO:
            _check_fraction(self.beta, f"junction {label}: beta")
            if self.alpha == self.beta:
                raise ConfigError(f"junction {label}: alpha must differ from beta "
                                  "(the flux maximization has no unique solution)")
        if kind is JunctionKind.TWO_ONE:
            _check_fraction(self.q, f"junction {label}: q")

    @property
    def kind(self) -> JunctionKind:
        return JunctionKind.from_counts(len(self.incoming), len(self.outgoing))


def _check_fraction(value, what):
    if value is None:
        raise ConfigError(f"{what} is required")
    if not (0.0 < value < 1.0):
        raise ConfigError(f"{what} must lie in (0, 1), got {value!r}")


@dataclass(frozen=True)
class JunctionFluxes:
    gamma_in: tuple
    gamma_out: tuple


def _nonneg(*values):
    for v in values:
        if v < 0.0:
            raise DomainError(f"demand/supply must be nonnegative, got {v!r}")


def solve_one_one(d_a: float, s_b: float) -> JunctionFluxes:
    _nonneg(d_a, s_b)
    g = min(d_a, s_b)
    return JunctionFluxes((g,), (g,))


def solve_one_two(d_a: float, s_b: float, s_c: float, alpha: float) -> JunctionFluxes:
    _nonneg(d_a, s_b, s_c)
    _check_fraction(alpha, "alpha")
    g_a = min(d_a, s_b / alpha, s_c / (1.0 - alpha))
    g_b = alpha * g_a
    # complement keeps the split exactly conservative in floating point
    return JunctionFluxes((g_a,), (g_b, g_a - g_b))


def solve_two_one(d_a: float, d_b: float, s_c: float, q: float) -> JunctionFluxes:
    _nonneg(d_a, d_b, s_c)
    _check_fraction(q, "q")
    if d_a + d_b <= s_c:
        return JunctionFluxes((d_a, d_b), (d_a + d_b,))
    p_a = q * s_c
    p_b = s_c - p_a
    if p_a <= d_a and p_b <= d_b:
        g_a, g_b = p_a, p_b
    elif p_a > d_a:
        g_a, g_b = d_a, s_c - d_a
    else:
        g_a, g_b = s_c - d_b, d_b
    # d_a + d_b > s_c rules out both demands below their priority share
    assert g_a >= 0.0 and g_b >= 0.0
    return JunctionFluxes((g_a, g_b), (g_a + g_b,))


def _one_outgoing_constraint(d_a, d_b, a, b, s):
    """max g_a + g_b subject to a*g_a + b*g_b <= s and the demand box."""
    if a <= b:
        g_a = min(d_a, s / a)
        g_b = min(d_b, max(0.0, (s - a * g_a) / b))
    else:
        g_b = min(d_b, s / b)
        g_a = min(d_a, max(0.0, (s - b * g_b) / a))
    return g_a, g_b


def solve_two_two(d_a: float, d_b: float, s_c: float, s_d: float,
                  alpha: float, beta: float) -> JunctionFluxes:
    _nonneg(d_a, d_b, s_c, s_d)
    _check_fraction(alpha, "alpha")
    _check_fraction(beta, "beta")
    if alpha == beta:
        raise ConfigError("alpha must differ from beta")
    # P: both outgoing constraints active
    det = alpha * (1.0 - beta) - beta * (1.0 - alpha)
    g1 = (s_c * (1.0 - beta) - beta * s_d) / det
    g2 = (alpha * s_d - (1.0 - alpha) * s_c) / det
    if g1 < 0.0 or g2 < 0.0:
        # P outside the first quadrant: one outgoing road binds everywhere
        if s_c * (1.0 - alpha) <= s_d * alpha:
            g_a, g_b = _one_outgoing_constraint(d_a, d_b, alpha, beta, s_c)
        else:
            g_a, g_b = _one_outgoing_constraint(d_a, d_b, 1.0 - alpha, 1.0 - beta, s_d)
    elif g1 <= d_a and g2 <= d_b:
        g_a, g_b = g1, g2
    elif g1 > d_a and g2 > d_b:
        g_a, g_b = d_a, d_b
    elif g1 > d_a:
        g_a = d_a
        if alpha < beta:
            g_b = min((s_c - alpha * d_a) / beta, d_b)
        else:
            g_b = min((s_d - (1.0 - alpha) * d_a) / (1.0 - beta), d_b)
    else:
        g_b = d_b
        if alpha > beta:
            g_a = min((s_c - beta * d_b) / alpha, d_a)
        else:
            g_a = min((s_d - (1.0 - beta) * d_b) / (1.0 - alpha), d_a)
    g_c = alpha * g_a + beta * g_b
    g_d = (g_a + g_b) - g_c
    return JunctionFluxes((g_a, g_b), (g_c, g_d))


def solve(spec: JunctionSpec, demands: Sequence[float], supplies: Sequence[float]) -> JunctionFluxes:
    kind = spec.kind
    if kind is JunctionKind.ONE_ONE:
        return solve_one_one(demands[0], supplies[0])
    if kind is JunctionKind.ONE_TWO:
        return solve_one_two(demands[0], supplies[0], supplies[1], spec.alpha)
    if kind is JunctionKind.TWO_ONE:
        return solve_two_one(demands[0], demands[1], supplies[0], spec.q)
    return solve_two_two(demands[0], demands[1], supplies[0], supplies[1], spec.alpha, spec.beta)


def reconstruct_trace_density(model: FluxModel, rho0: float, gamma_hat: float, side: str) -> float:
    """Junction trace density generating only waves that leave the junction.

    ``side`` is ``"incoming"`` or ``"outgoing"`` relative to the junction.
    """
    if side == "incoming":
        cap = demand(model, rho0)
        keep_initial = rho0 <= model.sigma
        branch = "congested"
    elif side == "outgoing":
        cap = supply(model, rho0)
        keep_initial = rho0 >= model.sigma
        branch = "free"
    else:
        raise DomainError(f"side must be 'incoming' or 'outgoing', got {side!r}")
    if gamma_hat < 0.0 or gamma_hat > cap + 1e-14:
        raise DomainError(f"flux {gamma_hat!r} exceeds the {side} cap {cap!r}")
    if keep_initial and abs(gamma_hat - float(model.f(rho0))) <= 1e-13:
        return rho0
    return model.inverse(gamma_hat, branch)
