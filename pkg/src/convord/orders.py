"""Exact checks of the convex, increasing convex and usual stochastic orders.

For finitely supported laws the stop-loss transforms and CDFs are piecewise
linear (resp. piecewise constant) with breakpoints only at support points,
so comparing them on the union of both supports is exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .distributions import (
    DiscreteDistribution,
    as_rational,
    cdf,
    mean,
    mix,
    stop_loss_many,
)
from .errors import InternalOrderViolation, NonIntegerSupport, NotIcxOrdered, OutOfInterval

__all__ = [
    "BarycentricWeights",
    "OrderVerdict",
    "Witness",
    "barycentric_weights",
    "check_cx",
    "check_icx",
    "check_order",
    "check_st",
    "icx_decompose",
]

MEAN_MISMATCH = "mean-mismatch"
STOP_LOSS = "stop-loss"
CDF = "cdf"


@dataclass(frozen=True)
class BarycentricWeights:
    alpha: Fraction
    beta: Fraction


def barycentric_weights(x, y, z) -> BarycentricWeights:
    """Weights (alpha, beta) with alpha*x + beta*y = z.

    For the degenerate interval x = y the convention is alpha = 1, beta = 0.

    Raises:
        OutOfInterval: z lies outside [x, y].
    """
    x, y, z = as_rational(x), as_rational(y), as_rational(z)
    if not x <= z <= y:
        raise OutOfInterval(f"{z} is not in [{x}, {y}]")
    if x == y:
        return BarycentricWeights(Fraction(1), Fraction(0))
    alpha = (y - z) / (y - x)
    return BarycentricWeights(alpha, 1 - alpha)


@dataclass(frozen=True)
class Witness:
    point: Optional[Fraction]
    lhs_value: Fraction
    rhs_value: Fraction
    kind: str

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "point": None if self.point is None else str(self.point),
            "lhs_value": str(self.lhs_value),
            "rhs_value": str(self.rhs_value),
        }


@dataclass(frozen=True)
class OrderVerdict:
    """Outcome of an order check; ``witness`` is set exactly when it fails."""

    holds: bool
    witness: Optional[Witness] = None

    def __post_init__(self) -> None:
        if self.holds == (self.witness is not None):
            raise ValueError("a verdict holds iff it has no witness")

    def __bool__(self) -> bool:
        return self.holds

    def to_json(self) -> dict:
        out: dict = {"holds": self.holds}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def _checkpoints(mu: DiscreteDistribution, nu: DiscreteDistribution) -> list[Fraction]:
    return sorted(set(mu.points) | set(nu.points))


def _stop_loss_verdict(mu, nu, ts) -> OrderVerdict:
    for t, lhs, rhs in zip(ts, stop_loss_many(mu, ts), stop_loss_many(nu, ts)):
        if lhs > rhs:
            return OrderVerdict(False, Witness(t, lhs, rhs, STOP_LOSS))
    return OrderVerdict(True)


def check_cx(mu: DiscreteDistribution, nu: DiscreteDistribution) -> OrderVerdict:
    """Exact test of mu ≺_cx nu."""
    m_mu, m_nu = mean(mu), mean(nu)
    if m_mu != m_nu:
        return OrderVerdict(False, Witness(None, m_mu, m_nu, MEAN_MISMATCH))
    return _stop_loss_verdict(mu, nu, _checkpoints(mu, nu))


def check_icx(mu: DiscreteDistribution, nu: DiscreteDistribution) -> OrderVerdict:
    """Exact test of mu ≺_icx nu."""
    m_mu, m_nu = mean(mu), mean(nu)
    if m_mu > m_nu:
        return OrderVerdict(False, Witness(None, m_mu, m_nu, MEAN_MISMATCH))
    return _stop_loss_verdict(mu, nu, _checkpoints(mu, nu))


def check_st(mu: DiscreteDistribution, nu: DiscreteDistribution) -> OrderVerdict:
    """Exact test of mu ≺_st nu (the CDF of mu dominates that of nu)."""
    for x in _checkpoints(mu, nu):
        lhs, rhs = cdf(mu, x), cdf(nu, x)
        if lhs < rhs:
            return OrderVerdict(False, Witness(x, lhs, rhs, CDF))
    return OrderVerdict(True)


ORDER_CHECKS = {"cx": check_cx, "icx": check_icx, "st": check_st}


def check_order(order: str, mu: DiscreteDistribution, nu: DiscreteDistribution) -> OrderVerdict:
    try:
        check = ORDER_CHECKS[order]
    except KeyError:
        raise ValueError(f"unknown order {order!r}; expected one of {sorted(ORDER_CHECKS)}") from None
    return check(mu, nu)


def _expected_max(mu: DiscreteDistribution, t: int) -> Fraction:
    return sum((max(x, t) * w for x, w in mu.atoms), Fraction(0))


def icx_decompose(mu: DiscreteDistribution, nu: DiscreteDistribution) -> DiscreteDistribution:
    """Integer-supported law rho with mu ≺_st rho ≺_cx nu.

    rho mixes the laws of max(M, k) and max(M, k + 1), where k is the
    integer threshold whose expected maxima bracket mean(nu); the mixing
    weight makes mean(rho) = mean(nu) exactly.  Both order relations are
    re-checked before returning.

    Raises:
        NonIntegerSupport: mu or nu charges a non-integer point.
        NotIcxOrdered: mu ≺_icx nu does not hold.
        InternalOrderViolation: the constructed rho fails a post-check.
    """
    if not (mu.is_integer_supported() and nu.is_integer_supported()):
        raise NonIntegerSupport("icx_decompose needs integer-supported laws")
    verdict = check_icx(mu, nu)
    if not verdict.holds:
        raise NotIcxOrdered(f"mu is not icx-below nu: {verdict.witness}")
    target = mean(nu)
    if mean(mu) == target:
        rho = mu
    else:
        k = int(mu.points[0])
        while _expected_max(mu, k + 1) <= target:
            k += 1
        lo, hi = _expected_max(mu, k), _expected_max(mu, k + 1)
        theta = (hi - target) / (hi - lo)
        rho = mix(
            [
                (theta, mu.map(lambda x: max(x, k))),
                (1 - theta, mu.map(lambda x: max(x, k + 1))),
            ]
        )
    if not check_st(mu, rho).holds or not check_cx(rho, nu).holds:
        raise InternalOrderViolation(f"threshold split failed its order post-check: {rho}")
    return rho
