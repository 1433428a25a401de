"""Exact finitely supported probability laws over the rationals.

Every quantity is a :class:`fractions.Fraction`; nothing in this module
touches floating point.  Distributions are immutable and hashable.
"""

from __future__ import annotations

import bisect
import json
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Any, Union

from .errors import EmptySupport, InputError, NonIntegerCount, NonUnitMass

__all__ = [
    "DiscreteDistribution",
    "SubProbability",
    "as_rational",
    "cdf",
    "compound_exact",
    "convolution_power",
    "convolve",
    "dirac",
    "distribution_from_json",
    "distribution_to_json",
    "load_distribution",
    "make_distribution",
    "mean",
    "mix",
    "stop_loss",
    "stop_loss_many",
]

RationalLike = Union[Fraction, int, str]


def as_rational(value: Any) -> Fraction:
    """Convert ``value`` to an exact :class:`Fraction`.

    Strings may be integers, ``p/q`` or decimals (``"0.25"`` is 1/4).
    Floats go through their shortest repr, so ``0.1`` becomes 1/10
    rather than the binary approximation.
    """
    if isinstance(value, bool):
        raise InputError(f"not a number: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse {value!r} as a rational") from exc
    raise InputError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability law with finitely many atoms.

    Points are strictly increasing, weights positive and summing to
    exactly one.  Build instances through :func:`make_distribution`, which
    merges and sorts raw atoms.
    """

    points: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.points) != len(self.weights):
            raise InputError("points and weights differ in length")
        if not self.points:
            raise EmptySupport("distribution has no atoms")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise InputError("points must be strictly increasing")
        if any(w <= 0 for w in self.weights):
            raise InputError("weights must be positive")
        if sum(self.weights) != 1:
            raise NonUnitMass(f"weights sum to {sum(self.weights)}, not 1")

    @property
    def atoms(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(zip(self.points, self.weights))

    @property
    def support(self) -> tuple[Fraction, ...]:
        return self.points

    def __len__(self) -> int:
        return len(self.points)

    def prob(self, x: RationalLike) -> Fraction:
        x = as_rational(x)
        i = bisect.bisect_left(self.points, x)
        if i < len(self.points) and self.points[i] == x:
            return self.weights[i]
        return Fraction(0)

    def map(self, f) -> DiscreteDistribution:
        """Law of ``f(X)``."""
        return make_distribution((f(x), w) for x, w in self.atoms)

    def is_integer_supported(self) -> bool:
        return all(x.denominator == 1 for x in self.points)

    def __str__(self) -> str:
        body = " + ".join(f"{w}*δ[{x}]" for x, w in self.atoms)
        return f"DiscreteDistribution({body})"


@dataclass(frozen=True)
class SubProbability:
    """Nonnegative measure with finitely many atoms and mass at most one.

    Holds the partially consumed marginals of the diatomic decomposition.
    Zero-mass atoms are dropped on construction.
    """

    points: tuple[Fraction, ...]
    weights: tuple[Fraction, ...]

    @classmethod
    def from_distribution(cls, d: DiscreteDistribution) -> SubProbability:
        return cls(d.points, d.weights)

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise InputError("points must be strictly increasing")
        if any(w <= 0 for w in self.weights):
            raise InputError("weights must be positive")
        if self.total_mass > 1:
            raise InputError("total mass exceeds one")

    @property
    def total_mass(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    @property
    def atoms(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(zip(self.points, self.weights))

    def mass(self, x: Fraction) -> Fraction:
        i = bisect.bisect_left(self.points, x)
        if i < len(self.points) and self.points[i] == x:
            return self.weights[i]
        return Fraction(0)

    def subtract(self, removals: Mapping[Fraction, Fraction]) -> SubProbability:
        """Remove ``removals[x]`` mass at each point ``x``.

        Raises if any atom would go negative.
        """
        masses = dict(self.atoms)
        for x, w in removals.items():
            if w == 0:
                continue
            left = masses.get(x, Fraction(0)) - w
            if left < 0:
                raise InputError(f"removing {w} at {x} leaves negative mass")
            masses[x] = left
        kept = sorted((x, w) for x, w in masses.items() if w > 0)
        return SubProbability(tuple(x for x, _ in kept), tuple(w for _, w in kept))

    def normalized(self) -> DiscreteDistribution:
        total = self.total_mass
        if total == 0:
            raise EmptySupport("cannot normalize a zero measure")
        return DiscreteDistribution(self.points, tuple(w / total for w in self.weights))


def make_distribution(raw_atoms: Iterable[tuple[Any, Any]]) -> DiscreteDistribution:
    """Build a distribution from ``(point, weight)`` pairs.

    Duplicate points are merged and zero weights dropped.  The weights must
    already total exactly one; nothing is renormalized.

    Raises:
        InputError: a weight is negative.
        EmptySupport: no atom carries positive weight.
        NonUnitMass: the weights do not sum to exactly one.
    """
    merged: dict[Fraction, Fraction] = defaultdict(Fraction)
    for x, w in raw_atoms:
        x, w = as_rational(x), as_rational(w)
        if w < 0:
            raise InputError(f"negative weight {w} at {x}")
        merged[x] += w
    kept = sorted((x, w) for x, w in merged.items() if w > 0)
    if not kept:
        raise EmptySupport("no atom has positive weight")
    total = sum(w for _, w in kept)
    if total != 1:
        raise NonUnitMass(f"weights sum to {total}, not 1")
    return DiscreteDistribution(tuple(x for x, _ in kept), tuple(w for _, w in kept))


def dirac(x: RationalLike) -> DiscreteDistribution:
    return DiscreteDistribution((as_rational(x),), (Fraction(1),))


def mean(d: DiscreteDistribution) -> Fraction:
    return sum((x * w for x, w in d.atoms), Fraction(0))


def stop_loss(d: DiscreteDistribution, t: RationalLike) -> Fraction:
    """E(X - t)^+ computed exactly."""
    t = as_rational(t)
    return sum((w * (x - t) for x, w in d.atoms if x > t), Fraction(0))


def stop_loss_many(d: DiscreteDistribution, ts: Sequence[Fraction]) -> list[Fraction]:
    """Stop-loss transform at every ``t`` in ``ts`` in one sweep.

    Uses suffix sums of mass and first moment, so the cost is
    O((n + m) log m) instead of O(n m).  Results follow the order of ``ts``.
    """
    n = len(d.points)
    tail_mass = [Fraction(0)] * (n + 1)
    tail_moment = [Fraction(0)] * (n + 1)
    for i in range(n - 1, -1, -1):
        tail_mass[i] = tail_mass[i + 1] + d.weights[i]
        tail_moment[i] = tail_moment[i + 1] + d.weights[i] * d.points[i]
    out = []
    for t in ts:
        t = as_rational(t)
        i = bisect.bisect_right(d.points, t)
        out.append(tail_moment[i] - t * tail_mass[i])
    return out


def cdf(d: DiscreteDistribution, x: RationalLike) -> Fraction:
    x = as_rational(x)
    i = bisect.bisect_right(d.points, x)
    return sum(d.weights[:i], Fraction(0))


def convolve(d1: DiscreteDistribution, d2: DiscreteDistribution) -> DiscreteDistribution:
    """Law of X + Y for independent X ~ d1, Y ~ d2."""
    acc: dict[Fraction, Fraction] = defaultdict(Fraction)
    for x, w in d1.atoms:
        for y, v in d2.atoms:
            acc[x + y] += w * v
    return make_distribution(acc.items())


def convolution_power(d: DiscreteDistribution, n: int) -> DiscreteDistribution:
    """n-fold convolution of ``d`` with itself; ``n = 0`` gives δ_0."""
    if n < 0:
        raise InputError("convolution power must be nonnegative")
    out = dirac(0)
    for _ in range(n):
        out = convolve(out, d)
    return out


def mix(components: Iterable[tuple[Any, DiscreteDistribution]]) -> DiscreteDistribution:
    """Weighted mixture; mixture weights must be nonnegative and total one."""
    acc: dict[Fraction, Fraction] = defaultdict(Fraction)
    total = Fraction(0)
    for weight, d in components:
        weight = as_rational(weight)
        if weight < 0:
            raise InputError(f"negative mixture weight {weight}")
        total += weight
        for x, w in d.atoms:
            acc[x] += weight * w
    if total != 1:
        raise NonUnitMass(f"mixture weights sum to {total}, not 1")
    return make_distribution(acc.items())


def compound_exact(count: DiscreteDistribution, jump: DiscreteDistribution) -> DiscreteDistribution:
    """Exact law of X_1 + ... + X_N with N ~ ``count`` independent of the jumps.

    Raises:
        NonIntegerCount: ``count`` charges a negative or non-integer point.
    """
    for n in count.points:
        if n.denominator != 1 or n < 0:
            raise NonIntegerCount(f"count law charges {n}")
    acc: dict[Fraction, Fraction] = defaultdict(Fraction)
    power = dirac(0)
    done = 0
    for n, w in count.atoms:
        while done < n:
            power = convolve(power, jump)
            done += 1
        for x, v in power.atoms:
            acc[x] += w * v
    return make_distribution(acc.items())


def distribution_to_json(d: DiscreteDistribution) -> dict:
    return {"atoms": [{"x": str(x), "w": str(w)} for x, w in d.atoms]}


def distribution_from_json(doc: Any) -> DiscreteDistribution:
    """Parse ``{"atoms": [{"x": ..., "w": ...}, ...]}``."""
    if not isinstance(doc, dict) or not isinstance(doc.get("atoms"), list):
        raise InputError('distribution JSON must be an object with an "atoms" list')
    raw = []
    for item in doc["atoms"]:
        if not isinstance(item, dict) or "x" not in item or "w" not in item:
            raise InputError(f"malformed atom {item!r}")
        raw.append((as_rational(item["x"]), as_rational(item["w"])))
    return make_distribution(raw)


def load_distribution(path) -> DiscreteDistribution:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return distribution_from_json(doc)
