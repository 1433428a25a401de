"""Diatomic decomposition of a convex-ordered pair of discrete laws.

Given mu ≺_cx nu, :func:`diatomic_decompose` returns weighted triples
(v_minus, u, v_plus) with v_minus <= u <= v_plus such that the u-marginal
is mu and splitting each u onto its endpoints with barycentric weights
recovers nu.  The weights give the joint law of (V_-, U, V_+).
"""

from __future__ import annotations

import enum
import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from .distributions import (
    DiscreteDistribution,
    SubProbability,
    as_rational,
    make_distribution,
)
from .errors import InputError, InternalOrderViolation, NotCxOrdered
from .orders import barycentric_weights, check_cx

__all__ = [
    "CheckResult",
    "DiatomicAtom",
    "DiatomicDecomposition",
    "SelectionRule",
    "ValidationReport",
    "decomposition_from_json",
    "decomposition_to_json",
    "diatomic_decompose",
    "load_decomposition",
    "sample_atom",
    "validate_decomposition",
]


class SelectionRule(enum.Enum):
    LEFT_CURTAIN = "left-curtain"
    FIRST_ADMISSIBLE = "first-admissible"


@dataclass(frozen=True)
class DiatomicAtom:
    v_minus: Fraction
    u: Fraction
    v_plus: Fraction
    weight: Fraction

    def __post_init__(self) -> None:
        if not self.v_minus <= self.u <= self.v_plus:
            raise InputError(f"atom violates v_minus <= u <= v_plus: {self}")
        if self.weight <= 0:
            raise InputError(f"atom weight must be positive: {self}")

    @property
    def triple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.v_minus, self.u, self.v_plus)


@dataclass(frozen=True)
class DiatomicDecomposition:
    atoms: tuple[DiatomicAtom, ...]
    selection_rule: SelectionRule = SelectionRule.LEFT_CURTAIN
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        weights = np.array([float(a.weight) for a in self.atoms])
        object.__setattr__(self, "_cum", np.cumsum(weights)[:-1] if len(weights) else weights)

    def __len__(self) -> int:
        return len(self.atoms)

    def u_marginal(self) -> DiscreteDistribution:
        """Law of U, i.e. mu when the decomposition is valid."""
        return make_distribution((a.u, a.weight) for a in self.atoms)

    def v_marginal(self) -> DiscreteDistribution:
        """Law of the split variable V, i.e. nu when the decomposition is valid."""
        acc: dict[Fraction, Fraction] = defaultdict(Fraction)
        for a in self.atoms:
            bw = barycentric_weights(a.v_minus, a.v_plus, a.u)
            acc[a.v_minus] += a.weight * bw.alpha
            acc[a.v_plus] += a.weight * bw.beta
        return make_distribution(acc.items())

    def digest(self) -> str:
        """Short content hash used to identify the decomposition in outputs."""
        blob = json.dumps(decomposition_to_json(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def _left_curtain_triple(mu_s: SubProbability, nu_s: SubProbability):
    u = mu_s.points[0]
    if nu_s.mass(u) > 0:
        return u, u, u
    below = [v for v in nu_s.points if v < u]
    above = [v for v in nu_s.points if v > u]
    if not below or not above:
        return None
    return below[-1], u, above[0]


def _first_admissible_triple(mu_s: SubProbability, nu_s: SubProbability):
    pts = nu_s.points
    for u in mu_s.points:
        for lo, hi in zip(pts, pts[1:]):
            if lo <= u <= hi:
                return lo, u, hi
        if nu_s.mass(u) > 0:
            return u, u, u
    return None


_PICKERS = {
    SelectionRule.LEFT_CURTAIN: _left_curtain_triple,
    SelectionRule.FIRST_ADMISSIBLE: _first_admissible_triple,
}


def diatomic_decompose(
    mu: DiscreteDistribution,
    nu: DiscreteDistribution,
    rule: SelectionRule | str = SelectionRule.LEFT_CURTAIN,
    *,
    debug: bool = False,
) -> DiatomicDecomposition:
    """Decompose mu ≺_cx nu into weighted diatomic triples.

    Each step picks an admissible triple (v_minus, u, v_plus): all three
    points still carry mass, v_minus <= u <= v_plus and the remaining nu
    has no mass strictly between v_minus and v_plus.  The largest mass s
    that fits is then removed, which zeroes at least one of the three
    atoms.

    With ``LEFT_CURTAIN`` the triple is built on the leftmost remaining
    atom u of mu: (u, u, u) if nu still charges u, otherwise the nearest
    remaining nu atoms on either side.  ``FIRST_ADMISSIBLE`` scans u
    upwards and takes the first bracketing pair of consecutive nu atoms.

    Args:
        mu: law of the inner variable.
        nu: law of the outer variable.
        rule: triple selection rule.
        debug: re-check mu_* ≺_cx nu_* after every step (quadratic cost).

    Raises:
        NotCxOrdered: mu ≺_cx nu does not hold.
        InternalOrderViolation: no admissible triple was found mid-run, or
            the debug-mode invariant broke.
    """
    rule = SelectionRule(rule)
    verdict = check_cx(mu, nu)
    if not verdict.holds:
        raise NotCxOrdered(f"mu is not cx-below nu: {verdict.witness}")

    pick = _PICKERS[rule]
    mu_s = SubProbability.from_distribution(mu)
    nu_s = SubProbability.from_distribution(nu)
    theta = Fraction(1)
    atoms: list[DiatomicAtom] = []
    max_steps = len(mu) + len(nu)
    while theta > 0:
        if len(atoms) >= max_steps:
            raise InternalOrderViolation("step bound p + q exceeded")
        triple = pick(mu_s, nu_s)
        if triple is None:
            raise InternalOrderViolation(f"no admissible triple; mu_*={mu_s}, nu_*={nu_s}")
        v_minus, u, v_plus = triple
        bw = barycentric_weights(v_minus, v_plus, u)
        # a zero barycentric weight makes that endpoint's bound vacuous
        bounds = [mu_s.mass(u)]
        if bw.alpha > 0:
            bounds.append(nu_s.mass(v_minus) / bw.alpha)
        if bw.beta > 0:
            bounds.append(nu_s.mass(v_plus) / bw.beta)
        s = min(bounds)
        if s <= 0:
            raise InternalOrderViolation(f"selected triple {triple} carries no mass")

        mu_s = mu_s.subtract({u: s})
        removal: dict[Fraction, Fraction] = defaultdict(Fraction)
        removal[v_minus] += s * bw.alpha
        removal[v_plus] += s * bw.beta
        nu_s = nu_s.subtract(removal)
        theta -= s
        atoms.append(DiatomicAtom(v_minus, u, v_plus, s))

        if mu_s.total_mass != theta or nu_s.total_mass != theta:
            raise InternalOrderViolation("remaining masses diverged from theta")
        if debug and theta > 0:
            inner = check_cx(mu_s.normalized(), nu_s.normalized())
            if not inner.holds:
                raise InternalOrderViolation(f"mu_* not cx-below nu_* after step {len(atoms)}: {inner.witness}")
    return DiatomicDecomposition(tuple(atoms), rule)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    atom_index: Optional[int] = None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, "atom_index": c.atom_index}
                for c in self.checks
            ],
        }


def validate_decomposition(
    dec: DiatomicDecomposition, mu: DiscreteDistribution, nu: DiscreteDistribution
) -> ValidationReport:
    """Exact check that ``dec`` is a diatomic representation of mu ≺_cx nu.

    Never raises on a bad decomposition; every problem is reported.
    """
    checks = []

    total = sum((a.weight for a in dec.atoms), Fraction(0))
    checks.append(CheckResult("weight-sum", total == 1, f"total weight {total}"))

    bad = next(
        (i for i, a in enumerate(dec.atoms) if not a.v_minus <= a.u <= a.v_plus or a.weight <= 0),
        None,
    )
    checks.append(
        CheckResult(
            "sandwich",
            bad is None,
            "" if bad is None else f"atom {dec.atoms[bad].triple} is not ordered",
            bad,
        )
    )

    u_mass: dict[Fraction, Fraction] = defaultdict(Fraction)
    v_mass: dict[Fraction, Fraction] = defaultdict(Fraction)
    for a in dec.atoms:
        u_mass[a.u] += a.weight
        if a.v_minus <= a.u <= a.v_plus:
            bw = barycentric_weights(a.v_minus, a.v_plus, a.u)
            v_mass[a.v_minus] += a.weight * bw.alpha
            v_mass[a.v_plus] += a.weight * bw.beta

    checks.append(_compare_measures("u-marginal", u_mass, mu))
    checks.append(_compare_measures("v-mixture", v_mass, nu))
    return ValidationReport(tuple(checks))


def _compare_measures(name: str, got: dict[Fraction, Fraction], want: DiscreteDistribution) -> CheckResult:
    expected = dict(want.atoms)
    for x in sorted(set(got) | set(expected)):
        g, w = got.get(x, Fraction(0)), expected.get(x, Fraction(0))
        if g != w:
            return CheckResult(name, False, f"mass at {x} is {g}, expected {w}")
    return CheckResult(name, True)


def sample_atom(dec: DiatomicDecomposition, rng: np.random.Generator) -> DiatomicAtom:
    """Draw one atom with probability proportional to its weight."""
    return dec.atoms[int(sample_atom_indices(dec, rng, 1)[0])]


def sample_atom_indices(dec: DiatomicDecomposition, rng: np.random.Generator, size: int) -> np.ndarray:
    u = rng.random(size)
    return np.searchsorted(dec._cum, u, side="right")


def decomposition_to_json(dec: DiatomicDecomposition) -> dict:
    return {
        "rule": dec.selection_rule.value,
        "atoms": [
            {"v_minus": str(a.v_minus), "u": str(a.u), "v_plus": str(a.v_plus), "weight": str(a.weight)}
            for a in dec.atoms
        ],
    }


def decomposition_from_json(doc: Any) -> DiatomicDecomposition:
    if not isinstance(doc, dict) or not isinstance(doc.get("atoms"), list):
        raise InputError('decomposition JSON must be an object with an "atoms" list')
    try:
        rule = SelectionRule(doc.get("rule", SelectionRule.LEFT_CURTAIN.value))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    atoms = []
    for item in doc["atoms"]:
        try:
            atoms.append(
                DiatomicAtom(
                    as_rational(item["v_minus"]),
                    as_rational(item["u"]),
                    as_rational(item["v_plus"]),
                    as_rational(item["weight"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed decomposition atom {item!r}") from exc
    if sum((a.weight for a in atoms), Fraction(0)) != 1:
        raise InputError("decomposition weights do not sum to 1")
    return DiatomicDecomposition(tuple(atoms), rule)


def load_decomposition(path) -> DiatomicDecomposition:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return decomposition_from_json(doc)
