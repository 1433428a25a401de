"""Checks on simulated couplings plus the exact non-positive counterexample.

Statistical thresholds are fixed: |z| < 4 for martingale residuals and
p > 0.001 for goodness-of-fit, so that a CI run with dozens of tests has
well under 1% chance of a spurious failure.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from scipy import stats

from .coupling import (
    DiscreteJumps,
    DeterministicJumps,
    SampleSet,
    parse_jump_spec,
    reference_rng,
    sample_compound_direct,
)
from .distributions import (
    DiscreteDistribution,
    compound_exact,
    distribution_from_json,
    distribution_to_json,
    make_distribution,
    mean,
)
from .errors import EmptySample, InputError, TooFewSamples, ValueOutsideSupport
from .orders import OrderVerdict, check_cx

__all__ = [
    "CounterexampleReport",
    "TestReport",
    "TruncatedPMF",
    "counterexample_report",
    "marginal_test_continuous",
    "marginal_test_discrete",
    "martingale_residual",
    "mean_gap_test",
    "poisson_marginal_pmf",
    "sample_invariants_test",
    "verify_samples",
]

Z_THRESHOLD = 4.0
P_THRESHOLD = 1e-3
MIN_MARTINGALE_SAMPLES = 100
MIN_KS_SAMPLES = 1000
# cells expecting fewer observations are pooled before the chi-square test
MIN_EXPECTED = 5.0
SUPPORT_TOL = 1e-9


@dataclass
class TestReport:
    __test__ = False  # keep pytest from collecting this class

    name: str
    statistic: float
    reference: str
    threshold: float
    passed: bool
    n_samples: int
    notes: str = ""
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _columns(samples) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(samples, SampleSet):
        return samples.column("a"), samples.column("b")
    a, b = samples
    return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


def _test_functions(a: np.ndarray) -> dict[str, np.ndarray]:
    median = np.median(a)
    return {
        "1": np.ones_like(a),
        "x": a,
        "x^2": a * a,
        "1{x<=median}": (a <= median).astype(float),
    }


def martingale_residual(samples, test_functions: str = "default") -> TestReport:
    """CLT test of E[(B - A) g(A)] = 0 for a small family of functions g.

    For each g, z_g = sum (B_i - A_i) g(A_i) / (sd * sqrt(n)) with sd the
    sample standard deviation of (B - A) g(A).  Passes iff every |z_g| < 4.

    Args:
        samples: a :class:`SampleSet` or an ``(a, b)`` pair of arrays.
        test_functions: only ``"default"`` (1, x, x^2, indicator of
            x <= median of A) is defined.
    """
    if test_functions != "default":
        raise InputError(f"unknown test-function family {test_functions!r}")
    a, b = _columns(samples)
    n = len(a)
    if n < MIN_MARTINGALE_SAMPLES:
        raise TooFewSamples(f"martingale test needs at least {MIN_MARTINGALE_SAMPLES} samples, got {n}")
    diff = b - a
    zs = {}
    for name, g in _test_functions(a).items():
        r = diff * g
        total = r.sum()
        sd = r.std(ddof=1)
        if sd > 0:
            zs[name] = float(total / (sd * np.sqrt(n)))
        else:
            zs[name] = 0.0 if total == 0 else float(np.copysign(np.inf, total))
    worst = max(abs(z) for z in zs.values())
    return TestReport(
        name="martingale",
        statistic=worst,
        reference="max |z| over g in {1, x, x^2, 1{x<=median}}, each z ~ N(0,1) under E(B|A)=A",
        threshold=Z_THRESHOLD,
        passed=worst < Z_THRESHOLD,
        n_samples=n,
        details={"z": zs},
    )


def mean_gap_test(samples) -> TestReport:
    """|mean(A) - mean(B)| < 4 sd(B - A) / sqrt(n)."""
    a, b = _columns(samples)
    n = len(a)
    if n < 2:
        raise TooFewSamples("mean gap test needs at least 2 samples")
    gap = float(np.mean(b - a))
    se = float(np.std(b - a, ddof=1) / np.sqrt(n))
    stat = abs(gap) / se if se > 0 else (0.0 if gap == 0 else np.inf)
    return TestReport(
        name="mean-gap",
        statistic=stat,
        reference="|mean(B - A)| / standard error ~ |N(0,1)|",
        threshold=Z_THRESHOLD,
        passed=stat < Z_THRESHOLD,
        n_samples=n,
        details={"mean_a": float(np.mean(a)), "mean_b": float(np.mean(b)), "gap": gap},
    )


def sample_invariants_test(samples: SampleSet) -> TestReport:
    """Count samples violating S_{N_-} <= A <= S_{N_+} or B ∉ {S_{N_-}, S_{N_+}}.

    Exact runs are compared exactly; float runs too, since B is a copy of
    one endpoint and the partial sums are monotone.
    """
    lo, a, hi, b = samples.s_n_minus, samples.a, samples.s_n_plus, samples.b
    sandwich = int(np.count_nonzero((lo > a) | (a > hi)))
    endpoint = int(np.count_nonzero((b != lo) & (b != hi)))
    bad = sandwich + endpoint
    return TestReport(
        name="per-sample-invariants",
        statistic=float(bad),
        reference="number of samples violating the sandwich or endpoint property",
        threshold=0.0,
        passed=bad == 0,
        n_samples=len(samples),
        details={"sandwich_violations": sandwich, "endpoint_violations": endpoint},
    )


@dataclass(frozen=True)
class TruncatedPMF:
    """Probabilities of counts 0..K plus the omitted tail mass ``other``."""

    probs: np.ndarray
    other: float

    @property
    def max_count(self) -> int:
        return len(self.probs) - 1

    def __getitem__(self, k: int) -> float:
        return float(self.probs[k]) if 0 <= k < len(self.probs) else 0.0


def poisson_marginal_pmf(times: DiscreteDistribution, rate: float, truncation_tail: float = 1e-9) -> TruncatedPMF:
    """Law of N_T for a rate-``rate`` Poisson process at an independent time T.

    K is the smallest count such that the mixture tail beyond K is below
    ``truncation_tail``.
    """
    if not 0 < truncation_tail <= 1e-6:
        raise InputError("truncation_tail must lie in (0, 1e-6]")
    if not rate > 0:
        raise InputError("rate must be positive")
    if times.points[0] < 0:
        raise InputError("times must be nonnegative")
    lam = np.array([rate * float(t) for t in times.points])
    w = np.array([float(x) for x in times.weights])
    k = 0
    while float(w @ stats.poisson.sf(k, lam)) >= truncation_tail:
        k += 1
    ks = np.arange(k + 1)
    probs = stats.poisson.pmf(ks[:, None], lam[None, :]) @ w
    return TruncatedPMF(probs, float(w @ stats.poisson.sf(k, lam)))


def _pooled_chi_square(observed: np.ndarray, expected: np.ndarray) -> tuple[float, int, float, int]:
    small = expected < MIN_EXPECTED
    obs, exp = observed[~small], expected[~small]
    if small.any():
        pooled_obs, pooled_exp = observed[small].sum(), expected[small].sum()
        if pooled_exp < MIN_EXPECTED and len(exp):
            j = int(np.argmin(exp))
            obs, exp = obs.copy(), exp.copy()
            obs[j] += pooled_obs
            exp[j] += pooled_exp
        else:
            obs, exp = np.append(obs, pooled_obs), np.append(exp, pooled_exp)
    dof = len(exp) - 1
    if dof <= 0:
        return 0.0, 0, 1.0, len(exp)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    return stat, dof, float(stats.chi2.sf(stat, dof)), len(exp)


def marginal_test_discrete(
    values, exact_law: Union[DiscreteDistribution, TruncatedPMF], name: str = "marginal-chi2"
) -> TestReport:
    """Pearson chi-square of ``values`` against an exact discrete law.

    Cells whose expected count is below 5 are pooled; the degrees of
    freedom are the number of resulting cells minus one.  Passes iff the
    p-value exceeds 0.001.

    Raises:
        EmptySample: no values.
        ValueOutsideSupport: a value is not (within 1e-9) a support point.
    """
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n == 0:
        raise EmptySample("no values to test")
    if isinstance(exact_law, TruncatedPMF):
        counts = np.rint(values)
        if np.any(np.abs(values - counts) > SUPPORT_TOL) or np.any(counts < 0):
            raise ValueOutsideSupport("Poisson marginal values must be nonnegative integers")
        counts = counts.astype(np.int64)
        k = exact_law.max_count
        observed = np.append(np.bincount(np.minimum(counts, k + 1), minlength=k + 2)[: k + 1], np.sum(counts > k))
        probs = np.append(exact_law.probs, exact_law.other)
        support_size = k + 2
    else:
        points = np.array([float(x) for x in exact_law.points])
        probs = np.array([float(w) for w in exact_law.weights])
        idx = np.clip(np.searchsorted(points, values), 1, max(len(points) - 1, 1))
        if len(points) == 1:
            nearest = np.zeros(n, dtype=np.int64)
        else:
            left, right = points[idx - 1], points[idx]
            nearest = np.where(np.abs(values - left) <= np.abs(values - right), idx - 1, idx)
        off = np.abs(values - points[nearest]) > SUPPORT_TOL * np.maximum(1.0, np.abs(values))
        if off.any():
            raise ValueOutsideSupport(f"value {values[off][0]!r} is not in the support of the exact law")
        observed = np.bincount(nearest, minlength=len(points))
        support_size = len(points)
    stat, dof, p, cells = _pooled_chi_square(observed.astype(float), probs * n)
    return TestReport(
        name=name,
        statistic=stat,
        reference=f"chi-square with {dof} dof ({cells} cells after pooling {support_size})",
        threshold=P_THRESHOLD,
        passed=p > P_THRESHOLD,
        n_samples=n,
        details={"p_value": p, "dof": dof},
    )


def marginal_test_continuous(values_a, values_b, name: str = "marginal-ks") -> TestReport:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.

    Raises:
        EmptySample: either sample is empty.
        TooFewSamples: either sample has fewer than 1000 values.
    """
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise EmptySample("both samples must be nonempty")
    if min(len(a), len(b)) < MIN_KS_SAMPLES:
        raise TooFewSamples(f"asymptotic KS needs at least {MIN_KS_SAMPLES} values per sample")
    res = stats.ks_2samp(a, b, method="asymp")
    return TestReport(
        name=name,
        statistic=float(res.statistic),
        reference="two-sample Kolmogorov-Smirnov, asymptotic",
        threshold=P_THRESHOLD,
        passed=float(res.pvalue) > P_THRESHOLD,
        n_samples=len(a),
        details={"p_value": float(res.pvalue), "n_reference": len(b)},
    )


@dataclass(frozen=True)
class CounterexampleReport:
    law_x_m: DiscreteDistribution
    law_x_n: DiscreteDistribution
    e_abs_x_m: Fraction
    e_abs_x_n: Fraction
    count_verdict: OrderVerdict
    verdict: OrderVerdict
    note: str

    def to_json(self) -> dict:
        return {
            "law_M": {"atoms": [{"x": "1", "w": "1"}]},
            "law_N": {"atoms": [{"x": "0", "w": "1/2"}, {"x": "2", "w": "1/2"}]},
            "law_X": {"atoms": [{"x": "-1", "w": "1/2"}, {"x": "1", "w": "1/2"}]},
            "M_cx_N": self.count_verdict.to_json(),
            "law_X_M": distribution_to_json(self.law_x_m),
            "law_X_N": distribution_to_json(self.law_x_n),
            "E_abs_X_M": str(self.e_abs_x_m),
            "E_abs_X_N": str(self.e_abs_x_n),
            "X_M_cx_X_N": self.verdict.to_json(),
            "note": self.note,
        }


def counterexample_report() -> CounterexampleReport:
    """Exact failure of compound convex ordering with signed jumps.

    M = 1 and N = 0 or 2 with probability 1/2 each, so M ≺_cx N, yet with
    jumps ±1 the compound sums are not convex ordered: E|X_M| = 1 exceeds
    E|X_N| = 1/2.
    """
    count_m = make_distribution([(1, 1)])
    count_n = make_distribution([(0, Fraction(1, 2)), (2, Fraction(1, 2))])
    jump = make_distribution([(-1, Fraction(1, 2)), (1, Fraction(1, 2))])
    law_m = compound_exact(count_m, jump)
    law_n = compound_exact(count_n, jump)
    return CounterexampleReport(
        law_x_m=law_m,
        law_x_n=law_n,
        e_abs_x_m=mean(law_m.map(abs)),
        e_abs_x_n=mean(law_n.map(abs)),
        count_verdict=check_cx(count_m, count_n),
        verdict=check_cx(law_m, law_n),
        note="E|X_N| = 1/2 < E|X_M| = 1, so X_M cannot be convex-below X_N (|x| is convex)",
    )


def verify_samples(samples: SampleSet, reference_n: int = 100_000, seed: Optional[int] = None) -> list[TestReport]:
    """Run every check appropriate to the run recorded in ``samples.config``.

    Exact marginals are used when the jumps are discrete or the mode is
    Poisson; exponential jumps are compared against direct Monte-Carlo
    draws of S_M and S_N with ``reference_n`` values each.
    """
    cfg = samples.config
    try:
        mu = distribution_from_json(cfg["mu"])
        nu = distribution_from_json(cfg["nu"])
    except KeyError as exc:
        raise InputError(f"config lacks {exc}") from exc
    seed = int(cfg.get("seed", 0)) if seed is None else seed
    reports = [sample_invariants_test(samples)]
    if len(samples) >= MIN_MARTINGALE_SAMPLES:
        reports.append(martingale_residual(samples))
    if len(samples) >= 2:
        reports.append(mean_gap_test(samples))
    if len(samples) == 0:
        return reports
    a, b = samples.column("a"), samples.column("b")

    if samples.mode == "poisson":
        rate = float(cfg["rate"])
        reports.append(marginal_test_discrete(a, poisson_marginal_pmf(mu, rate), "marginal-A"))
        reports.append(marginal_test_discrete(b, poisson_marginal_pmf(nu, rate), "marginal-B"))
        return reports

    jumps = parse_jump_spec(cfg["jumps"])
    if isinstance(jumps, (DiscreteJumps, DeterministicJumps)):
        law = jumps.law if isinstance(jumps, DiscreteJumps) else make_distribution([(jumps.value, 1)])
        reports.append(marginal_test_discrete(a, compound_exact(mu, law), "marginal-A"))
        reports.append(marginal_test_discrete(b, compound_exact(nu, law), "marginal-B"))
    else:
        ref_a = sample_compound_direct(mu, jumps, reference_n, reference_rng(seed, 0))
        ref_b = sample_compound_direct(nu, jumps, reference_n, reference_rng(seed, 1))
        reports.append(marginal_test_continuous(a, ref_a, "marginal-A"))
        reports.append(marginal_test_continuous(b, ref_b, "marginal-B"))
    return reports
