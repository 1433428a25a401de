import io
import math
from fractions import Fraction as F

import numpy as np
import pytest

from convord.coupling import (
    BLOCK_SIZE,
    CSV_COLUMNS,
    DeterministicJumps,
    DiscreteJumps,
    ExponentialJumps,
    SimulationConfig,
    parse_jump_spec,
    read_samples_csv,
    run_simulation,
    sample_compound_coupling,
    sample_compound_direct,
    sample_poisson_coupling,
)
from convord.diatomic import DiatomicAtom, DiatomicDecomposition, diatomic_decompose
from convord.distributions import dirac, make_distribution
from convord.errors import InputError, NegativeJumpSupport, NegativeTime, NonIntegerDecomposition, SchemaError
from convord.orders import barycentric_weights

from test_distributions import FIG1_MU, FIG1_NU, TWO_POINT

SIMPLE = diatomic_decompose(dirac(1), TWO_POINT)
FIG1 = diatomic_decompose(FIG1_MU, FIG1_NU)
HALF_JUMPS = DiscreteJumps(make_distribution([(0, F(1, 3)), (F(1, 2), F(1, 3)), (3, F(1, 3))]))


def single_atom(t_minus, u, t_plus):
    return DiatomicDecomposition((DiatomicAtom(F(t_minus), F(u), F(t_plus), F(1)),))


def within_binomial(hits, n, p):
    return abs(hits / n - p) < 4 * math.sqrt(p * (1 - p) / n)


def test_deterministic_jumps_scaffolding():
    rng = np.random.default_rng(0)
    draws = [sample_compound_coupling(SIMPLE, DeterministicJumps(1), rng) for _ in range(4000)]
    for s in draws:
        assert (s.s_n_minus, s.a, s.s_n_plus) == (0, 1, 2)
        assert s.b in (0, 2)
        assert isinstance(s.a, F)
    assert within_binomial(sum(s.b == 2 for s in draws), len(draws), 0.5)


def test_degenerate_atom_keeps_b_equal_a():
    rng = np.random.default_rng(1)
    dec = single_atom(2, 2, 2)
    for _ in range(200):
        s = sample_compound_coupling(dec, ExponentialJumps(1.0), rng)
        assert s.b == s.a and not s.b_took_upper


def test_zero_jumps_collapse_interval():
    rng = np.random.default_rng(2)
    s = sample_compound_coupling(single_atom(0, 1, 3), DeterministicJumps(0), rng)
    assert s.s_n_minus == s.a == s.s_n_plus == s.b == 0


def test_exact_conditional_mean_identity_single():
    rng = np.random.default_rng(3)
    for _ in range(500):
        s = sample_compound_coupling(FIG1, HALF_JUMPS, rng)
        bw = barycentric_weights(s.s_n_minus, s.s_n_plus, s.a)
        assert bw.alpha * s.s_n_minus + bw.beta * s.s_n_plus == s.a
        assert s.n_minus <= s.m <= s.n_plus


def test_exchangeable_jump_generator():
    block = np.array([0.0, 0.5, 2.0, 3.25, 7.0, 1.0])

    def permuted_block(rng, k):
        return rng.permutation(block)[:k]

    rng = np.random.default_rng(4)
    for _ in range(2000):
        s = sample_compound_coupling(FIG1, permuted_block, rng)
        assert s.s_n_minus <= s.a <= s.s_n_plus
        assert s.b in (s.s_n_minus, s.s_n_plus)
        if s.s_n_plus > s.s_n_minus:
            alpha = (s.s_n_plus - s.a) / (s.s_n_plus - s.s_n_minus)
            recon = alpha * s.s_n_minus + (1 - alpha) * s.s_n_plus
            assert abs(recon - s.a) <= 8 * np.spacing(max(abs(s.s_n_plus), abs(s.a)))


def test_single_sampler_rejects_bad_input():
    rng = np.random.default_rng(5)
    with pytest.raises(NegativeJumpSupport):
        sample_compound_coupling(SIMPLE, DiscreteJumps(make_distribution([(-1, F(1, 2)), (1, F(1, 2))])), rng)
    with pytest.raises(NonIntegerDecomposition):
        sample_compound_coupling(single_atom(0, F(1, 2), 1), DeterministicJumps(1), rng)
    with pytest.raises(NegativeJumpSupport):
        sample_compound_coupling(SIMPLE, lambda rng, k: -np.ones(k), rng)


def test_single_sampler_reproducible():
    a = [sample_compound_coupling(FIG1, ExponentialJumps(1.0), np.random.default_rng(9)) for _ in range(3)]
    assert a[0] == a[1] == a[2]


def test_figure_one_means():
    samples = run_simulation(SimulationConfig("compound", FIG1, 100_000, 17, jumps=ExponentialJumps(1.0)))
    a, b = samples.column("a"), samples.column("b")
    for col in (a, b):
        assert abs(col.mean() - 3.5) < 4 * col.std() / math.sqrt(len(col))


def test_poisson_single_atom_example():
    samples = run_simulation(SimulationConfig("poisson", SIMPLE, 100_000, 3, rate=1.0))
    a, b = samples.column("a"), samples.column("b")
    assert abs(a.mean() - 1) < 4 * a.std() / math.sqrt(len(a))
    assert abs(b.mean() - 1) < 4 * b.std() / math.sqrt(len(b))
    # P(B = 0) = 1/2 + e^{-2}/2 under the mixture of a zero count and Poisson(2)
    assert within_binomial(int(np.sum(b == 0)), len(b), 0.5 + math.exp(-2) / 2)


def test_poisson_degenerate_and_errors():
    rng = np.random.default_rng(6)
    for _ in range(100):
        s = sample_poisson_coupling(single_atom(F(3, 2), F(3, 2), F(3, 2)), 2.0, rng)
        assert s.b == s.a
    with pytest.raises(InputError):
        sample_poisson_coupling(SIMPLE, 0.0, rng)
    with pytest.raises(NegativeTime):
        sample_poisson_coupling(single_atom(-1, 0, 1), 1.0, rng)
    with pytest.raises(InputError):
        SimulationConfig("poisson", SIMPLE, 10, 0, rate=0.0)


@pytest.mark.parametrize(
    "mode, kwargs",
    [
        ("compound", {"jumps": ExponentialJumps(1.0)}),
        ("compound", {"jumps": HALF_JUMPS}),
        ("compound", {"jumps": DeterministicJumps(F(1, 3))}),
        ("poisson", {"rate": 1.5}),
    ],
)
def test_batch_per_sample_invariants(mode, kwargs):
    samples = run_simulation(SimulationConfig(mode, FIG1, 20_000, 8, **kwargs))
    lo, a, hi, b = samples.s_n_minus, samples.a, samples.s_n_plus, samples.b
    assert np.all(lo <= a) and np.all(a <= hi)
    assert np.all((b == lo) | (b == hi))
    assert np.all(np.where(samples.b_took_upper, b == hi, b == lo))
    if samples.exact:
        for s in list(samples)[:2000]:
            bw = barycentric_weights(s.s_n_minus, s.s_n_plus, s.a)
            assert bw.alpha * s.s_n_minus + bw.beta * s.s_n_plus == s.a
    else:
        span = hi - lo
        alpha = np.where(span > 0, (hi - a) / np.where(span > 0, span, 1), 1.0)
        recon = alpha * lo + (1 - alpha) * hi
        assert np.all(np.abs(recon - a) <= 8 * np.spacing(np.maximum(np.abs(hi), np.abs(a))))


def test_batch_counts_match_atoms():
    samples = run_simulation(SimulationConfig("compound", FIG1, 1000, 8, jumps=HALF_JUMPS))
    for s in samples:
        atom = FIG1.atoms[s.atom_index]
        assert (s.n_minus, s.m, s.n_plus) == atom.triple


def test_empty_run():
    samples = run_simulation(SimulationConfig("compound", FIG1, 0, 1, jumps=ExponentialJumps(1.0)))
    assert len(samples) == 0
    assert samples.to_csv().splitlines()[-1] == ",".join(CSV_COLUMNS)


def test_same_seed_same_bytes():
    def csv(seed):
        cfg = SimulationConfig("compound", FIG1, BLOCK_SIZE + 100, seed, jumps=ExponentialJumps(1.0))
        return run_simulation(cfg).to_csv()

    assert csv(42) == csv(42)
    assert csv(42) != csv(43)


def test_prefix_stability_across_n():
    # a full block depends only on (seed, block index), not on the total size
    short = run_simulation(SimulationConfig("compound", FIG1, BLOCK_SIZE, 5, jumps=ExponentialJumps(1.0)))
    long = run_simulation(SimulationConfig("compound", FIG1, 2 * BLOCK_SIZE + 7, 5, jumps=ExponentialJumps(1.0)))
    assert np.array_equal(short.a, long.a[:BLOCK_SIZE])
    assert np.array_equal(short.b, long.b[:BLOCK_SIZE])


@pytest.mark.parametrize(
    "mode, kwargs",
    [("compound", {"jumps": ExponentialJumps(1.0)}), ("compound", {"jumps": HALF_JUMPS}), ("poisson", {"rate": 1.0})],
)
def test_csv_round_trip(mode, kwargs):
    samples = run_simulation(SimulationConfig(mode, FIG1, 500, 11, **kwargs))
    text = samples.to_csv()
    again = read_samples_csv(io.StringIO(text))
    assert again.to_csv() == text
    assert np.array_equal(again.column("a"), samples.column("a"))


def test_csv_float_format_has_17_digits():
    samples = run_simulation(SimulationConfig("compound", FIG1, 20, 1, jumps=ExponentialJumps(1.0)))
    row = samples.to_csv().splitlines()[3].split(",")
    assert float(row[6]) == samples.column("a")[0]
    assert row[6] == format(samples.column("a")[0], ".17g")


def test_exact_csv_uses_decimals_and_fractions():
    thirds = DiscreteJumps(make_distribution([(F(1, 3), F(1, 2)), (F(1, 2), F(1, 2))]))
    text = run_simulation(SimulationConfig("compound", FIG1, 200, 1, jumps=thirds)).to_csv()
    values = {f for line in text.splitlines()[3:] for f in line.split(",")[5:9]}
    assert any("/" in v for v in values)
    assert all(F(v) >= 0 for v in values)


@pytest.mark.parametrize(
    "mangle",
    [
        lambda t: t[: len(t) // 2],
        lambda t: t.replace("# config:", "# conf:"),
        lambda t: t.replace("s_n_minus", "s_lo"),
        lambda t: "\n".join(t.splitlines()[:-1]) + "\n",
        lambda t: t.replace(",1\n", ",x\n", 1),
    ],
)
def test_csv_schema_errors(mangle):
    text = run_simulation(SimulationConfig("compound", FIG1, 50, 1, jumps=ExponentialJumps(1.0))).to_csv()
    with pytest.raises(SchemaError):
        read_samples_csv(io.StringIO(mangle(text)))


def test_parse_jump_spec(tmp_path):
    assert parse_jump_spec("exp:2") == ExponentialJumps(2.0)
    assert parse_jump_spec("det:1/2") == DeterministicJumps(F(1, 2))
    law = tmp_path / "law.json"
    law.write_text('{"atoms": [{"x": "0", "w": "1/2"}, {"x": "2", "w": "1/2"}]}')
    assert parse_jump_spec(f"discrete:{law}").law == TWO_POINT
    assert parse_jump_spec(HALF_JUMPS.spec()) == HALF_JUMPS
    for bad in ["exp", "exp:-1", "gamma:2", "det:x"]:
        with pytest.raises(InputError):
            parse_jump_spec(bad)


def test_config_rejects_negative_jumps():
    with pytest.raises(NegativeJumpSupport):
        SimulationConfig("compound", FIG1, 10, 0, jumps=DeterministicJumps(-1))


def test_direct_sampler_mean():
    rng = np.random.default_rng(0)
    draws = sample_compound_direct(FIG1_NU, ExponentialJumps(1.0), 50_000, rng)
    assert abs(draws.mean() - 3.5) < 4 * draws.std() / math.sqrt(len(draws))
    assert np.all(draws >= 0)
