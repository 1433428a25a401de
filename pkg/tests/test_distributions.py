import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convord.distributions import (
    DiscreteDistribution,
    as_rational,
    cdf,
    compound_exact,
    convolution_power,
    convolve,
    dirac,
    distribution_from_json,
    distribution_to_json,
    make_distribution,
    mean,
    mix,
    stop_loss,
    stop_loss_many,
)
from convord.errors import EmptySupport, InputError, NonIntegerCount, NonUnitMass

FIG1_MU = make_distribution([(2, F(1, 4)), (3, F(1, 4)), (4, F(1, 4)), (5, F(1, 4))])
FIG1_NU = make_distribution([(1, F(1, 4)), (3, F(1, 4)), (4, F(1, 6)), (5, F(1, 6)), (6, F(1, 6))])
COIN = make_distribution([(-1, F(1, 2)), (1, F(1, 2))])
TWO_POINT = make_distribution([(0, F(1, 2)), (2, F(1, 2))])
X_N = make_distribution([(-2, F(1, 8)), (0, F(3, 4)), (2, F(1, 8))])


@st.composite
def laws(draw, min_point=-6, max_point=6, max_atoms=5):
    points = draw(st.lists(st.integers(min_point, max_point), min_size=1, max_size=max_atoms, unique=True))
    raw = draw(st.lists(st.integers(1, 9), min_size=len(points), max_size=len(points)))
    total = sum(raw)
    den = draw(st.sampled_from([1, 2, 3]))
    return make_distribution((F(x, den), F(w, total)) for x, w in zip(points, raw))


rationals = st.fractions(min_value=-8, max_value=8, max_denominator=6)


def brute_force_compound(count, jump):
    """Enumerate every jump sequence; independent of convolve()."""
    acc = {}
    for n, w in count.atoms:
        for seq in itertools.product(jump.atoms, repeat=int(n)):
            x = sum((p for p, _ in seq), F(0))
            prob = w
            for _, q in seq:
                prob *= q
            acc[x] = acc.get(x, F(0)) + prob
    return make_distribution(acc.items())


def test_duplicate_points_merge():
    d = make_distribution([(1, F(1, 2)), (1, F(1, 2))])
    assert d.atoms == ((F(1), F(1)),)


def test_figure_one_mu_atoms():
    d = make_distribution([(5, "1/4"), (3, "0.25"), (2, F(1, 4)), (4, "1/4")])
    assert d.points == (2, 3, 4, 5)
    assert d.weights == (F(1, 4),) * 4


def test_zero_weights_are_dropped():
    d = make_distribution([(0, 0), (1, 1)])
    assert d.points == (1,)


@pytest.mark.parametrize(
    "raw, exc",
    [
        ([(0, F(1, 2))], NonUnitMass),
        ([(0, 0)], EmptySupport),
        ([(0, F(3, 2)), (1, F(-1, 2))], InputError),
    ],
)
def test_make_distribution_errors(raw, exc):
    with pytest.raises(exc):
        make_distribution(raw)


def test_direct_construction_validates():
    with pytest.raises(InputError):
        DiscreteDistribution((F(1), F(0)), (F(1, 2), F(1, 2)))
    with pytest.raises(NonUnitMass):
        DiscreteDistribution((F(0),), (F(1, 2),))


@pytest.mark.parametrize(
    "text, value", [("3", F(3)), ("1/4", F(1, 4)), ("0.25", F(1, 4)), ("-2.5", F(-5, 2)), (0.1, F(1, 10))]
)
def test_as_rational(text, value):
    assert as_rational(text) == value


@pytest.mark.parametrize("bad", ["abc", "1/0", None, True])
def test_as_rational_rejects(bad):
    with pytest.raises(InputError):
        as_rational(bad)


def test_means():
    assert mean(TWO_POINT) == 1
    assert mean(FIG1_MU) == F(2 + 3 + 4 + 5, 4) == F(7, 2)
    assert mean(FIG1_NU) == F(1, 4) + F(3, 4) + F(4 + 5 + 6, 6) == F(7, 2)


def test_stop_loss_examples():
    assert stop_loss(dirac(1), 1) == 0
    assert stop_loss(TWO_POINT, 1) == F(1, 2)
    assert stop_loss(X_N, 0) == F(1, 8) * 2


def test_cdf_examples():
    assert cdf(dirac(1), 0) == 0
    assert cdf(dirac(1), 1) == 1
    assert cdf(TWO_POINT, 1) == F(1, 2)


def test_convolve_examples():
    assert convolve(dirac(2), dirac(3)) == dirac(5)
    assert convolve(COIN, COIN) == make_distribution([(-2, F(1, 4)), (0, F(1, 2)), (2, F(1, 4))])
    assert convolve(FIG1_NU, dirac(0)) == FIG1_NU


def test_convolution_power_examples():
    assert convolution_power(COIN, 0) == dirac(0)
    assert convolution_power(COIN, 1) == COIN
    assert convolution_power(COIN, 2) == make_distribution([(-2, F(1, 4)), (0, F(1, 2)), (2, F(1, 4))])
    with pytest.raises(InputError):
        convolution_power(COIN, -1)


def test_mix_examples():
    assert mix([(1, FIG1_MU)]) == FIG1_MU
    assert mix([(F(1, 2), dirac(0)), (F(1, 2), dirac(2))]) == TWO_POINT
    left = make_distribution([(0, F(3, 4)), (4, F(1, 4))])
    right = make_distribution([(0, F(1, 4)), (4, F(3, 4))])
    assert mix([(F(1, 2), left), (F(1, 2), right)]) == make_distribution([(0, F(1, 2)), (4, F(1, 2))])
    with pytest.raises(NonUnitMass):
        mix([(F(1, 2), left)])


def test_compound_exact_examples():
    assert compound_exact(TWO_POINT, COIN) == X_N
    assert compound_exact(dirac(0), FIG1_NU) == dirac(0)
    assert compound_exact(dirac(2), dirac(F(3, 2))) == dirac(3)
    with pytest.raises(NonIntegerCount):
        compound_exact(make_distribution([(F(1, 2), 1)]), COIN)
    with pytest.raises(NonIntegerCount):
        compound_exact(make_distribution([(-1, 1)]), COIN)


def test_json_round_trip():
    doc = {"atoms": [{"x": "3", "w": "0.5"}, {"x": "1/2", "w": "1/4"}, {"x": 3, "w": "1/4"}]}
    d = distribution_from_json(doc)
    assert d == make_distribution([(F(1, 2), F(1, 4)), (3, F(3, 4))])
    assert distribution_from_json(distribution_to_json(d)) == d


@pytest.mark.parametrize("doc", [[], {"atoms": 3}, {"atoms": [{"x": 1}]}, {"atoms": [{"x": "a", "w": 1}]}])
def test_json_rejects_malformed(doc):
    with pytest.raises(InputError):
        distribution_from_json(doc)


@given(laws(), laws())
def test_mean_is_additive_under_convolution(d1, d2):
    assert mean(convolve(d1, d2)) == mean(d1) + mean(d2)


@settings(max_examples=60, deadline=None)
@given(laws(min_point=0, max_point=4, max_atoms=3), laws(max_atoms=3))
def test_wald_identity(count, jump):
    count = make_distribution((abs(int(x)), w) for x, w in count.atoms)
    assert mean(compound_exact(count, jump)) == mean(count) * mean(jump)


@settings(max_examples=40, deadline=None)
@given(laws(min_point=0, max_point=3, max_atoms=3), laws(max_atoms=3))
def test_compound_exact_matches_enumeration(count, jump):
    count = make_distribution((abs(int(x)), w) for x, w in count.atoms)
    assert compound_exact(count, jump) == brute_force_compound(count, jump)


@given(laws())
def test_compound_of_one_is_identity(jump):
    assert compound_exact(dirac(1), jump) == jump


@given(laws(), rationals, rationals)
def test_stop_loss_convex_nonincreasing_and_above_mean_line(d, s, t):
    s, t = min(s, t), max(s, t)
    mid = (s + t) / 2
    assert stop_loss(d, t) <= stop_loss(d, s)
    assert stop_loss(d, mid) <= (stop_loss(d, s) + stop_loss(d, t)) / 2
    assert stop_loss(d, t) >= mean(d) - t


@given(laws(), st.lists(rationals, max_size=8))
def test_stop_loss_many_matches_pointwise(d, ts):
    assert stop_loss_many(d, ts) == [stop_loss(d, t) for t in ts]


@given(laws())
def test_recanonicalization_is_noop(d):
    again = make_distribution(d.atoms)
    assert again == d
    assert all(F(x.numerator, x.denominator) == x for x in d.points)
