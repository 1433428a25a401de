"""Convex ordering of compound distributions made executable.

Exact discrete laws and order checks, the diatomic decomposition of a
convex-ordered pair, and Monte-Carlo simulation of the martingale coupling
between compound sums.
"""

from .coupling import (
    DeterministicJumps,
    DiscreteJumps,
    ExponentialJumps,
    SampleSet,
    SimulationConfig,
    run_simulation,
    sample_compound_coupling,
    sample_poisson_coupling,
)
from .diatomic import (
    DiatomicAtom,
    DiatomicDecomposition,
    SelectionRule,
    diatomic_decompose,
    sample_atom,
    validate_decomposition,
)
from .distributions import (
    DiscreteDistribution,
    cdf,
    compound_exact,
    convolution_power,
    convolve,
    dirac,
    make_distribution,
    mean,
    mix,
    stop_loss,
)
from .orders import barycentric_weights, check_cx, check_icx, check_st, icx_decompose
from .verify import (
    counterexample_report,
    marginal_test_continuous,
    marginal_test_discrete,
    martingale_residual,
    poisson_marginal_pmf,
)

__all__ = [
    "barycentric_weights",
    "cdf",
    "check_cx",
    "check_icx",
    "check_st",
    "compound_exact",
    "convolution_power",
    "convolve",
    "counterexample_report",
    "DeterministicJumps",
    "diatomic_decompose",
    "DiatomicAtom",
    "DiatomicDecomposition",
    "dirac",
    "DiscreteDistribution",
    "DiscreteJumps",
    "ExponentialJumps",
    "icx_decompose",
    "make_distribution",
    "marginal_test_continuous",
    "marginal_test_discrete",
    "martingale_residual",
    "mean",
    "mix",
    "poisson_marginal_pmf",
    "run_simulation",
    "sample_atom",
    "sample_compound_coupling",
    "sample_poisson_coupling",
    "SampleSet",
    "SelectionRule",
    "SimulationConfig",
    "stop_loss",
    "validate_decomposition",
]

__version__ = "0.1.0"
