"""Simulation of the martingale coupling (A, B) for compound sums and for
Poisson subordination.

Given a diatomic decomposition of Law(M) ≺_cx Law(N), one draw goes:

1. pick an atom (N_-, M, N_+) with probability equal to its weight;
2. draw the jumps X_1, ..., X_{N_+} and form the partial sums;
3. set A = S_M;
4. set B = S_{N_-} with probability alpha = (S_{N_+} - A) / (S_{N_+} - S_{N_-})
   and B = S_{N_+} otherwise (alpha = 1 when S_{N_-} = S_{N_+}).

Since alpha * S_{N_-} + (1 - alpha) * S_{N_+} = A, E(B | A) = A holds
by construction.  The Poisson variant replaces the partial sums by a
Poisson process read at the three times of the atom.
"""

from __future__ import annotations

import io
import json
import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .diatomic import DiatomicDecomposition, sample_atom_indices
from .distributions import (
    DiscreteDistribution,
    as_rational,
    distribution_from_json,
    distribution_to_json,
    load_distribution,
)
from .errors import (
    InputError,
    NegativeJumpSupport,
    NegativeTime,
    NonIntegerDecomposition,
    SchemaError,
)

__all__ = [
    "BLOCK_SIZE",
    "CSV_COLUMNS",
    "CouplingSample",
    "DeterministicJumps",
    "DiscreteJumps",
    "ExponentialJumps",
    "JumpModel",
    "SampleSet",
    "SimulationConfig",
    "block_rng",
    "parse_jump_spec",
    "read_samples_csv",
    "run_simulation",
    "sample_compound_coupling",
    "sample_compound_direct",
    "sample_poisson_coupling",
    "sample_poisson_direct",
]

CSV_COLUMNS = ("index", "atom_index", "n_minus", "m", "n_plus", "s_n_minus", "a", "s_n_plus", "b", "b_took_upper")

# Samples are generated in fixed-size blocks, each with its own substream
# derived from (seed, block index).  Changing this changes every output.
BLOCK_SIZE = 8192

# spawn_key reserved for reference (direct Monte-Carlo) streams
_REFERENCE_KEY = 2**32 - 1


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for one block of samples, independent of scheduling."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def reference_rng(seed: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(_REFERENCE_KEY, stream))
    return np.random.Generator(np.random.PCG64(ss))


# ----------------------------------------------------------------------
# jump models


class JumpModel:
    """Law of the i.i.d. summands.

    Instances are callables ``model(rng, k) -> array`` returning k
    independent jumps, so any other callable with that signature (e.g. an
    exchangeable generator) can stand in for the single-sample samplers.
    """

    exact: bool = False

    def __call__(self, rng: np.random.Generator, k: int) -> np.ndarray:
        return self.draw(rng, k)

    def draw(self, rng: np.random.Generator, k: int) -> np.ndarray:
        raise NotImplementedError

    def draw_scaled(self, rng: np.random.Generator, k: int) -> np.ndarray:
        """Integer numerators over :attr:`scale`; exact models only."""
        raise NotImplementedError

    @property
    def scale(self) -> int:
        return 1

    def spec(self) -> str:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def check_nonnegative(self) -> None:
        pass


@dataclass(frozen=True)
class DiscreteJumps(JumpModel):
    law: DiscreteDistribution
    exact = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "_cum", np.cumsum([float(w) for w in self.law.weights])[:-1])
        object.__setattr__(self, "_points", np.array([float(x) for x in self.law.points]))
        scale = self.scale
        object.__setattr__(self, "_scaled", np.array([int(x * scale) for x in self.law.points], dtype=np.int64))

    @property
    def scale(self) -> int:
        return math.lcm(*(x.denominator for x in self.law.points))

    def _indices(self, rng, k):
        return np.searchsorted(self._cum, rng.random(k), side="right")

    def draw(self, rng, k):
        return self._points[self._indices(rng, k)]

    def draw_scaled(self, rng, k):
        return self._scaled[self._indices(rng, k)]

    def spec(self) -> str:
        return "discrete:" + json.dumps(distribution_to_json(self.law), separators=(",", ":"))

    def mean(self) -> float:
        return float(sum(x * w for x, w in self.law.atoms))

    def check_nonnegative(self) -> None:
        if self.law.points[0] < 0:
            raise NegativeJumpSupport(f"jump law charges {self.law.points[0]} < 0")


@dataclass(frozen=True)
class ExponentialJumps(JumpModel):
    rate: float

    def __post_init__(self) -> None:
        if not self.rate > 0 or not math.isfinite(self.rate):
            raise InputError(f"exponential rate must be positive, got {self.rate}")

    def draw(self, rng, k):
        return rng.exponential(1.0 / self.rate, k)

    def spec(self) -> str:
        return f"exp:{self.rate!r}"

    def mean(self) -> float:
        return 1.0 / self.rate


@dataclass(frozen=True)
class DeterministicJumps(JumpModel):
    value: Fraction
    exact = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", as_rational(self.value))

    @property
    def scale(self) -> int:
        return self.value.denominator

    def draw(self, rng, k):
        return np.full(k, float(self.value))

    def draw_scaled(self, rng, k):
        return np.full(k, self.value.numerator, dtype=np.int64)

    def spec(self) -> str:
        return f"det:{self.value}"

    def mean(self) -> float:
        return float(self.value)

    def check_nonnegative(self) -> None:
        if self.value < 0:
            raise NegativeJumpSupport(f"deterministic jump {self.value} < 0")


def parse_jump_spec(spec: str) -> JumpModel:
    """Parse ``exp:RATE``, ``det:VALUE`` or ``discrete:FILE`` (or inline JSON)."""
    kind, sep, arg = spec.partition(":")
    if not sep or not arg:
        raise InputError(f"jump spec {spec!r} is not of the form kind:argument")
    if kind in ("exp", "exponential"):
        try:
            return ExponentialJumps(float(arg))
        except ValueError as exc:
            raise InputError(f"bad exponential rate {arg!r}") from exc
    if kind in ("det", "deterministic"):
        return DeterministicJumps(as_rational(arg))
    if kind == "discrete":
        if arg.lstrip().startswith("{"):
            try:
                return DiscreteJumps(distribution_from_json(json.loads(arg)))
            except json.JSONDecodeError as exc:
                raise InputError(f"bad inline jump law: {exc}") from exc
        return DiscreteJumps(load_distribution(arg))
    raise InputError(f"unknown jump kind {kind!r}")


# ----------------------------------------------------------------------
# samples


Number = Union[Fraction, float, int]


@dataclass(frozen=True)
class CouplingSample:
    """One realized pair (A, B) with its scaffolding.

    In compound mode ``n_minus, m, n_plus`` are the summand counts of the
    drawn atom; in Poisson mode they are its three evaluation times.
    """

    atom_index: int
    n_minus: Number
    m: Number
    n_plus: Number
    s_n_minus: Number
    a: Number
    s_n_plus: Number
    b: Number
    b_took_upper: bool


def _split(lo, a, hi, uniform: float):
    """Resolve B given the endpoints and a uniform draw."""
    if hi == lo:
        return lo, False
    alpha = (hi - a) / (hi - lo)
    took_upper = uniform >= float(alpha)
    return (hi if took_upper else lo), took_upper


def _integer_triple(atom) -> tuple[int, int, int]:
    triple = atom.triple
    if any(v.denominator != 1 or v < 0 for v in triple):
        raise NonIntegerDecomposition(f"atom {triple} is not a triple of nonnegative integers")
    return tuple(int(v) for v in triple)


def _check_compound(dec: DiatomicDecomposition) -> None:
    for atom in dec.atoms:
        _integer_triple(atom)


def _check_times(dec: DiatomicDecomposition) -> None:
    for atom in dec.atoms:
        if atom.v_minus < 0:
            raise NegativeTime(f"atom {atom.triple} has a negative time")


def sample_compound_coupling(
    dec: DiatomicDecomposition,
    jumps: Callable[[np.random.Generator, int], Sequence[float]],
    rng: np.random.Generator,
) -> CouplingSample:
    """Draw one coupled pair for compound sums.

    ``jumps`` is a :class:`JumpModel` or any callable returning a sequence
    of k nonnegative jumps; the sequence only needs to be exchangeable.
    Exact jump models keep A and B as exact rationals.
    """
    _check_compound(dec)
    if isinstance(jumps, JumpModel):
        jumps.check_nonnegative()
    i = int(sample_atom_indices(dec, rng, 1)[0])
    n_minus, m, n_plus = _integer_triple(dec.atoms[i])
    if isinstance(jumps, JumpModel) and jumps.exact:
        xs = [Fraction(int(v), jumps.scale) for v in jumps.draw_scaled(rng, n_plus)]
        partial = [Fraction(0)]
    else:
        xs = [float(v) for v in jumps(rng, n_plus)]
        if len(xs) != n_plus:
            raise InputError(f"jump generator returned {len(xs)} values, expected {n_plus}")
        if any(x < 0 for x in xs):
            raise NegativeJumpSupport("jump generator produced a negative jump")
        partial = [0.0]
    for x in xs:
        partial.append(partial[-1] + x)
    lo, a, hi = partial[n_minus], partial[m], partial[n_plus]
    b, took = _split(lo, a, hi, rng.random())
    return CouplingSample(i, n_minus, m, n_plus, lo, a, hi, b, took)


def sample_poisson_coupling(dec: DiatomicDecomposition, rate: float, rng: np.random.Generator) -> CouplingSample:
    """Draw one coupled pair (N_S, B) for a rate-``rate`` Poisson process.

    The atom's triple is read as times (t_-, s, t_+).
    """
    if not rate > 0:
        raise InputError(f"Poisson rate must be positive, got {rate}")
    _check_times(dec)
    i = int(sample_atom_indices(dec, rng, 1)[0])
    atom = dec.atoms[i]
    n1 = int(rng.poisson(rate * float(atom.v_minus)))
    n2 = int(rng.poisson(rate * float(atom.u - atom.v_minus)))
    n3 = int(rng.poisson(rate * float(atom.v_plus - atom.u)))
    lo, a, hi = n1, n1 + n2, n1 + n2 + n3
    b, took = _split(Fraction(lo), Fraction(a), Fraction(hi), rng.random())
    return CouplingSample(i, atom.v_minus, atom.u, atom.v_plus, lo, a, hi, int(b), took)


@dataclass
class SimulationConfig:
    mode: str
    decomposition: DiatomicDecomposition
    n: int
    seed: int
    jumps: Optional[JumpModel] = None
    rate: Optional[float] = None

    def __post_init__(self) -> None:
        if self.mode not in ("compound", "poisson"):
            raise InputError(f"unknown mode {self.mode!r}")
        if self.n < 0:
            raise InputError("n must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.mode == "compound":
            if self.jumps is None:
                raise InputError("compound mode needs a jump model")
            self.jumps.check_nonnegative()
            _check_compound(self.decomposition)
        else:
            if self.rate is None or not self.rate > 0:
                raise InputError("poisson mode needs a positive rate")
            _check_times(self.decomposition)

    @property
    def exact(self) -> bool:
        return self.mode == "poisson" or bool(self.jumps is not None and self.jumps.exact)

    def echo(self) -> dict:
        dec = self.decomposition
        out = {
            "mode": self.mode,
            "decomposition": dec.digest(),
            "rule": dec.selection_rule.value,
            "mu": distribution_to_json(dec.u_marginal()),
            "nu": distribution_to_json(dec.v_marginal()),
            "n": self.n,
            "seed": self.seed,
            "block_size": BLOCK_SIZE,
            "exact": self.exact,
        }
        if self.mode == "compound":
            out["jumps"] = self.jumps.spec()
        else:
            out["rate"] = self.rate
        return out


@dataclass
class SampleSet:
    """Column store of coupled samples.

    Value columns hold float64, or int64 numerators over ``scale`` when the
    run is exact.  ``triples`` maps atom indices to their (v_minus, u,
    v_plus) labels.
    """

    mode: str
    config: dict
    triples: tuple[tuple[Fraction, Fraction, Fraction], ...]
    atom_index: np.ndarray
    s_n_minus: np.ndarray
    a: np.ndarray
    s_n_plus: np.ndarray
    b: np.ndarray
    b_took_upper: np.ndarray
    scale: Optional[int] = None
    _floats: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.atom_index)

    @property
    def exact(self) -> bool:
        return self.scale is not None

    def column(self, name: str) -> np.ndarray:
        """Float view of a value column (``s_n_minus``, ``a``, ``s_n_plus``, ``b``)."""
        if name not in self._floats:
            raw = getattr(self, name)
            self._floats[name] = raw / self.scale if self.exact else raw.astype(float)
        return self._floats[name]

    def _value(self, raw) -> Number:
        return Fraction(int(raw), self.scale) if self.exact else float(raw)

    def __getitem__(self, i: int) -> CouplingSample:
        n_minus, m, n_plus = self.triples[int(self.atom_index[i])]
        if self.mode == "compound":
            n_minus, m, n_plus = int(n_minus), int(m), int(n_plus)
        return CouplingSample(
            int(self.atom_index[i]),
            n_minus,
            m,
            n_plus,
            self._value(self.s_n_minus[i]),
            self._value(self.a[i]),
            self._value(self.s_n_plus[i]),
            self._value(self.b[i]),
            bool(self.b_took_upper[i]),
        )

    def __iter__(self) -> Iterator[CouplingSample]:
        return (self[i] for i in range(len(self)))

    def with_permuted_b(self, rng: np.random.Generator) -> SampleSet:
        """Copy whose B column is shuffled across samples (negative control)."""
        perm = rng.permutation(len(self))
        return replace(self, b=self.b[perm], b_took_upper=self.b_took_upper[perm], _floats={})

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("# convord coupling samples\n")
        out.write("# config: " + json.dumps(self.config, sort_keys=True, separators=(",", ":")) + "\n")
        out.write(",".join(CSV_COLUMNS) + "\n")
        labels = [tuple(_fmt_rational(v) for v in t) for t in self.triples]
        if self.mode == "compound":
            labels = [tuple(str(int(v)) for v in t) for t in self.triples]
        cols = [self._format_column(getattr(self, name)) for name in ("s_n_minus", "a", "s_n_plus", "b")]
        took = np.where(self.b_took_upper, "1", "0")
        for i in range(len(self)):
            k = int(self.atom_index[i])
            out.write(
                f"{i},{k},{labels[k][0]},{labels[k][1]},{labels[k][2]},"
                f"{cols[0][i]},{cols[1][i]},{cols[2][i]},{cols[3][i]},{took[i]}\n"
            )
        return out.getvalue()

    def _format_column(self, raw: np.ndarray) -> list[str]:
        if not self.exact:
            return [format(float(v), ".17g") for v in raw]
        if self.scale == 1:
            return [str(int(v)) for v in raw]
        cache: dict[int, str] = {}
        out = []
        for v in raw.tolist():
            s = cache.get(v)
            if s is None:
                s = cache[v] = _fmt_rational(Fraction(v, self.scale))
            out.append(s)
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def _fmt_rational(x: Fraction) -> str:
    """Integer, terminating decimal, or ``p/q`` -- whichever is exact."""
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    scaled = abs(x.numerator) * 10**digits // x.denominator
    sign = "-" if x < 0 else ""
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


def read_samples_csv(source) -> SampleSet:
    """Parse a samples CSV written by :meth:`SampleSet.to_csv`.

    Raises:
        SchemaError: missing config header, wrong columns, malformed or
            missing rows.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    config = None
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith("#"):
            break
        if line.startswith("# config: "):
            try:
                config = json.loads(line[len("# config: "):])
            except json.JSONDecodeError as exc:
                raise SchemaError(f"unreadable config header: {exc}") from exc
    else:
        body_start = len(lines)
    if config is None:
        raise SchemaError("missing '# config:' header line")
    if body_start >= len(lines) or tuple(lines[body_start].split(",")) != CSV_COLUMNS:
        raise SchemaError(f"expected header {','.join(CSV_COLUMNS)}")
    if not text.endswith("\n"):
        raise SchemaError("file does not end with a newline (truncated?)")
    rows = lines[body_start + 1:]
    try:
        mode, n, exact = config["mode"], int(config["n"]), bool(config["exact"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"config header lacks field {exc}") from exc
    if len(rows) != n:
        raise SchemaError(f"expected {n} rows, found {len(rows)}")

    triples: dict[int, tuple[Fraction, Fraction, Fraction]] = {}
    atom_index = np.empty(n, dtype=np.int64)
    took = np.empty(n, dtype=bool)
    values: list[list[str]] = [[], [], [], []]
    for i, row in enumerate(rows):
        fields = row.split(",")
        if len(fields) != len(CSV_COLUMNS):
            raise SchemaError(f"row {i} has {len(fields)} fields")
        try:
            if int(fields[0]) != i:
                raise SchemaError(f"row {i} carries index {fields[0]}")
            k = int(fields[1])
            triple = tuple(Fraction(f) for f in fields[2:5])
            if fields[9] not in ("0", "1"):
                raise ValueError(fields[9])
        except ValueError as exc:
            raise SchemaError(f"row {i}: {exc}") from exc
        if triples.setdefault(k, triple) != triple:
            raise SchemaError(f"row {i}: atom {k} has inconsistent labels")
        atom_index[i] = k
        took[i] = fields[9] == "1"
        for j in range(4):
            values[j].append(fields[5 + j])

    scale = None
    try:
        if exact:
            parsed = [[Fraction(v) for v in col] for col in values]
            scale = math.lcm(1, *(v.denominator for col in parsed for v in col))
            arrays = [np.array([int(v * scale) for v in col], dtype=np.int64) for col in parsed]
        else:
            arrays = [np.array([float(v) for v in col], dtype=float) for col in values]
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"unparseable value: {exc}") from exc
    # atoms never drawn get placeholder labels
    width = max(triples) + 1 if triples else 0
    filler = (Fraction(0),) * 3
    return SampleSet(
        mode,
        config,
        tuple(triples.get(k, filler) for k in range(width)),
        atom_index,
        *arrays,
        took,
        scale=scale,
    )


# ----------------------------------------------------------------------
# batch driver


def _padded_partial_sums(counts: np.ndarray, jumps: np.ndarray, dtype) -> np.ndarray:
    """Row i holds 0, X_1, X_1 + X_2, ... for its own ``counts[i]`` jumps."""
    k = len(counts)
    width = int(counts.max()) if k else 0
    steps = np.zeros((k, width), dtype=dtype)
    steps[np.arange(width)[None, :] < counts[:, None]] = jumps
    partial = np.zeros((k, width + 1), dtype=dtype)
    np.cumsum(steps, axis=1, out=partial[:, 1:])
    return partial


def _resolve(lo, a, hi, uniforms):
    span = hi - lo
    safe = np.where(span > 0, span, 1)
    alpha = np.where(span > 0, (hi - a) / safe, 1.0)
    took = uniforms >= alpha
    return np.where(took, hi, lo), took


def _compound_block(cfg: SimulationConfig, rng: np.random.Generator, k: int, table: np.ndarray):
    idx = sample_atom_indices(cfg.decomposition, rng, k)
    n_minus, m, n_plus = table[idx, 0], table[idx, 1], table[idx, 2]
    total = int(n_plus.sum())
    if cfg.jumps.exact:
        xs, dtype = cfg.jumps.draw_scaled(rng, total), np.int64
    else:
        xs, dtype = cfg.jumps.draw(rng, total), float
    partial = _padded_partial_sums(n_plus, xs, dtype)
    rows = np.arange(k)
    lo, a, hi = partial[rows, n_minus], partial[rows, m], partial[rows, n_plus]
    b, took = _resolve(lo, a, hi, rng.random(k))
    return idx, lo, a, hi, b, took


def _poisson_block(cfg: SimulationConfig, rng: np.random.Generator, k: int, means: np.ndarray):
    idx = sample_atom_indices(cfg.decomposition, rng, k)
    lam = means[idx]
    n1 = rng.poisson(lam[:, 0])
    n2 = rng.poisson(lam[:, 1])
    n3 = rng.poisson(lam[:, 2])
    lo = n1.astype(np.int64)
    a = lo + n2
    hi = a + n3
    b, took = _resolve(lo, a, hi, rng.random(k))
    return idx, lo, a, hi, b, took


def run_simulation(cfg: SimulationConfig) -> SampleSet:
    """Draw ``cfg.n`` independent coupled pairs.

    Output is bit-reproducible from (seed, n, config): samples come in
    blocks of :data:`BLOCK_SIZE`, block j using the substream
    ``SeedSequence(seed, spawn_key=(j,))``.
    """
    dec = cfg.decomposition
    if cfg.mode == "compound":
        table = np.array([_integer_triple(atom) for atom in dec.atoms], dtype=np.int64)
        block, arg = _compound_block, table
        scale = cfg.jumps.scale if cfg.jumps.exact else None
    else:
        arg = np.array(
            [
                [cfg.rate * float(t.v_minus), cfg.rate * float(t.u - t.v_minus), cfg.rate * float(t.v_plus - t.u)]
                for t in dec.atoms
            ]
        )
        block, scale = _poisson_block, 1

    parts = []
    for j, start in enumerate(range(0, cfg.n, BLOCK_SIZE)):
        k = min(BLOCK_SIZE, cfg.n - start)
        parts.append(block(cfg, block_rng(cfg.seed, j), k, arg))
    dtype = np.int64 if scale is not None else float
    if parts:
        cols = [np.concatenate(c) for c in zip(*parts)]
    else:
        cols = [np.empty(0, np.int64)] + [np.empty(0, dtype)] * 4 + [np.empty(0, bool)]
    idx, lo, a, hi, b, took = cols
    return SampleSet(
        cfg.mode,
        cfg.echo(),
        tuple(atom.triple for atom in dec.atoms),
        idx.astype(np.int64),
        lo.astype(dtype),
        a.astype(dtype),
        hi.astype(dtype),
        b.astype(dtype),
        took.astype(bool),
        scale=scale,
    )


# ----------------------------------------------------------------------
# direct reference samplers


def sample_compound_direct(
    count: DiscreteDistribution, jumps: JumpModel, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n independent draws of X_1 + ... + X_N with N ~ ``count`` (floats)."""
    for c in count.points:
        if c.denominator != 1 or c < 0:
            raise InputError(f"count law charges {c}")
    cum = np.cumsum([float(w) for w in count.weights])[:-1]
    points = np.array([int(c) for c in count.points], dtype=np.int64)
    counts = points[np.searchsorted(cum, rng.random(n), side="right")]
    xs = jumps.draw(rng, int(counts.sum()))
    partial = _padded_partial_sums(counts, xs, float)
    return partial[np.arange(n), counts]


def sample_poisson_direct(times: DiscreteDistribution, rate: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """n independent draws of N_T for a rate-``rate`` Poisson process."""
    cum = np.cumsum([float(w) for w in times.weights])[:-1]
    t = np.array([float(x) for x in times.points])
    return rng.poisson(rate * t[np.searchsorted(cum, rng.random(n), side="right")])

