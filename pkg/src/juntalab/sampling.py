"""Example oracles and calibrated coefficient estimators.

An oracle serves labeled draws from one biased product measure.  Sample
sizes come from Hoeffding bounds on the standardized characters, whose range
grows like (2 / sigma)^|S|, hence the (2^|S| / (epsilon * sigma^|S|))^2
factor in the calibration.

Estimates accumulate in fixed example order with exactly rounded summation,
so a batch scan and a per-subset call produce bit-identical values and a
replayed example stream reproduces a run decision for decision.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .boolfn import Junta, assignments
from .errors import (
    BudgetExhaustedError,
    DomainError,
    EmptySampleError,
    InvalidParamsError,
    SizeLimitError,
)
from .measure import as_bias_vector, sample_batch, sigma, sigma_vector

__all__ = [
    "EstimatorParams",
    "Example",
    "ExampleBatch",
    "Oracle",
    "RecordingOracle",
    "ReplayOracle",
    "bias_sample_size",
    "chi_cross_coefficient",
    "chi_l2_distance",
    "dump_examples_csv",
    "estimate_bias",
    "estimate_coefficient",
    "estimate_coefficient_unknown_bias",
    "estimate_level_batch",
    "hoeffding_sample_size",
    "load_examples_csv",
    "unknown_bias_accuracy",
]


@dataclass(frozen=True)
class Example:
    x: tuple[int, ...]
    label: int


@dataclass
class ExampleBatch:
    """A block of labeled assignments stored as sign arrays."""

    xs: np.ndarray
    labels: np.ndarray
    _xs_float: np.ndarray | None = field(default=None, repr=False, compare=False)
    _labels_float: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.xs = np.asarray(self.xs)
        self.labels = np.asarray(self.labels)
        if self.xs.ndim != 2 or self.labels.ndim != 1 or self.xs.shape[0] != self.labels.shape[0]:
            raise InvalidParamsError("examples need an (m, n) sign array and m labels")

    @property
    def m(self) -> int:
        return self.xs.shape[0]

    @property
    def n(self) -> int:
        return self.xs.shape[1]

    def __len__(self) -> int:
        return self.m

    @property
    def xs_float(self) -> np.ndarray:
        if self._xs_float is None:
            self._xs_float = self.xs.astype(np.float64)
        return self._xs_float

    @property
    def labels_float(self) -> np.ndarray:
        if self._labels_float is None:
            self._labels_float = self.labels.astype(np.float64)
        return self._labels_float

    @classmethod
    def from_examples(cls, examples: Iterable[Example]) -> "ExampleBatch":
        rows = list(examples)
        if not rows:
            raise EmptySampleError("no examples given")
        xs = np.array([e.x for e in rows], dtype=np.int8)
        labels = np.array([e.label for e in rows], dtype=np.int8)
        return cls(xs, labels)

    def to_examples(self) -> list[Example]:
        return [
            Example(tuple(int(v) for v in row), int(lab))
            for row, lab in zip(self.xs, self.labels)
        ]

    @classmethod
    def concat(cls, parts: Sequence["ExampleBatch"]) -> "ExampleBatch":
        return cls(
            np.concatenate([p.xs for p in parts], axis=0),
            np.concatenate([p.labels for p in parts]),
        )


def _as_batch(examples) -> ExampleBatch:
    if isinstance(examples, ExampleBatch):
        return examples
    return ExampleBatch.from_examples(examples)


@dataclass(frozen=True)
class EstimatorParams:
    """Accuracy / confidence knobs shared by the estimator entry points."""

    epsilon: float
    delta: float
    alpha: float = 1.0
    gamma: float | None = None


class Oracle:
    """Labeled-example source for one target at one bias.

    The stream is derived from (master_seed, oracle_id), so distinct ids give
    independent streams and the same pair replays the same sequence.  Every
    served example is counted in ``draws``.
    """

    def __init__(self, f: Junta, r: float, master_seed, oracle_id: int = 0):
        r = float(r)
        if not -1.0 < r < 1.0:
            raise DomainError(f"oracle bias must lie in (-1, 1), got {r}")
        self.f = f
        self.bias = r
        self.oracle_id = int(oracle_id)
        self._rng = np.random.default_rng(
            np.random.SeedSequence(master_seed, spawn_key=(self.oracle_id,))
        )
        self.draws = 0

    @property
    def n(self) -> int:
        return self.f.n

    def draw_batch(self, m: int) -> ExampleBatch:
        if m < 0:
            raise InvalidParamsError(f"batch size must be nonnegative, got {m}")
        xs = sample_batch(self.bias, self._rng, m, self.n)
        labels = self.f.eval_batch(xs)
        self.draws += m
        return ExampleBatch(xs, labels)

    def draw(self) -> Example:
        batch = self.draw_batch(1)
        return Example(tuple(int(v) for v in batch.xs[0]), int(batch.labels[0]))


class RecordingOracle:
    """Transparent wrapper that keeps every served example for later dumping."""

    def __init__(self, inner):
        self.inner = inner
        self.parts: list[ExampleBatch] = []

    @property
    def n(self) -> int:
        return self.inner.n

    @property
    def bias(self) -> float:
        return self.inner.bias

    @property
    def draws(self) -> int:
        return self.inner.draws

    def draw_batch(self, m: int) -> ExampleBatch:
        batch = self.inner.draw_batch(m)
        self.parts.append(batch)
        return batch

    def draw(self) -> Example:
        batch = self.draw_batch(1)
        return Example(tuple(int(v) for v in batch.xs[0]), int(batch.labels[0]))

    def recorded(self) -> ExampleBatch:
        if not self.parts:
            return ExampleBatch(np.empty((0, self.n), dtype=np.int8), np.empty(0, dtype=np.int8))
        return ExampleBatch.concat(self.parts)


class ReplayOracle:
    """Serves a recorded example stream in order instead of sampling."""

    def __init__(self, batch: ExampleBatch, bias: float):
        self._batch = batch
        self.bias = float(bias)
        self._pos = 0
        self.draws = 0

    @property
    def n(self) -> int:
        return self._batch.n

    def draw_batch(self, m: int) -> ExampleBatch:
        if self._pos + m > self._batch.m:
            raise BudgetExhaustedError(
                f"replay stream exhausted: need {m} more examples, "
                f"have {self._batch.m - self._pos}"
            )
        sl = slice(self._pos, self._pos + m)
        self._pos += m
        self.draws += m
        return ExampleBatch(self._batch.xs[sl], self._batch.labels[sl])

    def draw(self) -> Example:
        batch = self.draw_batch(1)
        return Example(tuple(int(v) for v in batch.xs[0]), int(batch.labels[0]))


def dump_examples_csv(batch: ExampleBatch, path) -> None:
    """One row per example: n sign columns then the label, all -1/1."""
    data = np.column_stack([batch.xs.astype(np.int64), batch.labels.astype(np.int64)])
    np.savetxt(path, data, fmt="%d", delimiter=",")


def load_examples_csv(path) -> ExampleBatch:
    text = Path(path).read_text()
    if not text.strip():
        raise EmptySampleError(f"no examples in {path}")
    data = np.loadtxt(io.StringIO(text), delimiter=",", dtype=np.int64, ndmin=2)
    if data.shape[1] < 2:
        raise InvalidParamsError(f"{path} needs at least one sign column plus a label")
    return ExampleBatch(data[:, :-1].astype(np.int8), data[:, -1].astype(np.int8))


# ---------------------------------------------------------------------------
# sample-size calibration


def hoeffding_sample_size(card_s: int, sigma_val: float, epsilon: float, delta: float) -> int:
    """Examples needed so one coefficient estimate of a size-card_s subset is
    within epsilon with confidence 1 - delta:

        m = ceil( 2 * ln(2/delta) * (2^card_s / epsilon)^2 * (1/sigma)^(2*card_s) ).
    """
    if card_s < 0:
        raise DomainError(f"subset size must be nonnegative, got {card_s}")
    if not 0.0 < sigma_val <= 1.0:
        raise DomainError(f"sigma must lie in (0, 1], got {sigma_val}")
    if not 0.0 < epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    m = 2.0 * math.log(2.0 / delta) * (2.0**card_s / epsilon) ** 2 / sigma_val ** (2 * card_s)
    return math.ceil(m)


def bias_sample_size(gamma: float, delta: float) -> int:
    """Unlabeled examples needed to estimate a coordinate bias to accuracy
    gamma: m = ceil(8 * ln(4/delta) / gamma^2).  The constant already budgets
    this phase at half the caller's confidence."""
    if not 0.0 < gamma <= 1.0:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    if not 0.0 < delta < 4.0:
        raise DomainError(f"delta must make ln(4/delta) positive, got {delta}")
    return math.ceil(8.0 * math.log(4.0 / delta) / gamma**2)


# ---------------------------------------------------------------------------
# estimators


def _coefficient_value(batch: ExampleBatch, S: Sequence[int], rv: np.ndarray) -> float:
    terms = batch.labels_float
    scale = 1.0
    for i in S:
        terms = terms * (batch.xs_float[:, i] - rv[i])
        scale *= math.sqrt((1.0 - rv[i]) * (1.0 + rv[i]))
    if scale != 1.0:
        terms = terms / scale
    # exactly rounded sum in example order; replays agree bit for bit
    return math.fsum(terms.tolist()) / batch.m


def estimate_coefficient(examples, S: Iterable[int], r) -> float:
    """Empirical coefficient (1/m) sum_t label_t * chi_S(x_t, r)."""
    batch = _as_batch(examples)
    if batch.m == 0:
        raise EmptySampleError("coefficient estimation needs at least one example")
    S = sorted(int(i) for i in S)
    for i in S:
        if not 0 <= i < batch.n:
            raise DomainError(f"subset index {i} outside [0, {batch.n})")
    rv = as_bias_vector(r, batch.n)
    return _coefficient_value(batch, S, rv)


def estimate_level_batch(examples, s_max: int, r) -> dict[tuple[int, ...], float]:
    """Estimates for every subset of size 1..s_max, reusing one example block.

    Each entry is computed by the identical arithmetic as a per-subset
    estimate_coefficient call, so the two paths agree bit for bit.
    """
    batch = _as_batch(examples)
    if batch.m == 0:
        raise EmptySampleError("coefficient estimation needs at least one example")
    if s_max < 1:
        raise InvalidParamsError(f"s_max must be >= 1, got {s_max}")
    rv = as_bias_vector(r, batch.n)
    out: dict[tuple[int, ...], float] = {}
    for size in range(1, min(s_max, batch.n) + 1):
        for S in combinations(range(batch.n), size):
            out[S] = _coefficient_value(batch, S, rv)
    return out


def estimate_bias(examples) -> float:
    """Pooled mean of every coordinate of every example.

    All coordinates share one bias in the learning model, so pooling across
    coordinates tightens the estimate by a factor sqrt(n) over the
    single-coordinate calibration that sizes the sample.
    """
    batch = _as_batch(examples)
    if batch.m == 0 or batch.n == 0:
        raise EmptySampleError("bias estimation needs at least one example coordinate")
    row_sums = batch.xs_float.sum(axis=1)
    return math.fsum(row_sums.tolist()) / (batch.m * batch.n)


def unknown_bias_accuracy(alpha: float, card_s: int) -> float:
    """Bias accuracy gamma = alpha^((|S|+1)/2) / (2 (|S|+1)) that keeps the
    character perturbation within half the estimation budget."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if card_s < 0:
        raise DomainError(f"subset size must be nonnegative, got {card_s}")
    return alpha ** ((card_s + 1) / 2.0) / (2.0 * (card_s + 1))


def estimate_coefficient_unknown_bias(
    oracle, S: Iterable[int], alpha: float, epsilon: float, delta: float
) -> float:
    """Two-phase estimate when the oracle bias is not given.

    Phase one estimates the bias from unlabeled draws to accuracy gamma =
    alpha^((|S|+1)/2) / (2(|S|+1)); phase two estimates the coefficient of
    chi_S at the estimated bias to epsilon/2.  Confidence splits evenly
    between the phases.  The bias estimate is clamped to [-(1-alpha),
    1-alpha], which never hurts when the promise |r| <= 1-alpha holds and
    keeps sigma away from zero.
    """
    S = sorted(int(i) for i in S)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    gamma = unknown_bias_accuracy(alpha, len(S))
    m1 = bias_sample_size(gamma, delta)
    r_est = estimate_bias(oracle.draw_batch(m1))
    r_est = min(max(r_est, -(1.0 - alpha)), 1.0 - alpha)
    m2 = hoeffding_sample_size(len(S), sigma(r_est), epsilon / 2.0, delta / 2.0)
    return estimate_coefficient(oracle.draw_batch(m2), S, r_est)


# ---------------------------------------------------------------------------
# character geometry under mismatched biases


def _bias_at(r, i: int) -> float:
    arr = np.asarray(r, dtype=np.float64)
    v = float(arr) if arr.ndim == 0 else float(arr[i])
    if not -1.0 < v < 1.0:
        raise DomainError(f"bias must lie in (-1, 1), got {v}")
    return v


def chi_cross_coefficient(S: Iterable[int], T: Iterable[int], r, r_prime) -> float:
    """Coefficient of chi_T(., r) in the expansion of chi_S(., r_prime) under
    the r-biased measure.

    Zero unless T is contained in S; otherwise the product of sigma_i(r) over
    T, divided by sigma_i(r_prime) over S, times prod_{i in S \\ T}
    (r_i - r_prime_i).
    """
    S = frozenset(int(i) for i in S)
    T = frozenset(int(i) for i in T)
    if any(i < 0 for i in S | T):
        raise DomainError("subset indices must be nonnegative")
    if not T <= S:
        return 0.0
    out = 1.0
    for i in T:
        out *= math.sqrt((1.0 - _bias_at(r, i)) * (1.0 + _bias_at(r, i)))
    for i in S:
        rp = _bias_at(r_prime, i)
        out /= math.sqrt((1.0 - rp) * (1.0 + rp))
    for i in S - T:
        out *= _bias_at(r, i) - _bias_at(r_prime, i)
    return out


def chi_l2_distance(S: Iterable[int], r, r_prime, n: int) -> float:
    """L2 distance under the r-biased measure between chi_S at the two
    biases, by exact enumeration of the cube (n <= 14)."""
    if n > 14:
        raise SizeLimitError(f"exact enumeration is capped at n <= 14, got {n}")
    S = sorted(int(i) for i in S)
    for i in S:
        if not 0 <= i < n:
            raise DomainError(f"subset index {i} outside [0, {n})")
    rv = as_bias_vector(r, n)
    rpv = as_bias_vector(r_prime, n)
    X = assignments(n).astype(np.float64)
    dens = np.prod((1.0 + X * rv) / 2.0, axis=1)
    sig = sigma_vector(rv)
    sig_p = sigma_vector(rpv)
    col = np.ones(1 << n)
    col_p = np.ones(1 << n)
    for i in S:
        col *= (X[:, i] - rv[i]) / sig[i]
        col_p *= (X[:, i] - rpv[i]) / sig_p[i]
    diff = col_p - col
    return float(math.sqrt(np.dot(dens * diff, diff)))
