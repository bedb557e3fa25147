"""Exact spectral analysis of juntas under biased product measures.

Everything is anchored to the uniform spectrum of the core, which is exact:
each coefficient is an integer multiple of 2**-k.  Two identities drive the
rest and both are used heavily by the calibrated estimators and the learner:

* change of basis to bias r:
      fhat(S, r) = sigma_S * sum_{T superset S} fhat(T, 0) * r_{T \\ S}
  where sigma_S and r_{T\\S} are coordinate products, and

* level weights of the expectation polynomial E_r[f] = sum_t w_t(f, 0) r^t:
      w_s(f, r) = (1 - r^2)^(s/2) * sum_{t >= s} C(t, s) w_t(f, 0) r^(t-s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence, Union

import numpy as np

from .boolfn import Junta, assignments, walsh_numerators
from .errors import DomainError, InvalidParamsError, LengthMismatchError, SizeLimitError
from .measure import as_bias_vector, sigma, sigma_vector

__all__ = [
    "DyadicPolynomial",
    "biased_coefficient",
    "biased_coefficient_bruteforce",
    "biased_coefficient_rational",
    "biased_spectrum",
    "dense_table",
    "expectation_polynomial",
    "level_weight",
    "level_weight_direct",
    "parseval_sum",
    "relevant_subsets",
    "uniform_coefficients",
]


@dataclass(frozen=True)
class DyadicPolynomial:
    """Univariate polynomial with exact rational coefficients, low order first.

    Trailing zero coefficients are stripped; the zero polynomial has an empty
    coefficient tuple and degree -1.
    """

    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        cs = [Fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, r):
        """Horner evaluation; exact when r is a Fraction or int."""
        if isinstance(r, (Fraction, int)):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * r + c
            return acc
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * r + float(c)
        return acc

    def as_floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]


FunctionLike = Union[Junta, np.ndarray, Sequence[float]]


def _relevant_numerators(f: Junta) -> list[int]:
    # W[mask]/2**k is the uniform coefficient of the subset of relevant
    # variables selected by mask
    return walsh_numerators(f.core)


def uniform_coefficients(f: Junta) -> dict[tuple[int, ...], Fraction]:
    """Exact uniform-measure coefficients, keyed by sorted subsets of the
    relevant variables.  All 2**k subsets appear, zeros included."""
    nums = _relevant_numerators(f)
    denom = 1 << f.k
    out: dict[tuple[int, ...], Fraction] = {}
    for mask, num in enumerate(nums):
        subset = tuple(f.relevant[b] for b in range(f.k) if (mask >> b) & 1)
        out[subset] = Fraction(num, denom)
    return out


def _subset_mask(f: Junta, S: Iterable[int]) -> int | None:
    """Mask of S inside the relevant tuple, or None when S is not contained
    in the relevant set."""
    pos = {var: b for b, var in enumerate(f.relevant)}
    mask = 0
    for i in S:
        b = pos.get(int(i))
        if b is None:
            return None
        mask |= 1 << b
    return mask


def biased_coefficient(f: Junta, S: Iterable[int], r) -> float:
    """Coefficient of chi_S under bias r via the change-of-basis sum over
    supersets of S inside the relevant set.

    Subsets not contained in the relevant set have coefficient exactly 0.
    """
    S = tuple(S)
    rv = as_bias_vector(r, f.n)
    mask = _subset_mask(f, S)
    if mask is None:
        return 0.0
    nums = _relevant_numerators(f)
    rr = rv[list(f.relevant)] if f.k else np.empty(0)
    full = (1 << f.k) - 1
    free = full ^ mask
    total = 0.0
    u = free
    while True:
        t_mask = mask | u
        num = nums[t_mask]
        if num:
            w = float(num)
            v = u
            while v:
                b = (v & -v).bit_length() - 1
                w *= rr[b]
                v &= v - 1
            total += w
        if u == 0:
            break
        u = (u - 1) & free
    total /= 1 << f.k
    for i in S:
        total *= sigma(rv[int(i)])
    return float(total)


def biased_coefficient_rational(f: Junta, S: Iterable[int], r: Fraction) -> Fraction:
    """Exact value of fhat(S, r) / sigma_S at a rational uniform bias r.

    The sigma_S factor is irrational in general but strictly positive, so
    this rational part is zero exactly when the coefficient is.
    """
    S = tuple(S)
    r = Fraction(r)
    mask = _subset_mask(f, S)
    if mask is None:
        return Fraction(0)
    nums = _relevant_numerators(f)
    full = (1 << f.k) - 1
    free = full ^ mask
    total = Fraction(0)
    u = free
    while True:
        num = nums[mask | u]
        if num:
            total += num * r ** u.bit_count()
        if u == 0:
            break
        u = (u - 1) & free
    return total / (1 << f.k)


def biased_spectrum(f: Junta, r) -> np.ndarray:
    """All 2**k biased coefficients at once, indexed by relevant-subset mask.

    Same change-of-basis identity as biased_coefficient, applied bit by bit:
    one pass absorbs r_i into supersets, a second applies the sigma factors.
    """
    rv = as_bias_vector(r, f.n)
    k = f.k
    out = np.asarray(_relevant_numerators(f), dtype=np.float64) / (1 << k)
    if k == 0:
        return out
    rr = rv[list(f.relevant)]
    sig = sigma_vector(rr)
    idx = np.arange(1 << k)
    for b in range(k):
        hi = (idx >> b) & 1 == 1
        out[~hi] += rr[b] * out[hi]
    for b in range(k):
        hi = (idx >> b) & 1 == 1
        out[hi] *= sig[b]
    return out


def dense_table(f: Junta) -> np.ndarray:
    """f evaluated on the full cube in assignment-index order (n <= 14)."""
    if f.n > 14:
        raise SizeLimitError(f"dense tables are capped at n <= 14, got n={f.n}")
    return f.eval_batch(assignments(f.n)).astype(np.float64)


def _coerce_table(f: FunctionLike) -> tuple[np.ndarray, int]:
    if isinstance(f, Junta):
        return dense_table(f), f.n
    table = np.asarray(f, dtype=np.float64)
    if table.ndim != 1 or table.size == 0 or table.size & (table.size - 1):
        raise LengthMismatchError("dense table length must be a power of two")
    n = table.size.bit_length() - 1
    if n > 14:
        raise SizeLimitError(f"dense tables are capped at n <= 14, got n={n}")
    return table, n


def biased_coefficient_bruteforce(f: FunctionLike, S: Iterable[int], r) -> float:
    """Independent check of biased_coefficient by full enumeration: the
    density-weighted inner product of f with chi_S over all 2**n points."""
    table, n = _coerce_table(f)
    S = [int(i) for i in S]
    for i in S:
        if not 0 <= i < n:
            raise DomainError(f"subset index {i} outside [0, {n})")
    rv = as_bias_vector(r, n)
    X = assignments(n).astype(np.float64)
    dens = np.prod((1.0 + X * rv) / 2.0, axis=1)
    col = np.ones(1 << n)
    sig = sigma_vector(rv)
    for i in S:
        col *= (X[:, i] - rv[i]) / sig[i]
    return float(np.dot(dens * table, col))


def _biased_transform_dense(table: np.ndarray, rv: np.ndarray) -> np.ndarray:
    """All biased coefficients of a dense table via per-coordinate butterflies.

    Output is indexed by subset mask in the same bit convention as
    assignments().  Used by the dense parseval path only, so that it stays
    independent of the junta change-of-basis route.
    """
    n = rv.size
    out = table.astype(np.float64).copy()
    sig = sigma_vector(rv)
    for b in range(n):
        shape = out.reshape(-1, 2, 1 << b)
        lo = shape[:, 0, :].copy()  # x_b = -1
        hi = shape[:, 1, :].copy()  # x_b = +1
        p_lo = (1.0 - rv[b]) / 2.0
        p_hi = (1.0 + rv[b]) / 2.0
        shape[:, 0, :] = p_lo * lo + p_hi * hi
        shape[:, 1, :] = p_lo * ((-1.0 - rv[b]) / sig[b]) * lo + p_hi * ((1.0 - rv[b]) / sig[b]) * hi
    return out


def parseval_sum(f: FunctionLike, r) -> float:
    """Sum of squared biased coefficients.

    Juntas use the exact-spectrum route (k <= 20); dense tables are fully
    transformed (n <= 14).  For a +/-1-valued function the sum is 1.
    """
    if isinstance(f, Junta):
        spec = biased_spectrum(f, r)
        return float(np.dot(spec, spec))
    table, n = _coerce_table(f)
    rv = as_bias_vector(r, n)
    spec = _biased_transform_dense(table, rv)
    return float(np.dot(spec.ravel(), spec.ravel()))


@lru_cache(maxsize=4096)
def expectation_polynomial(f: Junta) -> DyadicPolynomial:
    """E_r[f] as an exact polynomial in a uniform bias r: coefficient t is
    the level-t weight of the uniform spectrum."""
    nums = _relevant_numerators(f)
    denom = 1 << f.k
    coeffs = [Fraction(0)] * (f.k + 1)
    for mask, num in enumerate(nums):
        if num:
            coeffs[mask.bit_count()] += Fraction(num, denom)
    return DyadicPolynomial(tuple(coeffs))


def level_weight(f: Junta, s: int, r: float) -> float:
    """Total weight w_s(f, r) of level s under bias r, computed from the
    uniform level weights in O(k) terms."""
    if s < 0:
        raise InvalidParamsError(f"level must be nonnegative, got {s}")
    sig = sigma(r)
    poly = expectation_polynomial(f)
    total = 0.0
    for t in range(s, poly.degree + 1):
        w_t = float(poly.coeffs[t])
        if w_t:
            total += math.comb(t, s) * w_t * r ** (t - s)
    return sig**s * total


def level_weight_direct(f: Junta, s: int, r) -> float:
    """Level weight as a plain sum of biased coefficients over all subsets of
    size s, for cross-checking the polynomial route."""
    if s < 0:
        raise InvalidParamsError(f"level must be nonnegative, got {s}")
    if s > f.k:
        return 0.0
    spec = biased_spectrum(f, r)
    masks = np.arange(1 << f.k)
    sizes = np.array([m.bit_count() for m in range(1 << f.k)])
    return float(np.sum(spec[masks[sizes == s]]))


def relevant_subsets(f: Junta, max_size: int | None = None):
    """Sorted subsets of the relevant set, smallest first, lexicographic
    within a size."""
    top = f.k if max_size is None else min(max_size, f.k)
    for size in range(top + 1):
        yield from combinations(f.relevant, size)
