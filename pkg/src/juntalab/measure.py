"""Biased product measures on the signed cube and their orthonormal basis.

A bias vector r in (-1,1)^n defines the product measure giving each
coordinate mean r_i, i.e. P(x_i = +1) = (1 + r_i) / 2.  The standardized
characters chi_S(x, r) = prod_{i in S} (x_i - r_i) / sigma_i form an
orthonormal family under it, with sigma_i = sqrt(1 - r_i^2).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, LengthMismatchError

__all__ = [
    "as_bias_vector",
    "chi",
    "density",
    "sample",
    "sample_batch",
    "sigma",
    "sigma_vector",
]


def sigma(r: float) -> float:
    """Standard deviation of one +/-1 coordinate with mean r.

    Computed as sqrt((1 - r)(1 + r)) so precision near |r| = 1 degrades
    gracefully.
    """
    r = float(r)
    if not -1.0 < r < 1.0:
        raise DomainError(f"bias must lie in (-1, 1), got {r}")
    return math.sqrt((1.0 - r) * (1.0 + r))


def as_bias_vector(r, n: int) -> np.ndarray:
    """Coerce a scalar or length-n sequence into a validated bias vector."""
    arr = np.asarray(r, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise LengthMismatchError(f"bias vector has shape {arr.shape}, expected ({n},)")
    if not np.all((arr > -1.0) & (arr < 1.0)):
        raise DomainError("all biases must lie in (-1, 1)")
    return arr


def sigma_vector(rv: np.ndarray) -> np.ndarray:
    rv = np.asarray(rv, dtype=np.float64)
    if not np.all((rv > -1.0) & (rv < 1.0)):
        raise DomainError("all biases must lie in (-1, 1)")
    return np.sqrt((1.0 - rv) * (1.0 + rv))


def density(rv, x: Sequence[int]) -> float:
    """Probability mass of the assignment x under the r-biased measure."""
    x = np.asarray(x, dtype=np.float64)
    rv = as_bias_vector(rv, len(x))
    return float(np.prod((1.0 + rv * x) / 2.0))


def sample(rv, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """One assignment drawn from the r-biased measure.

    Consumes exactly one uniform stream draw per coordinate, in index order,
    so a fixed generator state yields a reproducible assignment.
    """
    if n is None:
        n = len(np.atleast_1d(np.asarray(rv, dtype=np.float64)))
    rv = as_bias_vector(rv, n)
    u = rng.random(n)
    return np.where(u < (1.0 + rv) / 2.0, 1, -1).astype(np.int8)


def sample_batch(rv, rng: np.random.Generator, m: int, n: int | None = None) -> np.ndarray:
    """(m, n) assignments, rows independent, same per-coordinate stream order
    as repeated sample() calls."""
    if n is None:
        n = len(np.atleast_1d(np.asarray(rv, dtype=np.float64)))
    rv = as_bias_vector(rv, n)
    p = (1.0 + rv) / 2.0
    out = np.empty((m, n), dtype=np.int8)
    # chunked so a large request never materializes m*n float64 at once
    chunk = 65536
    start = 0
    while start < m:
        stop = min(start + chunk, m)
        u = rng.random((stop - start, n))
        out[start:stop] = np.where(u < p, 1, -1)
        start = stop
    return out


def chi(S: Iterable[int], x: Sequence[int], rv) -> float:
    """Standardized character chi_S(x, r); the empty set gives 1."""
    rv = as_bias_vector(rv, len(x))
    out = 1.0
    for i in S:
        i = int(i)
        out *= (float(x[i]) - rv[i]) / math.sqrt((1.0 - rv[i]) * (1.0 + rv[i]))
    return float(out)
