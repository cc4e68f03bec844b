"""Exact permanents and the two weak baselines (determinant, scaled diagonal).

All results are returned as :class:`LogValue` so that large permanents
(n = 30 with entries around 50 is roughly 1e83) stay representable and so
the determinant, which can be negative, shares the same carrier.
"""

from __future__ import annotations

import itertools
import math
from typing import NamedTuple

import numpy as np

from .errors import SizeError
from .matrix import as_square_matrix

BRUTE_FORCE_MAX_N = 12
RYSER_MAX_N = 30
_RYSER_BLOCK = 1 << 14
_PERM_CHUNK = 1 << 16


class LogValue(NamedTuple):
    """A real number stored as ``sign * exp(log_magnitude)``."""

    log_magnitude: float
    sign: int

    @classmethod
    def zero(cls) -> LogValue:
        return cls(-math.inf, 0)

    @classmethod
    def from_float(cls, x: float) -> LogValue:
        if x == 0:
            return cls.zero()
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    @property
    def value(self) -> float:
        """Linear value; may overflow to +-inf for huge magnitudes."""
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_magnitude)
        except OverflowError:
            return self.sign * math.inf

    def __float__(self) -> float:
        return self.value

    def sort_key(self) -> tuple[int, float]:
        """Key that orders LogValues by their signed linear value."""
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log_magnitude)


def _row_prescale(m: np.ndarray) -> tuple[np.ndarray, float] | None:
    """Divide each row by its maximum; None if some row is all zero."""
    row_max = m.max(axis=1)
    if np.any(row_max == 0):
        return None
    return m / row_max[:, None], float(np.sum(np.log(row_max)))


def _finish(total: float, log_scale: float) -> LogValue:
    if total <= 0:
        # nonnegative input, so anything <= 0 is an exact zero or rounding noise
        return LogValue.zero()
    return LogValue(math.log(total) + log_scale, 1)


def brute_force_permanent(m) -> LogValue:
    """Permanent by summing over all n! permutations."""
    m = as_square_matrix(m)
    n = m.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise SizeError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    scaled = _row_prescale(m)
    if scaled is None:
        return LogValue.zero()
    a, log_scale = scaled

    rows = np.arange(n)
    perms = itertools.permutations(range(n))
    total = 0.0
    while True:
        chunk = np.array(list(itertools.islice(perms, _PERM_CHUNK)), dtype=np.intp)
        if chunk.size == 0:
            break
        total += float(a[rows, chunk].prod(axis=1).sum())
    return _finish(total, log_scale)


def ryser_permanent(m) -> LogValue:
    """Ryser's inclusion-exclusion formula in the Nijenhuis-Wilf form.

    ``per(A) = (-1)^(n-1) * 2 * sum_S (-1)^|S| prod_i (x_i + sum_{j in S} a_ij)``
    over subsets S of the first n-1 columns, with
    ``x_i = a_{i,n-1} - sum_j a_ij / 2``.  Centering the row sums keeps the
    alternating terms about 2^n times smaller than in the plain formula.

    Subsets are visited in binary-reflected Gray code order, so each step
    adds or removes one column from the running row sums.  Steps are
    vectorized in blocks; the row sums are recomputed from scratch at the
    start of every block to stop rounding drift from accumulating.
    """
    m = as_square_matrix(m)
    n = m.shape[0]
    if n > RYSER_MAX_N:
        raise SizeError(f"Ryser limited to n <= {RYSER_MAX_N}, got {n}")
    scaled = _row_prescale(m)
    if scaled is None:
        return LogValue.zero()
    a, log_scale = scaled
    x = a[:, -1] - 0.5 * a.sum(axis=1)
    cols = a.T  # cols[j] is column j as a contiguous vector

    n_subsets = 1 << (n - 1)
    total = float(np.prod(x))  # empty subset
    for start in range(1, n_subsets, _RYSER_BLOCK):
        k = np.arange(start, min(start + _RYSER_BLOCK, n_subsets), dtype=np.int64)
        prev = int(start - 1) ^ (int(start - 1) >> 1)
        base = x + a[:, [j for j in range(n - 1) if prev >> j & 1]].sum(axis=1)

        gray = k ^ (k >> 1)
        flipped = np.log2(k & -k).astype(np.intp)
        added = (gray >> flipped) & 1
        delta = cols[flipped] * np.where(added == 1, 1.0, -1.0)[:, None]
        row_sums = base + np.cumsum(delta, axis=0)

        # consecutive Gray codes differ by one bit, so |S| parity tracks k
        signs = np.where(k & 1, -1.0, 1.0)
        total += float(np.dot(signs, row_sums.prod(axis=1)))

    total *= 2.0
    if n % 2 == 0:
        total = -total
    return _finish(total, log_scale)


def determinant(m) -> LogValue:
    """Determinant via LU with partial pivoting (LAPACK getrf)."""
    m = as_square_matrix(m)
    sign, logabs = np.linalg.slogdet(m)
    if sign == 0:
        return LogValue.zero()
    return LogValue(float(logabs), int(sign))


def scaled_diagonal(m) -> LogValue:
    """``n! * prod_i W_ii``, exact on constant matrices."""
    m = as_square_matrix(m)
    n = m.shape[0]
    diag = np.diag(m)
    if np.any(diag == 0):
        return LogValue.zero()
    return LogValue(math.lgamma(n + 1) + float(np.sum(np.log(diag))), 1)
