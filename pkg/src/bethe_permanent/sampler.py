"""Naive Monte Carlo permanent estimator over uniform random permutations."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError
from .matrix import RngLike, as_generator, as_square_matrix

# clock is polled once per batch in wall-time mode
TIME_BATCH = 256
COUNT_BATCH = 8192


@dataclass
class SampleEstimate:
    log_estimate: float
    samples: int
    elapsed: float
    # log estimate after each batch
    running_mean_trace: Optional[np.ndarray] = None

    @property
    def estimate(self) -> float:
        return math.exp(self.log_estimate) if self.log_estimate < 709 else math.inf


def _log_products(log_w: np.ndarray, perms: np.ndarray) -> np.ndarray:
    n = log_w.shape[0]
    return log_w[np.arange(n), perms].sum(axis=1)


def sample_permanent(m, samples: Optional[int] = None, seconds: Optional[float] = None,
                     rng: RngLike = None, trace: bool = False) -> SampleEstimate:
    """Estimate per(m) as ``n!/s`` times the sum of ``s`` random permutation products.

    Exactly one budget must be given: a sample count ``samples`` or a wall
    clock budget ``seconds``.  The time budget stops at the first batch
    boundary after it has elapsed, so at least one batch is always drawn.
    Products are accumulated in log space.
    """
    if (samples is None) == (seconds is None):
        raise DomainError("give exactly one of samples or seconds")
    if samples is not None and samples < 1:
        raise DomainError("samples must be positive")
    w = as_square_matrix(m)
    n = w.shape[0]
    gen = as_generator(rng)
    with np.errstate(divide="ignore"):
        log_w = np.log(w)
    log_nfact = math.lgamma(n + 1)

    batch = COUNT_BATCH if samples is not None else TIME_BATCH
    base = np.broadcast_to(np.arange(n), (batch, n))
    log_sum = -math.inf
    drawn = 0
    means = []

    start = time.perf_counter()
    while True:
        size = batch if samples is None else min(batch, samples - drawn)
        perms = gen.permuted(base[:size], axis=1)
        log_sum = float(np.logaddexp(log_sum, logsumexp(_log_products(log_w, perms))))
        drawn += size
        if trace:
            means.append(log_nfact + log_sum - math.log(drawn))
        if samples is not None:
            if drawn >= samples:
                break
        elif time.perf_counter() - start >= seconds:
            break
    elapsed = time.perf_counter() - start

    return SampleEstimate(
        log_estimate=log_nfact + log_sum - math.log(drawn),
        samples=drawn,
        elapsed=elapsed,
        running_mean_trace=np.array(means) if trace else None,
    )
