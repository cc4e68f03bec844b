"""Belief propagation on the bipartite matching model and the Bethe permanent.

The model has one variable ``x_i`` per row and one ``y_j`` per column of
``W``; ``x_i = j`` says row i is matched to column j.  Unary potentials are
``sqrt(W_ij)`` on both sides and every (x_i, y_j) pair carries a hard
consistency factor, so the partition function is exactly ``per(W)``.

Messages are kept in reduced form: each full message vector takes only two
distinct values (matched / not matched), and after dividing by the
not-matched value a single positive ratio per directed edge remains.
``log_mx[i, j]`` is the ratio sent from ``x_i`` to ``y_j`` and
``log_my[j, i]`` the ratio sent from ``y_j`` to ``x_i``; both are stored as
natural logs.  One synchronous sweep costs O(n^2); evaluating the Bethe
free energy costs O(n^3).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from numba import njit
from scipy.special import logsumexp

from .errors import DomainError, NumericError
from .matrix import as_square_matrix

# relative cancellation threshold for S - e_j (8 decimal digits)
_CANCEL = 1e-8


@dataclass(frozen=True)
class BPConfig:
    """Settings for a BP run.

    ``zero_policy`` is ``"clamp"`` (entries below ``clamp * max(W)`` are
    raised to that floor) or ``"reject"`` (any zero entry is an error).
    ``energy`` selects the Bethe functional: ``"standard"`` divides the
    singleton beliefs by their unary potentials inside the entropy
    correction, ``"as_printed"`` omits that division.
    """

    epsilon: float = 0.5
    tol: float = 1e-10
    max_iterations: int = 10000
    init: str = "uniform"
    seed: Optional[int] = None
    zero_policy: str = "clamp"
    clamp: float = 1e-12
    energy: str = "standard"
    keep_trace: bool = False

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise DomainError("epsilon must lie in (0, 1]")
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be positive")
        if self.init not in ("uniform", "random"):
            raise DomainError(f"unknown init {self.init!r}")
        if self.zero_policy not in ("clamp", "reject"):
            raise DomainError(f"unknown zero_policy {self.zero_policy!r}")
        if not self.clamp > 0:
            raise DomainError("clamp must be positive")
        if self.energy not in ("standard", "as_printed"):
            raise DomainError(f"unknown energy form {self.energy!r}")


@dataclass(frozen=True)
class MessageState:
    """Reduced log-domain messages plus the weight floor they were built with."""

    log_mx: np.ndarray
    log_my: np.ndarray
    floor: float = 0.0

    @property
    def mx(self) -> np.ndarray:
        return np.exp(self.log_mx)

    @property
    def my(self) -> np.ndarray:
        return np.exp(self.log_my)


@dataclass
class BeliefState:
    """Singleton beliefs implied by a message state.

    ``belief_matrix[i, j] = b(x_i = j)`` (rows sum to one by construction).
    ``column_beliefs[i, j] = b(y_j = i)`` (columns sum to one by
    construction).  At a fixed point the two coincide.
    """

    belief_matrix: np.ndarray
    column_beliefs: np.ndarray
    log_z_x: np.ndarray
    log_z_y: np.ndarray
    _log_w: np.ndarray = field(repr=False)
    _log_mx: np.ndarray = field(repr=False)
    _log_my: np.ndarray = field(repr=False)

    def pair_log_normalizer(self, i: int, j: int) -> float:
        """log Z_ij of the pairwise belief table b(x_i, y_j)."""
        hw = 0.5 * self._log_w
        u = np.delete(hw[i] + self._log_my[:, i], j)
        v = np.delete(hw[:, j] + self._log_mx[:, j], i)
        return float(np.logaddexp(self._log_w[i, j], logsumexp(u) + logsumexp(v)))


@dataclass
class BetheResult:
    f_bethe: float
    log_estimate: float
    iterations: int
    converged: bool
    residual: float
    bp_seconds: float = 0.0
    bethe_seconds: float = 0.0
    trace: Optional[list] = None

    @property
    def elapsed(self) -> float:
        return self.bp_seconds + self.bethe_seconds


class SinkhornResult(NamedTuple):
    matrix: np.ndarray
    iterations: int
    converged: bool


def _log_weights(m, config: BPConfig) -> tuple[np.ndarray, float]:
    """Apply the zero-entry policy and return (log W, floor)."""
    w = as_square_matrix(m)
    if config.zero_policy == "reject":
        if np.any(w == 0):
            raise DomainError("matrix has zero entries and zero_policy is 'reject'")
        floor = 0.0
    else:
        top = float(w.max())
        if top == 0:
            raise DomainError("matrix is identically zero")
        floor = config.clamp * top
        w = np.maximum(w, floor)
    return np.log(w), floor


def _log_weights_from_state(m, s: MessageState) -> np.ndarray:
    w = as_square_matrix(m)
    if s.floor > 0:
        w = np.maximum(w, s.floor)
    elif np.any(w == 0):
        raise DomainError("matrix has zero entries but the state carries no floor")
    return np.log(w)


@njit(cache=True)
def _exclusive_logsumexp_rows(a, out):
    """out[i, j] = log sum_{k != j} exp(a[i, k]).

    The row sum is computed once and the j-th term subtracted; where that
    subtraction would lose more than 8 digits the sum is redone directly.
    """
    n = a.shape[0]
    e = np.empty(n)
    for i in range(n):
        amax = -np.inf
        for k in range(n):
            if a[i, k] > amax:
                amax = a[i, k]
        s = 0.0
        for k in range(n):
            e[k] = math.exp(a[i, k] - amax)
            s += e[k]
        for j in range(n):
            d = s - e[j]
            if d > _CANCEL * s:
                out[i, j] = amax + math.log(d)
                continue
            m2 = -np.inf
            for k in range(n):
                if k != j and a[i, k] > m2:
                    m2 = a[i, k]
            if m2 == -np.inf:
                out[i, j] = -np.inf
                continue
            d2 = 0.0
            for k in range(n):
                if k != j:
                    d2 += math.exp(a[i, k] - m2)
            out[i, j] = m2 + math.log(d2)


@njit(cache=True)
def _sweep(hw, log_mx, log_my, eps, ax, ay, ex, ey):
    """One synchronous dampened sweep, in place.  Returns the residual.

    ax[i, k] = log(phi(x_i = k) * my[k, i]);  ay[j, l] = log(phi(y_j = l) * mx[l, j]).
    """
    n = hw.shape[0]
    for i in range(n):
        for k in range(n):
            ax[i, k] = hw[i, k] + log_my[k, i]
            ay[i, k] = hw[k, i] + log_mx[k, i]
    _exclusive_logsumexp_rows(ax, ex)
    _exclusive_logsumexp_rows(ay, ey)
    residual = 0.0
    for i in range(n):
        for j in range(n):
            dx = eps * (hw[i, j] - ex[i, j] - log_mx[i, j])
            dy = eps * (hw[j, i] - ey[i, j] - log_my[i, j])
            log_mx[i, j] += dx
            log_my[i, j] += dy
            residual += abs(dx) + abs(dy)
    return residual


@njit(cache=True)
def _pair_terms(hw, log_w, log_mx, log_my):
    """Per-pair log Z_ij and the unmatched-mass-weighted log-message averages.

    Returns (log_z, weighted) where the pairwise part of the free energy for
    (i, j) is ``weighted[i, j] - log_z[i, j]``.
    """
    n = hw.shape[0]
    log_z = np.empty((n, n))
    weighted = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            # row side: u_k = phi(x_i=k) my[k,i], k != j
            umax = -np.inf
            for k in range(n):
                if k != j and hw[i, k] + log_my[k, i] > umax:
                    umax = hw[i, k] + log_my[k, i]
            su = 0.0
            tu = 0.0
            for k in range(n):
                if k != j:
                    e = math.exp(hw[i, k] + log_my[k, i] - umax)
                    su += e
                    tu += e * log_my[k, i]
            # column side: v_l = phi(y_j=l) mx[l,j], l != i
            vmax = -np.inf
            for l in range(n):
                if l != i and hw[l, j] + log_mx[l, j] > vmax:
                    vmax = hw[l, j] + log_mx[l, j]
            sv = 0.0
            tv = 0.0
            for l in range(n):
                if l != i:
                    e = math.exp(hw[l, j] + log_mx[l, j] - vmax)
                    sv += e
                    tv += e * log_mx[l, j]
            if su == 0.0:
                # n == 1: only the matched state exists
                log_z[i, j] = log_w[i, j]
                weighted[i, j] = 0.0
                continue
            log_uv = umax + math.log(su) + vmax + math.log(sv)
            hi = max(log_w[i, j], log_uv)
            lz = hi + math.log(math.exp(log_w[i, j] - hi) + math.exp(log_uv - hi))
            log_z[i, j] = lz
            weighted[i, j] = math.exp(log_uv - lz) * (tu / su + tv / sv)
    return log_z, weighted


def init_messages(m, config: BPConfig = BPConfig()) -> MessageState:
    """Starting messages: all ones, or log-uniform on [-1, 1] from ``config.seed``."""
    log_w, floor = _log_weights(m, config)
    n = log_w.shape[0]
    if config.init == "uniform":
        return MessageState(np.zeros((n, n)), np.zeros((n, n)), floor)
    rng = np.random.default_rng(config.seed)
    return MessageState(rng.uniform(-1, 1, (n, n)), rng.uniform(-1, 1, (n, n)), floor)


def update_messages(m, s: MessageState,
                    config: BPConfig = BPConfig()) -> tuple[MessageState, float]:
    """One synchronous sweep of the reduced update with log-space dampening.

    Each new ratio is ``phi(x_i=j) / sum_{k != j} phi(x_i=k) my[k, i]`` (and
    symmetrically for the column side), all computed from the old state.
    """
    log_w = _log_weights_from_state(m, s)
    n = log_w.shape[0]
    if n < 2:
        raise NumericError("message update is undefined for n = 1")
    hw = 0.5 * log_w
    log_mx = np.array(s.log_mx, dtype=np.float64)
    log_my = np.array(s.log_my, dtype=np.float64)
    work = [np.empty((n, n)) for _ in range(4)]
    residual = _sweep(hw, log_mx, log_my, config.epsilon, *work)
    if not math.isfinite(residual):
        raise NumericError("non-finite message after update")
    return MessageState(log_mx, log_my, s.floor), residual


def compute_beliefs(m, s: MessageState) -> BeliefState:
    log_w = _log_weights_from_state(m, s)
    hw = 0.5 * log_w
    log_bx = hw + s.log_my.T
    log_by = hw + s.log_mx
    log_z_x = logsumexp(log_bx, axis=1)
    log_z_y = logsumexp(log_by, axis=0)
    if not (np.all(np.isfinite(log_z_x)) and np.all(np.isfinite(log_z_y))):
        raise NumericError("singleton normalizer is zero or non-finite")
    return BeliefState(
        belief_matrix=np.exp(log_bx - log_z_x[:, None]),
        column_beliefs=np.exp(log_by - log_z_y[None, :]),
        log_z_x=log_z_x,
        log_z_y=log_z_y,
        _log_w=log_w,
        _log_mx=s.log_mx,
        _log_my=s.log_my,
    )


def extract_belief_matrix(b: BeliefState) -> np.ndarray:
    return b.belief_matrix


def bethe_free_energy(m, s: MessageState, energy: str = "standard") -> float:
    """Bethe free energy of the beliefs induced by ``s``.

    Pairwise tables are never built; each pair contributes
    ``(1 - W_ij/Z_ij) * (<log my>_u + <log mx>_v) - log Z_ij`` where the
    averages run over the unmatched states.  With ``energy="standard"`` the
    singleton correction is ``-(n-1) sum b log(b/phi)``; ``"as_printed"``
    uses ``-(n-1) sum b log b``.
    """
    if energy not in ("standard", "as_printed"):
        raise DomainError(f"unknown energy form {energy!r}")
    log_w = _log_weights_from_state(m, s)
    n = log_w.shape[0]
    hw = 0.5 * log_w
    log_z, weighted = _pair_terms(hw, log_w, np.ascontiguousarray(s.log_mx),
                                  np.ascontiguousarray(s.log_my))
    f = float(np.sum(weighted - log_z))

    if n > 1:
        b = compute_beliefs(m, s)
        bx, by = b.belief_matrix, b.column_beliefs
        with np.errstate(divide="ignore", invalid="ignore"):
            hx = np.where(bx > 0, bx * np.log(bx), 0.0)
            hy = np.where(by > 0, by * np.log(by), 0.0)
        single = float(np.sum(hx) + np.sum(hy))
        if energy == "standard":
            single -= float(np.sum((bx + by) * hw))
        f -= (n - 1) * single

    if not math.isfinite(f):
        raise NumericError("non-finite Bethe free energy")
    return f


def run_bp(m, config: BPConfig = BPConfig()) -> tuple[MessageState, BetheResult]:
    """Iterate sweeps until the summed |change| of log-messages is <= tol.

    Not converging within ``max_iterations`` is reported in the result, not
    raised.
    """
    state = init_messages(m, config)
    log_w = _log_weights_from_state(m, state)
    n = log_w.shape[0]
    trace = [] if config.keep_trace else None

    t0 = time.perf_counter()
    iterations = 0
    residual = 0.0
    if n > 1:
        hw = 0.5 * log_w
        log_mx = state.log_mx.copy()
        log_my = state.log_my.copy()
        work = [np.empty((n, n)) for _ in range(4)]
        residual = math.inf
        while iterations < config.max_iterations:
            residual = _sweep(hw, log_mx, log_my, config.epsilon, *work)
            iterations += 1
            if trace is not None:
                trace.append(residual)
            if not math.isfinite(residual):
                raise NumericError(f"non-finite message at iteration {iterations}")
            if residual <= config.tol:
                break
        state = MessageState(log_mx, log_my, state.floor)
    bp_seconds = time.perf_counter() - t0

    t1 = time.perf_counter()
    f = bethe_free_energy(m, state, config.energy)
    bethe_seconds = time.perf_counter() - t1

    result = BetheResult(
        f_bethe=f,
        log_estimate=-f,
        iterations=iterations,
        converged=residual <= config.tol,
        residual=residual,
        bp_seconds=bp_seconds,
        bethe_seconds=bethe_seconds,
        trace=trace,
    )
    return state, result


def estimate_permanent(m, config: BPConfig = BPConfig()) -> BetheResult:
    """log of the Bethe approximation to per(m), i.e. ``-min F_Bethe``."""
    w = as_square_matrix(m)
    if w.shape[0] == 1:
        if w[0, 0] == 0 and config.zero_policy == "reject":
            raise DomainError("matrix has zero entries and zero_policy is 'reject'")
        with np.errstate(divide="ignore"):
            log_w = float(np.log(w[0, 0]))
        return BetheResult(f_bethe=-log_w, log_estimate=log_w, iterations=0,
                           converged=True, residual=0.0,
                           trace=[] if config.keep_trace else None)
    return run_bp(w, config)[1]


def sinkhorn_scale(m, tol: float = 1e-10, max_iter: int = 10000) -> SinkhornResult:
    """Alternate row and column normalization toward a doubly stochastic matrix."""
    a = as_square_matrix(m)
    if np.any(a.sum(axis=1) == 0) or np.any(a.sum(axis=0) == 0):
        raise DomainError("matrix has an all-zero row or column")

    def deviation(x):
        return max(np.max(np.abs(x.sum(axis=1) - 1)), np.max(np.abs(x.sum(axis=0) - 1)))

    if deviation(a) <= tol:
        return SinkhornResult(a, 0, True)
    for it in range(1, max_iter + 1):
        a = a / a.sum(axis=1, keepdims=True)
        a = a / a.sum(axis=0, keepdims=True)
        if deviation(a) <= tol:
            return SinkhornResult(a, it, True)
    return SinkhornResult(a, max_iter, False)
