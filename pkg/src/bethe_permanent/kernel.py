"""Permanent kernels between equal-size point sets.

The kernel value between two sets is the (Bethe-approximated) permanent of
their RBF subkernel matrix, which makes it invariant to the order of the
points inside each set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .bp import BPConfig, estimate_permanent
from .errors import DomainError, ParseError, ShapeError


@dataclass
class GramReport:
    gram: np.ndarray
    min_eigenvalue: float
    psd: bool
    jitter_used: float = 0.0
    # gram = exp(log_gram - log_scale); log_scale is the largest log kernel value
    log_scale: float = 0.0


def as_point_set(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ShapeError(f"a point set must be an (n, d) array with n >= 1, got {arr.shape}")
    return arr


def rbf_subkernel_matrix(a, b, sigma: float) -> np.ndarray:
    """K[i, j] = exp(-|a_i - b_j|^2 / (2 sigma^2))."""
    a, b = as_point_set(a), as_point_set(b)
    if sigma <= 0:
        raise DomainError("sigma must be positive")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    if a.shape[0] != b.shape[0]:
        raise ShapeError(f"set sizes differ: {a.shape[0]} vs {b.shape[0]}")
    sq = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    return np.exp(-sq / (2.0 * sigma**2))


def permanent_kernel(a, b, sigma: float, config: BPConfig = BPConfig()) -> float:
    """Log of the Bethe permanent of the RBF subkernel matrix."""
    return estimate_permanent(rbf_subkernel_matrix(a, b, sigma), config).log_estimate


def jacobi_eigenvalues(a, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending."""
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError("expected a square matrix")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)

    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # A <- J^T A J with the rotation acting on rows/cols p and q
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
    return np.sort(np.diag(a))


def gram_psd_check(sets: Sequence, sigma: float, config: BPConfig = BPConfig()) -> GramReport:
    """Gram matrix of pairwise permanent kernels and its PSD status.

    Kernel values are exponentiated after subtracting the largest log
    value; a positive rescaling does not change the PSD verdict.  PSD is
    declared when the smallest eigenvalue is at least ``-1e-8 * trace / m``.
    """
    sets = [as_point_set(s) for s in sets]
    if not sets:
        raise ShapeError("need at least one point set")
    shape = sets[0].shape
    for s in sets:
        if s.shape != shape:
            raise ShapeError(f"point sets must share shape; got {s.shape} and {shape}")
    m = len(sets)

    log_gram = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            log_gram[i, j] = permanent_kernel(sets[i], sets[j], sigma, config)
            if j != i:
                log_gram[j, i] = permanent_kernel(sets[j], sets[i], sigma, config)

    log_scale = float(np.max(log_gram))
    gram = np.exp(log_gram - log_scale)
    gram = 0.5 * (gram + gram.T)
    min_eig = float(jacobi_eigenvalues(gram)[0])
    psd = min_eig >= -1e-8 * float(np.trace(gram)) / m
    return GramReport(gram=gram, min_eigenvalue=min_eig, psd=psd, log_scale=log_scale)


def normalize_unit_box(points) -> np.ndarray:
    """Affinely map each feature column onto [0, 1]; constant columns become 0."""
    x = np.asarray(points, dtype=np.float64)
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    span = np.where(span > 0, span, 1.0)
    return (x - lo) / span


def parse_point_sets(text: Union[bytes, str]) -> list[np.ndarray]:
    """Read ``{"sets": [[[x, ...], ...], ...]}``."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("sets"), list):
        raise ParseError('expected an object with a "sets" list')
    try:
        return [as_point_set(s) for s in obj["sets"]]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"malformed point set: {exc}") from exc


def serialize_point_sets(sets) -> str:
    return json.dumps({"sets": [as_point_set(s).tolist() for s in sets]})
