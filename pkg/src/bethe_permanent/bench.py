"""Accuracy and runtime studies on random uniform matrices.

The accuracy study ranks a batch of matrices by their exact permanent and by
each approximation and reports normalized Kendall distances between the
rankings.  The runtime study records wall time and iteration counts of BP as
n grows.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bp import BPConfig, estimate_permanent, run_bp
from .errors import DomainError, ShapeError, SizeError
from .exact import LogValue, determinant, ryser_permanent, scaled_diagonal
from .matrix import RngSpec, random_uniform_matrix
from .sampler import sample_permanent

METHODS = ("bethe", "sampling", "det", "diag")
ACCURACY_MAX_N = 12
CSV_COLUMNS = ("index", "n", "log_true", "log_bethe", "log_sample", "log_det",
               "log_diag", "bp_iters", "bp_ms", "sample_s", "det_sign")

# (n, count) pairs of the original accuracy experiment
FULL_SCALE = ((5, 1000), (8, 1000), (10, 200))


def count_inversions(seq) -> int:
    """Number of pairs i < j with seq[i] > seq[j], by merge sort."""
    seq = list(seq)

    def sort(lo, hi):
        if hi - lo <= 1:
            return 0
        mid = (lo + hi) // 2
        inv = sort(lo, mid) + sort(mid, hi)
        merged = []
        i, j = lo, mid
        while i < mid and j < hi:
            if seq[j] < seq[i]:
                merged.append(seq[j])
                inv += mid - i
                j += 1
            else:
                merged.append(seq[i])
                i += 1
        merged.extend(seq[i:mid])
        merged.extend(seq[j:hi])
        seq[lo:hi] = merged
        return inv

    return sort(0, len(seq))


def kendall_distance(r1, r2) -> float:
    """Fraction of item pairs ordered differently by two rankings.

    ``r1[i]`` and ``r2[i]`` are the positions of item i in each ranking.
    """
    r1, r2 = np.asarray(r1), np.asarray(r2)
    if r1.shape != r2.shape or r1.ndim != 1:
        raise ShapeError("rankings must be 1-d and of equal length")
    m = r1.size
    if m < 2:
        raise DomainError("need at least two items")
    discordant = count_inversions(r2[np.argsort(r1, kind="stable")].tolist())
    return discordant / (m * (m - 1) / 2)


def rank(values: Sequence) -> np.ndarray:
    """Ascending rank of each value; ties go to the lower index first.

    Accepts floats or :class:`LogValue` items (ordered by signed value).
    """
    idx = np.arange(len(values))
    if values and isinstance(values[0], LogValue):
        keys = np.array([v.sort_key() for v in values], dtype=np.float64)
        order = np.lexsort((idx, keys[:, 1], keys[:, 0]))
    else:
        order = np.lexsort((idx, np.asarray(values, dtype=np.float64)))
    ranks = np.empty(len(values), dtype=np.intp)
    ranks[order] = idx
    return ranks


@dataclass
class RankingReport:
    n: int
    count: int
    rows: list
    kendall: dict
    config: dict = field(default_factory=dict)

    def to_csv(self, timing: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            out = dict(row)
            if not timing:
                out["bp_ms"] = ""
            writer.writerow([_csv_cell(out[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"n": self.n, "count": self.count, "kendall": dict(self.kendall),
                "config": dict(self.config)}

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _csv_cell(x):
    if isinstance(x, float):
        return repr(x)
    return x


def _accuracy_item(args):
    index, n, spec, config, sample_count = args
    gen = spec.generator()
    w = random_uniform_matrix(n, 0.0, 50.0, gen)
    true = ryser_permanent(w)
    bethe = estimate_permanent(w, config)
    if sample_count is None:
        sample = sample_permanent(w, seconds=bethe.elapsed, rng=gen)
    else:
        sample = sample_permanent(w, samples=sample_count, rng=gen)
    det = determinant(w)
    diag = scaled_diagonal(w)
    return {
        "index": index,
        "n": n,
        "log_true": true.log_magnitude,
        "log_bethe": bethe.log_estimate,
        "log_sample": sample.log_estimate,
        "log_det": det.log_magnitude,
        "log_diag": diag.log_magnitude,
        "bp_iters": bethe.iterations,
        "bp_ms": 1e3 * bethe.elapsed,
        "sample_s": sample.samples,
        "det_sign": det.sign,
        "converged": bethe.converged,
        "_det": det,
    }


def _warm_up(config: BPConfig):
    # first call loads or compiles the JIT kernels; keep it out of timings
    estimate_permanent(np.full((3, 3), 1.0) + np.eye(3), config)


def run_accuracy_study(n: int, count: int, rng: RngSpec = RngSpec(),
                       config: BPConfig = BPConfig(),
                       sample_count: Optional[int] = None,
                       jobs: int = 1) -> RankingReport:
    """Rank ``count`` random U[0, 50] matrices by exact and approximate permanents.

    The sampler runs for the same wall time the Bethe estimate took (message
    passing plus free-energy evaluation) unless ``sample_count`` fixes the
    number of samples, which makes the report reproducible.
    """
    if n > ACCURACY_MAX_N:
        raise SizeError(f"accuracy study needs exact permanents; n <= {ACCURACY_MAX_N}")
    if n < 1 or count < 2:
        raise DomainError("need n >= 1 and count >= 2")
    _warm_up(config)
    items = [(i, n, spec, config, sample_count) for i, spec in enumerate(rng.spawn(count))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_accuracy_item, items, chunksize=max(1, count // (4 * jobs))))
    else:
        rows = [_accuracy_item(it) for it in items]

    true_rank = rank([r["log_true"] for r in rows])
    kendall = {
        "bethe": kendall_distance(true_rank, rank([r["log_bethe"] for r in rows])),
        "sampling": kendall_distance(true_rank, rank([r["log_sample"] for r in rows])),
        "det": kendall_distance(true_rank, rank([r.pop("_det") for r in rows])),
        "diag": kendall_distance(true_rank, rank([r["log_diag"] for r in rows])),
    }
    cfg = asdict(config)
    cfg.update(seed_root=rng.seed, rng=rng.algorithm,
               sampler="count" if sample_count is not None else "time-matched",
               sample_count=sample_count,
               bethe_converged=int(sum(r.pop("converged") for r in rows)))
    return RankingReport(n=n, count=count, rows=rows, kendall=kendall, config=cfg)


@dataclass
class RuntimeReport:
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = list(self.rows[0]) if self.rows else []
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow([_csv_cell(row[c]) for c in cols])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"rows": self.rows}, indent=2)

    def row(self, n: int) -> dict:
        for r in self.rows:
            if r["n"] == n:
                return r
        raise KeyError(n)


def run_runtime_study(n_min: int, n_max: int, trials_per_n: int,
                      rng: RngSpec = RngSpec(), config: BPConfig = BPConfig(),
                      step: int = 1, sizes: Optional[Sequence[int]] = None) -> RuntimeReport:
    """Mean time and iterations to convergence for each n.

    Message passing and Bethe evaluation are timed separately;
    ``iteration_seconds`` is the mean of per-run ``bp_seconds / iterations``.
    """
    if sizes is None:
        if n_min < 2:
            raise DomainError("n_min must be at least 2")
        sizes = range(n_min, n_max + 1, step)
    sizes = sorted(set(int(s) for s in sizes))
    if sizes and sizes[0] < 2:
        raise DomainError("sizes must be at least 2")
    _warm_up(config)
    rows = []
    for n, spec in zip(sizes, rng.spawn(len(sizes))):
        gen = spec.generator()
        iters, bp_t, bethe_t, per_iter, conv = [], [], [], [], 0
        for _ in range(trials_per_n):
            w = random_uniform_matrix(n, 0.0, 50.0, gen)
            _, res = run_bp(w, config)
            iters.append(res.iterations)
            bp_t.append(res.bp_seconds)
            bethe_t.append(res.bethe_seconds)
            per_iter.append(res.bp_seconds / max(res.iterations, 1))
            conv += res.converged
        rows.append({
            "n": n,
            "mean_seconds": float(np.mean(bp_t) + np.mean(bethe_t)),
            "mean_iterations": float(np.mean(iters)),
            "convergence_rate": conv / trials_per_n,
            "mean_bp_seconds": float(np.mean(bp_t)),
            "mean_bethe_seconds": float(np.mean(bethe_t)),
            "iteration_seconds": float(np.mean(per_iter)),
        })
    return RuntimeReport(rows)
