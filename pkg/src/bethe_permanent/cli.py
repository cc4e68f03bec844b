"""Command-line interface.

Results are written to stdout as JSON (``gen`` writes a matrix in the
requested format); logs and human-readable tables go to stderr.

Exit codes: 0 success, 1 usage error, 2 input or domain error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import asdict

from . import bench
from .bp import BPConfig, compute_beliefs, run_bp, estimate_permanent
from .errors import NumericError, PermanentError
from .exact import brute_force_permanent, determinant, ryser_permanent, scaled_diagonal
from .kernel import gram_psd_check, parse_point_sets
from .matrix import FORMATS, RngSpec, parse_matrix, random_uniform_matrix, serialize_matrix
from .sampler import sample_permanent

log = logging.getLogger("bethe_permanent")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _add_input(p):
    p.add_argument("--input", required=True, help="matrix file, or - for stdin")
    p.add_argument("--format", choices=FORMATS, default="dense-text")


def _add_bp(p):
    p.add_argument("--epsilon", type=float, default=0.5, help="dampening rate in (0, 1]")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=10000)
    p.add_argument("--init", choices=("uniform", "random"), default="uniform")
    p.add_argument("--energy", choices=("standard", "as_printed"), default="standard")
    zeros = p.add_mutually_exclusive_group()
    zeros.add_argument("--clamp", type=float, default=1e-12, metavar="TAU",
                       help="relative floor for zero entries (default 1e-12)")
    zeros.add_argument("--reject-zeros", action="store_true")


def _add_common(p, seed=True):
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-timing", action="store_true", help="omit timing fields")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bethe-permanent", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("approx", help="Bethe approximation of the permanent")
    _add_input(p)
    _add_bp(p)
    _add_common(p)
    p.add_argument("--emit-beliefs", action="store_true",
                   help="add the belief matrix and residual trace")

    p = sub.add_parser("exact", help="exact permanent")
    _add_input(p)
    p.add_argument("--method", choices=("ryser", "brute"), default="ryser")
    _add_common(p, seed=False)

    p = sub.add_parser("sample", help="naive Monte Carlo permanent estimate")
    _add_input(p)
    budget = p.add_mutually_exclusive_group()
    budget.add_argument("--samples", type=int)
    budget.add_argument("--budget-ms", type=float)
    _add_common(p)

    p = sub.add_parser("baseline", help="determinant or scaled diagonal")
    _add_input(p)
    p.add_argument("--method", choices=("det", "diag"), default="det")
    _add_common(p, seed=False)

    p = sub.add_parser("bench-accuracy", help="Kendall-distance accuracy study")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--samples", type=int,
                   help="fixed sampler budget instead of time matching")
    p.add_argument("--full-scale", action="store_true",
                   help="run n=5,8 with 1000 matrices and n=10 with 200")
    p.add_argument("--csv", help="write per-matrix rows to this file")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_bp(p)
    _add_common(p)

    p = sub.add_parser("bench-runtime", help="BP running time versus n")
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=50)
    p.add_argument("--step", type=int, default=5)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--csv", help="write per-n rows to this file")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="accepted for symmetry; runtime trials run serially")
    _add_bp(p)
    _add_common(p)

    p = sub.add_parser("kernel", help="permanent-kernel Gram matrix and PSD check")
    p.add_argument("--input", required=True, help='JSON {"sets": [...]} file, or -')
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--emit-gram", action="store_true")
    _add_bp(p)
    _add_common(p, seed=False)

    p = sub.add_parser("gen", help="random uniform matrix")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--lo", type=float, default=0.0)
    p.add_argument("--hi", type=float, default=50.0)
    p.add_argument("--format", choices=FORMATS, default="dense-text")
    p.add_argument("--seed", type=int, default=0)
    return parser


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _bp_config(args, keep_trace=False) -> BPConfig:
    return BPConfig(
        epsilon=args.epsilon,
        tol=args.tol,
        max_iterations=args.max_iters,
        init=args.init if hasattr(args, "init") else "uniform",
        seed=getattr(args, "seed", None),
        zero_policy="reject" if args.reject_zeros else "clamp",
        clamp=args.clamp,
        energy=args.energy,
        keep_trace=keep_trace,
    )


def _json_float(x):
    # JSON has no infinities; the log of zero is reported as null
    return x if math.isfinite(x) else None


def _with_linear(out: dict, log_value: float, sign: int = 1) -> dict:
    """Add log_estimate, plus the linear estimate when it fits a double."""
    out["log_estimate"] = _json_float(log_value)
    if sign == 0 or log_value == -math.inf:
        out["estimate"] = 0.0
    elif log_value < math.log(sys.float_info.max):
        out["estimate"] = sign * math.exp(log_value)
    return out


def _cmd_approx(args) -> dict:
    m = parse_matrix(_read(args.input), args.format)
    config = _bp_config(args, keep_trace=args.emit_beliefs)
    n = m.shape[0]
    if n == 1:
        res = estimate_permanent(m, config)
        beliefs = [[1.0]]
    else:
        state, res = run_bp(m, config)
        beliefs = compute_beliefs(m, state).belief_matrix.tolist()
    out = {"method": "bethe", "n": n, "converged": res.converged,
           "iterations": res.iterations, "residual": res.residual}
    _with_linear(out, res.log_estimate)
    if args.emit_beliefs:
        out["f_bethe"] = _json_float(res.f_bethe)
        out["beliefs"] = beliefs
        out["residual_trace"] = res.trace
    if not args.no_timing:
        out["bp_ms"] = 1e3 * res.bp_seconds
        out["bethe_ms"] = 1e3 * res.bethe_seconds
    out["config"] = asdict(config)
    return out


def _cmd_exact(args) -> dict:
    m = parse_matrix(_read(args.input), args.format)
    value = (ryser_permanent if args.method == "ryser" else brute_force_permanent)(m)
    out = {"method": args.method, "n": m.shape[0]}
    return _with_linear(out, value.log_magnitude, value.sign)


def _cmd_baseline(args) -> dict:
    m = parse_matrix(_read(args.input), args.format)
    value = (determinant if args.method == "det" else scaled_diagonal)(m)
    out = {"method": args.method, "n": m.shape[0], "sign": value.sign}
    return _with_linear(out, value.log_magnitude, value.sign)


def _cmd_sample(args) -> dict:
    m = parse_matrix(_read(args.input), args.format)
    rng = RngSpec(args.seed)
    if args.budget_ms is not None:
        res = sample_permanent(m, seconds=args.budget_ms / 1e3, rng=rng)
    else:
        res = sample_permanent(m, samples=args.samples or 100000, rng=rng)
    out = {"method": "sampling", "n": m.shape[0], "samples": res.samples}
    _with_linear(out, res.log_estimate)
    if not args.no_timing:
        out["elapsed_ms"] = 1e3 * res.elapsed
    return out


def _print_table(rows, cols):
    print("  ".join(f"{c:>12}" for c in cols), file=sys.stderr)
    for r in rows:
        print("  ".join(f"{r[c]:>12.6g}" if isinstance(r[c], float) else f"{r[c]:>12}"
                        for c in cols), file=sys.stderr)


def _cmd_bench_accuracy(args):
    config = _bp_config(args)
    plan = bench.FULL_SCALE if args.full_scale else ((args.n, args.count),)
    rng = RngSpec(args.seed)
    summaries, csv_parts = [], []
    for (n, count), spec in zip(plan, rng.spawn(len(plan)) if args.full_scale else [rng]):
        log.info("accuracy study n=%d count=%d", n, count)
        report = bench.run_accuracy_study(n, count, spec, config,
                                          sample_count=args.samples, jobs=args.jobs)
        summaries.append(report.summary())
        csv_parts.append(report.to_csv(timing=not args.no_timing))
    _print_table([dict(n=s["n"], **s["kendall"]) for s in summaries], ("n",) + bench.METHODS)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_parts[0] + "".join(p.split("\n", 1)[1] for p in csv_parts[1:]))
    return summaries if args.full_scale else summaries[0]


def _cmd_bench_runtime(args) -> dict:
    report = bench.run_runtime_study(args.n_min, args.n_max, args.trials,
                                     RngSpec(args.seed), _bp_config(args), step=args.step)
    _print_table(report.rows, ("n", "mean_seconds", "mean_iterations",
                               "convergence_rate", "iteration_seconds"))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    rows = report.rows
    if args.no_timing:
        rows = [{k: v for k, v in r.items() if "seconds" not in k} for r in rows]
    return {"rows": rows}


def _cmd_kernel(args) -> dict:
    sets = parse_point_sets(_read(args.input))
    report = gram_psd_check(sets, args.sigma, _bp_config(args))
    out = {"m": len(sets), "sigma": args.sigma, "min_eigenvalue": report.min_eigenvalue,
           "psd": report.psd, "log_scale": report.log_scale}
    if args.emit_gram:
        out["gram"] = report.gram.tolist()
    return out


def _cmd_gen(args):
    m = random_uniform_matrix(args.n, args.lo, args.hi, RngSpec(args.seed))
    sys.stdout.write(serialize_matrix(m, args.format).decode("ascii"))
    if args.format == "json":
        sys.stdout.write("\n")
    return None


COMMANDS = {
    "approx": _cmd_approx,
    "exact": _cmd_exact,
    "sample": _cmd_sample,
    "baseline": _cmd_baseline,
    "bench-accuracy": _cmd_bench_accuracy,
    "bench-runtime": _cmd_bench_runtime,
    "kernel": _cmd_kernel,
    "gen": _cmd_gen,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    try:
        out = COMMANDS[args.command](args)
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PermanentError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if out is not None:
        sys.stdout.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
