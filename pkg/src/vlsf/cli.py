"""Command-line front end: tail curves, decoding-time optimization, rate curves.

Subcommands
-----------
tail      tail-probability curve of the cumulative information density at a
          fixed threshold, with per-branch model values and a seeded Monte
          Carlo reference
sdo       optimized decoding times for one or more m at fixed (k, eps),
          with optional --delta/--gamma override of the threshold search
curve     rate vs average-blocklength dataset over a k-range, with the
          closed-form baselines as extra rows
bec-rlfc  the fountain-coding variant of curve for the BEC
check     the acceptance/verification suite (exit 0 iff everything passes)

Output is CSV (default) or JSON lines (--jsonl), written to --out or
stdout.  Rows are emitted in sorted (source, k, m) order and depend only
on the flags and --seed, so reruns are byte-identical.  Infeasible (k, m)
pairs keep their row with empty numeric fields.

Exit codes: 0 ok, 1 failed checks, 2 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

from . import bounds as bnd
from . import montecarlo as mc
from .channels import (
    Bec,
    BiAwgn,
    Bsc,
    Channel,
    make_tail_model,
    channel_stats,
    tail_exact_bec,
    tail_exact_bsc,
)
from .errors import InfeasibleError
from .sdo import solve_at_delta, solve_at_gamma, two_step_minimize

# bump when a column list changes; downstream plot scripts key on names only
CSV_SCHEMA_VERSION = 1

CURVE_COLUMNS = [
    "source", "channel", "param", "k", "m", "eps",
    "delta_star", "gamma_star", "n_times", "N_star", "rate",
]

TAIL_COLUMNS = [
    "n", "model_tail", "petrov_tail", "edgeworth_tail", "exact_tail",
    "mc_tail", "mc_stderr", "n_star",
]


def parse_channel(spec: str) -> Channel:
    """Parse 'biawgn:SNRdB' | 'bsc:p' | 'bec:p'."""
    kind, _, value = spec.partition(":")
    if not value:
        raise ValueError(f"channel spec {spec!r} needs a parameter, e.g. bsc:0.11")
    x = float(value)
    if kind == "biawgn":
        return BiAwgn.from_db(x)
    if kind == "bsc":
        return Bsc(x)
    if kind == "bec":
        return Bec(x)
    raise ValueError(f"unknown channel kind {kind!r}")


def channel_fields(ch: Channel) -> tuple[str, float]:
    if isinstance(ch, BiAwgn):
        return "biawgn", 10.0 * math.log10(ch.snr)
    if isinstance(ch, Bsc):
        return "bsc", ch.p
    return "bec", ch.p


def parse_range(spec: str) -> list[int]:
    """'lo:hi' or 'lo:hi:step' as an inclusive integer range."""
    parts = spec.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"range {spec!r} must be lo:hi or lo:hi:step")
    lo, hi = int(parts[0]), int(parts[1])
    step = int(parts[2]) if len(parts) == 3 else 1
    if step < 1 or hi < lo:
        raise ValueError(f"bad range {spec!r}")
    return list(range(lo, hi + 1, step))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def write_rows(rows: list[dict], columns: list[str], out_path: str | None,
               jsonl: bool) -> None:
    if jsonl:
        text = "\n".join(json.dumps({c: row.get(c) for c in columns}) for row in rows)
        text += "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_tail(args) -> int:
    ch = parse_channel(args.channel)
    gamma = args.gamma
    ns = parse_range(args.n_range)
    model = make_tail_model(ch, gamma)
    estimates = mc.simulate_info_density_curve(
        ch, gamma, ns, mc.SimConfig(args.trials, args.seed))
    rows = []
    for n, est in zip(ns, estimates):
        row = {
            "n": n,
            "mc_tail": est.p_hat,
            "mc_stderr": est.stderr,
            "model_tail": None,
            "petrov_tail": None,
            "edgeworth_tail": None,
            "exact_tail": None,
            "n_star": None,
        }
        if isinstance(ch, BiAwgn):
            row["model_tail"] = model.F(float(n))
            row["edgeworth_tail"] = model._edgeworth_tail(float(n))
            if n <= gamma / model.capacity:
                row["petrov_tail"] = math.exp(model._petrov_log(float(n)))
            row["n_star"] = model.n_star
        elif isinstance(ch, Bsc):
            row["model_tail"] = row["exact_tail"] = tail_exact_bsc(n, gamma, ch.p)
        else:
            row["exact_tail"] = tail_exact_bec(n, gamma, ch.p)
            row["model_tail"] = model.F(n) if model.mode == "discrete" else model.F(float(n))
            smooth = make_tail_model(ch, gamma, bec_threshold=0.0)
            row["edgeworth_tail"] = smooth.F(float(n))
        rows.append(row)
    write_rows(rows, TAIL_COLUMNS, args.out, args.jsonl)
    return 0


def _solution_row(ch: Channel, k: int, m: int, eps: float, source: str,
                  sol=None, delta=None, bound=None) -> dict:
    kind, param = channel_fields(ch)
    row = {
        "source": source, "channel": kind, "param": param,
        "k": k, "m": m, "eps": eps,
        "delta_star": None, "gamma_star": None, "n_times": None,
        "N_star": None, "rate": None,
    }
    if sol is not None:
        row.update({
            "delta_star": delta,
            "gamma_star": sol.gamma,
            "n_times": ";".join(format(t, ".6g") for t in sol.times),
            "N_star": sol.objective,
            "rate": k / sol.objective,
        })
    elif bound is not None:
        row.update({"N_star": bound, "rate": k / bound})
    return row


def _optimize_point(task) -> dict:
    ch, k, m, eps, delta, gamma = task
    try:
        if gamma is not None:
            sol = solve_at_gamma(ch, m, k, eps, gamma)
            dstar = sol.delta
        elif delta is not None:
            sol = solve_at_delta(ch, m, k, eps, delta)
            dstar = delta
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                sol, dstar = two_step_minimize(ch, m, k, eps)
    except InfeasibleError:
        return _solution_row(ch, k, m, eps, "sdo")
    return _solution_row(ch, k, m, eps, "sdo", sol=sol, delta=dstar)


def _strlfc_point(task) -> dict:
    ch, k, m, eps = task
    try:
        sol = bnd.st_rlfc_sdo(k, ch.p, m, eps)
    except InfeasibleError:
        return _solution_row(ch, k, m, eps, "strlfc-sdo")
    return _solution_row(ch, k, m, eps, "strlfc-sdo", sol=sol)


def _grid_map(worker, tasks, jobs: int) -> list[dict]:
    """Evaluate independent grid points, in parallel when asked.

    Rows only depend on their own task, so the merge is a plain ordered
    collect and the output is identical for any worker count.
    """
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    from multiprocessing import get_context

    with get_context("spawn").Pool(processes=jobs) as pool:
        return list(pool.map(worker, tasks, chunksize=1))


def _optimize_rows(ch: Channel, ks, ms, eps: float, delta, gamma, jobs: int = 1) -> list[dict]:
    tasks = [(ch, k, m, eps, delta, gamma) for k in ks for m in ms]
    return _grid_map(_optimize_point, tasks, jobs)


def _strlfc_rows(ch: Bec, ks, ms, eps: float, jobs: int = 1) -> list[dict]:
    tasks = [(ch, k, m, eps) for k in ks for m in ms]
    return _grid_map(_strlfc_point, tasks, jobs)


def _baseline_rows(ch: Channel, ks, eps: float) -> list[dict]:
    stats = channel_stats(ch)
    rows = []
    for k in ks:
        rows.append(_solution_row(ch, k, 0, eps, "polyanskiy",
                                  bound=bnd.polyanskiy_bound(k, eps, stats)))
        if isinstance(ch, Bec):
            rows.append(_solution_row(ch, k, 0, eps, "devassy",
                                      bound=bnd.devassy_bound(k, ch.p)))
            zero = bnd.st_rlfc_zero_error_bound(k, ch.p)
            rows.append(_solution_row(ch, k, 0, eps, "strlfc-zero-error",
                                      bound=bnd.apply_stop_at_zero(zero, eps)))
    return rows


def _sorted_rows(rows: list[dict]) -> list[dict]:
    return sorted(rows, key=lambda r: (r["source"], r["k"], r["m"]))


def cmd_sdo(args) -> int:
    ch = parse_channel(args.channel)
    rows = _optimize_rows(ch, [args.k], sorted(set(args.m)), args.eps,
                          args.delta, args.gamma)
    write_rows(_sorted_rows(rows), CURVE_COLUMNS, args.out, args.jsonl)
    return 0


def _k_list(args) -> list[int]:
    if args.k_range:
        return parse_range(args.k_range)
    if args.k is None:
        raise ValueError("provide --k or --k-range")
    return [args.k]


def cmd_curve(args) -> int:
    ch = parse_channel(args.channel)
    ks = _k_list(args)
    ms = sorted(set(args.m))
    if args.mode == "strlfc":
        if not isinstance(ch, Bec):
            raise ValueError("strlfc mode applies to the BEC only")
        rows = _strlfc_rows(ch, ks, ms, args.eps, args.jobs)
    else:
        rows = _optimize_rows(ch, ks, ms, args.eps, args.delta, args.gamma, args.jobs)
    rows += _baseline_rows(ch, ks, args.eps)
    write_rows(_sorted_rows(rows), CURVE_COLUMNS, args.out, args.jsonl)
    return 0


def cmd_bec_rlfc(args) -> int:
    ch = parse_channel(args.channel)
    if not isinstance(ch, Bec):
        raise ValueError("bec-rlfc needs a bec:p channel")
    ks = _k_list(args)
    rows = _strlfc_rows(ch, ks, sorted(set(args.m)), args.eps, args.jobs)
    rows += _baseline_rows(ch, ks, args.eps)
    write_rows(_sorted_rows(rows), CURVE_COLUMNS, args.out, args.jsonl)
    return 0


def cmd_check(args) -> int:
    from .checks import run_checks

    results = run_checks(trials=args.trials, seed=args.seed)
    rows = []
    for res in results:
        line = f"{'PASS' if res.passed else 'FAIL'} {res.name} ({res.seconds:.2f}s): {res.detail}"
        print(line)
        rows.append({"name": res.name, "passed": res.passed,
                     "seconds": round(res.seconds, 3), "detail": res.detail})
    if args.out:
        with open(args.out, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlsf",
        description="Achievability bounds for stop-feedback codes with few decoding times",
    )
    from . import __version__

    parser.add_argument(
        "--version", action="version",
        version=f"vlsf {__version__} (csv schema {CSV_SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--jsonl", action="store_true", help="JSON lines instead of CSV")

    p = sub.add_parser("tail", help="tail-probability curve at fixed gamma")
    p.add_argument("--channel", required=True, help="biawgn:SNRdB | bsc:p | bec:p")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n-range", required=True, help="lo:hi[:step]")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    add_io(p)
    p.set_defaults(func=cmd_tail)

    p = sub.add_parser("sdo", help="optimized decoding times at fixed k")
    p.add_argument("--channel", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, action="append", required=True)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--delta", type=float, help="fix the error split instead of searching")
    p.add_argument("--gamma", type=float, help="fix the threshold instead of searching")
    add_io(p)
    p.set_defaults(func=cmd_sdo)

    p = sub.add_parser("curve", help="rate vs blocklength dataset over a k-range")
    p.add_argument("--channel", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--k-range", help="lo:hi[:step]")
    p.add_argument("--m", type=int, action="append", required=True)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--delta", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--mode", choices=["infodens", "strlfc"], default="infodens")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers over (k, m) grid points")
    add_io(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("bec-rlfc", help="fountain-coding bounds for the BEC")
    p.add_argument("--channel", required=True, help="bec:p")
    p.add_argument("--k", type=int)
    p.add_argument("--k-range", help="lo:hi[:step]")
    p.add_argument("--m", type=int, action="append", required=True)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers over (k, m) grid points")
    add_io(p)
    p.set_defaults(func=cmd_bec_rlfc)

    p = sub.add_parser("check", help="run the verification suite")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=20240)
    p.add_argument("--out", help="write a JSON-lines report here as well")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
