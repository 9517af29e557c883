"""Command-line interface.

Subcommands: eig, reduce, bounds, extremal, eigenfunction, verify.
Exit codes: 0 success, 2 parse error, 3 validation error, 4 convergence
failure, 5 verification failure.  All randomness is seed-controlled, so a
fixed seed yields byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import bounds as bounds_mod
from . import extremal as extremal_mod
from .chains import (
    PumpkinChain,
    chain_from_json_obj,
    chain_to_json_obj,
    eigenfunction,
    eigenvalue,
    read_chain,
    test_function_psi1,
    test_function_psi2,
    write_chain,
)
from .errors import ConvergenceError, InputError, ParseError, SpecgapError, ValidationError
from .graphs import MetricGraph, graph_from_json_obj, read_graph
from .reduction import reduce, write_trace
from .testing import run_verification

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_VERIFY = 5


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_any(path: str):
    """Read a graph or chain file, detected by its top-level key."""
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if isinstance(obj, dict) and "segments" in obj:
        return chain_from_json_obj(obj)
    return graph_from_json_obj(obj)


def cmd_eig(args) -> int:
    loaded = _load_any(args.input)
    start = time.perf_counter()
    if isinstance(loaded, PumpkinChain):
        result = eigenvalue(loaded, tol=min(args.tol, 1e-10))
        payload = {
            "solver": "chain",
            "lambda1": result.lambda_,
            "sigma1": result.sigma,
            "sigma1_over_pi": result.sigma / 3.141592653589793,
            "bracket_width": result.bracket_width,
            "runtime_seconds": time.perf_counter() - start,
        }
    else:
        from .fem import lambda1_numeric

        fem = lambda1_numeric(loaded, tol=args.tol)
        if not fem.converged:
            sys.stderr.write("eig: error estimate above tolerance; best value follows\n")
        payload = {
            "solver": "fem",
            "lambda1": fem.value,
            "error_estimate": fem.error_estimate,
            "converged": fem.converged,
            "mesh": fem.h,
            "runtime_seconds": time.perf_counter() - start,
        }
        if not fem.converged:
            _emit(_dump_json(payload), args.out)
            return EXIT_CONVERGENCE
    _emit(_dump_json(payload), args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    g = _load_any(args.input)
    if isinstance(g, PumpkinChain):
        from .chains import as_metric_graph

        g = as_metric_graph(g)
    chain, trace = reduce(g, mode=args.mode)
    out = args.out or "chain.json"
    write_chain(chain, out)
    trace_path = args.trace or (str(Path(out).with_suffix("")) + ".trace.json")
    write_trace(trace, trace_path)
    sys.stdout.write(
        f"reduce: wrote {out} and {trace_path} "
        f"(m={chain.m}, diameter={trace.diameter!r})\n"
    )
    return EXIT_OK


def cmd_bounds(args) -> int:
    g = _load_any(args.input)
    if isinstance(g, PumpkinChain):
        from .chains import as_metric_graph

        g = as_metric_graph(g)
    lam = None
    if args.eig:
        from .fem import lambda1_numeric

        lam = lambda1_numeric(g, tol=args.tol).value
    report = bounds_mod.bound_report(g, lam)
    if args.format == "json":
        _emit(_dump_json(report.to_json_obj()), args.out)
    else:
        _emit(report.to_table() + "\n", args.out)
    return EXIT_OK


def cmd_extremal(args) -> int:
    spec = extremal_mod.build_spec(args.m, args.j0, args.n, args.a)
    report = extremal_mod.verify(spec)
    payload = report.to_json_obj()
    _emit(_dump_json(payload), args.out)
    if args.chain_out:
        write_chain(report.chain, args.chain_out)
    return EXIT_OK


def cmd_eigenfunction(args) -> int:
    chain = read_chain(args.input)
    if args.test_function == "psi1":
        f = test_function_psi1(chain)
    elif args.test_function == "psi2":
        f = test_function_psi2(chain)
    else:
        result = eigenvalue(chain, index=args.index)
        f = eigenfunction(chain, result)
    total = chain.starts_float[-1]
    n = max(args.samples, 2)
    xs = sorted(set(i * total / (n - 1) for i in range(n)) | set(chain.starts_float))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "value", "segment_index"])
    starts = chain.starts_float
    for x in xs:
        seg = 0
        for j in range(chain.m):
            if x > starts[j]:
                seg = j
        writer.writerow([f"{x:.12g}", f"{f.value(x):.12g}", seg])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.count < 1:
        sys.stderr.write("verify: count must be at least 1\n")
        return EXIT_PARSE
    summary = run_verification(args.seed, args.count)
    if args.format == "json":
        _emit(_dump_json(summary.to_json_obj()), args.out)
    else:
        _emit("\n".join(summary.lines()) + "\n", args.out)
    return EXIT_OK if summary.all_passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specgap",
        description="Spectral gaps of compact metric graphs and pumpkin chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eig", help="spectral gap of a graph or chain file")
    p.add_argument("input")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("reduce", help="reduce a graph to a pumpkin chain")
    p.add_argument("input")
    p.add_argument("--mode", choices=["metric", "combinatorial"], default="metric")
    p.add_argument("--out", help="chain output path (default chain.json)")
    p.add_argument("--trace", help="trace output path")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("bounds", help="evaluate spectral-gap bounds")
    p.add_argument("input")
    p.add_argument("--eig", action="store_true", help="also compute the gap for margins")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("extremal", help="build and verify a near-optimal chain")
    p.add_argument("m", type=int)
    p.add_argument("j0", type=int)
    p.add_argument("n", type=int)
    p.add_argument("a", type=float, nargs="?", default=1.0)
    p.add_argument("--chain-out", help="also write the chain file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("eigenfunction", help="sample an eigenfunction to CSV")
    p.add_argument("input", help="chain file")
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--test-function", choices=["psi1", "psi2"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigenfunction)

    p = sub.add_parser("verify", help="run the random property harness")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except (ValidationError, InputError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_VALIDATION
    except ConvergenceError as exc:
        sys.stderr.write(f"convergence failure: {exc}\n")
        return EXIT_CONVERGENCE
    except SpecgapError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
