"""Command-line interface.

Exit codes: 0 success (or check passed), 1 check failed, 2 error.
"""

from __future__ import annotations

import argparse
import sys

from .bench import run_locality_bench
from .compose import is_consistent
from .errors import CPMError
from .ipfp import ipfp_run
from .modelfile import decode_model, parse_model, read_model, serialize_model
from .sequence import (
    GeneratingSequence,
    compose_sequence_right,
    eliminate_variable,
    eliminate_variables,
    is_perfect,
)
from .tables import (
    DEFAULT_MAX_ENTRIES,
    Tolerance,
    marginal,
    max_abs_diff,
    oracle_joint,
)

EXIT_OK, EXIT_FALSE, EXIT_ERROR = 0, 1, 2


def _load(args):
    if args.model == "-":
        return parse_model(decode_model(sys.stdin.buffer.read()), renormalize=args.renormalize)
    return read_model(args.model, renormalize=args.renormalize)


def _emit_model(args, registry, seq, out):
    text = serialize_model(registry, seq)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    elif args.format == "human":
        out.write(text)


def _emit_summary(args, pairs: dict, out):
    if args.format == "summary":
        for k, v in pairs.items():
            if isinstance(v, bool):
                v = str(v).lower()
            out.write(f"{k}={v}\n")
    elif args.out or args.command not in ("joint", "eliminate", "ipfp"):
        for k, v in pairs.items():
            out.write(f"{k}: {v}\n")


def cmd_joint(args, out):
    registry, seq = _load(args)
    joint = compose_sequence_right(seq, args.max_entries)
    _emit_model(args, registry, GeneratingSequence((joint,), registry, ("joint",)), out)
    _emit_summary(args, {"entries": joint.size, "total": joint.total()}, out)
    return EXIT_OK


def _vars(args):
    return list(args.var or [])


def cmd_eliminate(args, out):
    registry, seq = _load(args)
    variables = _vars(args)
    if not variables:
        sys.stderr.write("cpm eliminate: no --var given\n")
        return EXIT_ERROR
    if len(variables) == 1 and not args.ignore_missing:
        res = eliminate_variable(seq, variables[0], keep_residual=args.keep_residual)
    else:
        if args.keep_residual:
            sys.stderr.write("--keep-residual applies to single-variable elimination only\n")
            return EXIT_ERROR
        res = eliminate_variables(seq, variables, ignore_missing=args.ignore_missing)
    reduced = res.reduced
    if res.residual is not None:
        reduced = reduced.with_factors(
            list(reduced.factors) + [res.residual],
            names=list(reduced.factor_names()) + [f"Q{len(reduced) + 1}"],
        )
    _emit_model(args, registry, reduced, out)
    _emit_summary(args, {
        "peak_entries": res.peak_entries,
        "touched": ",".join(map(str, res.positions)),
        "fill_in": ";".join(f"{p}:{','.join(v)}" for p, v in res.fill_in),
    }, out)
    return EXIT_OK


def cmd_check(args, out):
    registry, seq = _load(args)
    tol = Tolerance(eq_tol=args.tol)
    pairs = {}
    ok = True
    bad = []
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if not is_consistent(seq[i], seq[j], tol):
                bad.append(f"{i + 1}-{j + 1}")
    pairs["consistent"] = not bad
    if bad:
        pairs["inconsistent_pairs"] = ",".join(bad)
    if args.perfect:
        report = is_perfect(seq, method=args.method, tol=tol, max_entries=args.max_entries)
        pairs["verdict"] = report.verdict
        pairs["method"] = report.method
        pairs["worst_deviation"] = report.worst_deviation
        if report.failing_index is not None:
            pairs["failing_index"] = report.failing_index
        ok = report.verdict
    else:
        pairs["verdict"] = not bad
        ok = not bad
    _emit_summary(args, pairs, out)
    return EXIT_OK if ok else EXIT_FALSE


def cmd_oracle(args, out):
    registry, seq = _load(args)
    variables = _vars(args)
    truth = oracle_joint(seq, args.max_entries)
    if variables:
        res = eliminate_variables(seq, variables, ignore_missing=args.ignore_missing)
        got = compose_sequence_right(res.reduced, args.max_entries)
        truth = marginal(truth, got.scope)
        peak = res.peak_entries
    else:
        got = compose_sequence_right(seq, args.max_entries)
        peak = got.size
    dev = max_abs_diff(got, truth)
    ok = dev <= args.tol
    _emit_summary(args, {"verdict": ok, "worst_deviation": dev, "peak_entries": peak}, out)
    return EXIT_OK if ok else EXIT_FALSE


def cmd_ipfp(args, out):
    registry, seq = _load(args)
    run = ipfp_run(seq, max_cycles=args.max_cycles, tol=args.tol, max_entries=args.max_entries)
    _emit_model(args, registry, GeneratingSequence((run.result,), registry, ("ipfp",)), out)
    _emit_summary(args, {
        "verdict": run.converged,
        "cycles_used": run.cycles_used,
        "last_change": run.per_cycle_change[-1],
        "marginal_mismatch": run.marginal_mismatch,
    }, out)
    return EXIT_OK if run.converged else EXIT_FALSE


def cmd_bench(args, out):
    seq = None
    if args.model:
        _, seq = _load(args)
    var = args.var[0] if args.var else None
    report = run_locality_bench(length=args.length, var=var, trials=args.trials,
                                seed=args.seed, max_entries=args.max_entries, seq=seq)
    _emit_summary(args, report.summary(), out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "summary"), default="human")
    common.add_argument("--max-entries", type=int, default=DEFAULT_MAX_ENTRIES)
    common.add_argument("--renormalize", action="store_true",
                        help="rescale every input table to sum to 1")
    common.add_argument("--out", help="write the resulting model here instead of stdout")

    def model_cmd(name, fn, help):
        p = sub.add_parser(name, parents=[common], help=help)
        p.add_argument("model", help="model file, or - for stdin")
        p.set_defaults(func=fn)
        return p

    model_cmd("joint", cmd_joint, "compose the right chain into one joint table")

    p = model_cmd("eliminate", cmd_eliminate, "sum variables out locally")
    p.add_argument("--var", action="append", help="variable to eliminate (repeatable)")
    p.add_argument("--keep-residual", action="store_true")
    p.add_argument("--ignore-missing", action="store_true")

    p = model_cmd("check", cmd_check, "pairwise consistency and perfectness")
    p.add_argument("--perfect", action="store_true")
    p.add_argument("--method", choices=("def", "marginals", "both"), default="both")
    p.add_argument("--tol", type=float, default=1e-9)

    p = model_cmd("oracle", cmd_oracle, "compare against the brute-force joint")
    p.add_argument("--var", "--eliminate", dest="var", action="append",
                   help="eliminate locally before comparing (repeatable)")
    p.add_argument("--ignore-missing", action="store_true")
    p.add_argument("--tol", type=float, default=1e-9)

    p = model_cmd("ipfp", cmd_ipfp, "iterative proportional fitting from uniform")
    p.add_argument("--max-cycles", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-9)

    p = sub.add_parser("bench", parents=[common], help="locality benchmark on a binary chain")
    p.add_argument("model", nargs="?", help="optional model file instead of a generated chain")
    p.add_argument("--length", type=int, default=26)
    p.add_argument("--var", action="append")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (CPMError, OSError, ValueError) as exc:
        sys.stderr.write(f"cpm {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
