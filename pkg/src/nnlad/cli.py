"""Command-line entry point ``nnlad``.

Exit codes: 0 success (or certified solve), 1 usage error, 2 solve ended
without certification or a verify suite failed, 3 file I/O or format error.
"""

import argparse
import json
import os
import sys

import numpy as np

from nnlad.expander import generate_dlrbg, mplus_evaluate
from nnlad.harness import (ExperimentConfig, aggregate_metrics, records_to_csv,
                           run_experiment1, run_experiment2, summary_to_csv,
                           trace_rows_to_csv)
from nnlad.io import (FormatError, atomic_write_text, format_csv, read_matrix,
                      read_vector, write_matrix, write_trace, write_vector)
from nnlad.solvers import SOLVERS, SolverParams

EXIT_OK, EXIT_USAGE, EXIT_UNCERTIFIED, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _check_out_dir(path):
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d):
        raise OSError(f"output directory does not exist: {d}")


def cmd_gen_matrix(args):
    if args.d > args.m:
        raise UsageError(f"--d ({args.d}) must not exceed --m ({args.m})")
    _check_out_dir(args.out)
    A = generate_dlrbg(args.n, args.m, args.d, seed=args.seed)
    write_matrix(args.out, A)
    kappa = mplus_evaluate(A, np.ones(A.n_rows)).kappa
    print(f"N={A.n_cols} M={A.n_rows} D={A.degree} kappa={kappa}")
    return EXIT_OK


def _solve(args, A, y):
    from nnlad.solvers import eiht_solve, nnlad_solve, nnls_solve, subgradient_solve

    params = SolverParams(eps1=args.tol, max_iters=args.max_iter,
                          trace_every=args.trace_every if args.trace else 0)
    if args.solver == "nnlad":
        return nnlad_solve(A, y, params)
    if args.solver == "nnls":
        return nnls_solve(A, y, params)
    if args.solver == "subgrad":
        return subgradient_solve(A, y, params)
    return eiht_solve(A, y, args.sparsity, params)


def cmd_solve(args):
    if args.solver == "eiht" and args.sparsity is None:
        raise UsageError("--solver eiht requires --sparsity")
    if args.tol is not None and args.tol < 0:
        raise UsageError("--tol must be >= 0")
    _check_out_dir(args.out)
    if args.trace:
        _check_out_dir(args.trace)
    A = read_matrix(args.matrix)
    y = read_vector(args.y, A.n_rows)
    res = _solve(args, A, y)
    write_vector(args.out, res.estimate)
    if args.trace:
        write_trace(args.trace, res.trace)
    print(f"solver={args.solver} status={res.status} iters={res.iterations} "
          f"objective={res.objective!r}")
    return EXIT_OK if res.certified else EXIT_UNCERTIFIED


def cmd_verify(args):
    from nnlad.verify import run_suite

    checks = run_suite(args.suite)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_UNCERTIFIED


def cmd_experiment(args):
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{args.config}: {exc}") from exc
    try:
        cfg = ExperimentConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from exc
    if args.full_scale:
        cfg.full_scale = True
    out = args.out or cfg.output_path
    if not out:
        raise UsageError("no output path: pass --out or set output_path in the config")
    _check_out_dir(out)
    if cfg.experiment == 1:
        records = run_experiment1(cfg, jobs=args.jobs)
        atomic_write_text(out, records_to_csv(records, timing=cfg.timing))
        if args.summary:
            _check_out_dir(args.summary)
            atomic_write_text(args.summary, summary_to_csv(aggregate_metrics(records)))
        print(f"wrote {len(records)} trial rows to {out}")
    else:
        rows = run_experiment2(cfg, jobs=args.jobs)
        atomic_write_text(out, trace_rows_to_csv(rows, timing=cfg.timing))
        print(f"wrote {len(rows)} trace rows to {out}")
    return EXIT_OK


def cmd_grouptest(args):
    from nnlad.grouptest import (ContaminationModel, PcrNoiseModel, PoolingDesign,
                                 decode_panel, simulate_panel)

    try:
        with open(args.panel) as fh:
            spec = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{args.panel}: {exc}") from exc
    try:
        seed = int(spec.get("seed", args.seed))
        rng = np.random.default_rng(seed)
        if "matrix" in spec:
            design = PoolingDesign(read_matrix(spec["matrix"]))
        else:
            design = PoolingDesign.random(int(spec["persons"]), int(spec["kits"]),
                                          int(spec["splits"]), seed=rng)
        loads = np.asarray(spec["loads"], dtype=np.float64)
        con = ContaminationModel(**spec.get("contamination", {}))
        pcr = PcrNoiseModel(**spec.get("pcr", {}))
        threshold = spec.get("threshold")
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad panel spec: {exc}") from exc
    _check_out_dir(args.out)
    y, _ = simulate_panel(design, loads, con, pcr, seed=rng)
    rep = decode_panel(design, y, threshold=threshold, truth=loads)
    called = np.zeros(loads.size, dtype=int)
    called[rep.called_positive] = 1
    rows = [(n, repr(float(loads[n])), repr(float(rep.estimate[n])), called[n])
            for n in range(loads.size)]
    atomic_write_text(args.out, format_csv(("person", "true_load", "estimate", "called"), rows))
    print(f"positives={len(rep.called_positive)} false_positives={rep.false_positives} "
          f"false_negatives={rep.false_negatives} threshold={rep.threshold!r}")
    return EXIT_OK if rep.status == "certified" else EXIT_UNCERTIFIED


def build_parser():
    p = _Parser(prog="nnlad", description="Non-negative sparse recovery over expander walk matrices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-matrix", help="draw a random D-left-regular walk matrix")
    g.add_argument("--n", type=_positive_int, required=True, help="number of columns N")
    g.add_argument("--m", type=_positive_int, required=True, help="number of rows M")
    g.add_argument("--d", type=_positive_int, required=True, help="left degree D <= M")
    g.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    g.add_argument("--out", required=True, help="matrix file to write")
    g.set_defaults(func=cmd_gen_matrix)

    s = sub.add_parser("solve", help="recover a nonnegative signal from y")
    s.add_argument("--matrix", required=True, help="matrix file (DLRBG v1)")
    s.add_argument("--y", required=True, help="observation vector file, one value per line")
    s.add_argument("--solver", choices=SOLVERS, default="nnlad", help="decoder (default nnlad)")
    s.add_argument("--tol", type=float, default=None,
                   help="stopping tolerance eps1 (default 1e-9 * max(1, ||y||_1))")
    s.add_argument("--max-iter", type=_positive_int, default=20_000, help="iteration budget")
    s.add_argument("--sparsity", type=_positive_int, default=None,
                   help="sparsity level S' (required for eiht)")
    s.add_argument("--trace", default=None, help="optional CSV trace output")
    s.add_argument("--trace-every", type=_positive_int, default=100,
                   help="trace sampling interval in iterations (default 100)")
    s.add_argument("--out", required=True, help="estimate vector file to write")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run an oracle cross-check suite")
    v.add_argument("--suite", choices=("prox", "theta", "certificate", "rate"), required=True)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="run a recovery or convergence experiment")
    e.add_argument("--config", required=True, help="JSON experiment config")
    e.add_argument("--out", default=None, help="CSV output (overrides output_path)")
    e.add_argument("--summary", default=None, help="optional CSV of aggregated means")
    e.add_argument("--full-scale", action="store_true",
                   help="use N=1024, M=256, D=10 instead of the config dimensions")
    e.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    e.set_defaults(func=cmd_experiment)

    t = sub.add_parser("grouptest", help="simulate and decode one pooled testing panel")
    t.add_argument("--panel", required=True, help="JSON panel spec")
    t.add_argument("--seed", type=int, default=0, help="seed if the spec has none")
    t.add_argument("--out", required=True, help="CSV call report")
    t.set_defaults(func=cmd_grouptest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"nnlad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError) as exc:
        print(f"nnlad: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"nnlad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
