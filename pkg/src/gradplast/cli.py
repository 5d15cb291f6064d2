"""Command-line entry points: run, verify, probe, bench.

Exit codes: 0 success, 1 usage or I/O failure, 2 non-convergence,
3 validation failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import _backend
from .config import ScenarioConfig, parse_config
from .errors import (
    GradplastError,
    InvalidModel,
    NonConvergence,
    ParseError,
    ValidationError,
)
from .grid import write_snapshot
from .solver import StepReport, coercivity_probe, predicted_coercivity, run_evolution
from .suite import run_suite

EXIT_OK = 0
EXIT_USAGE_IO = 1
EXIT_NONCONVERGENCE = 2
EXIT_VALIDATION = 3


def _load_config(path: str) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def _write_summary(path, reports):
    with open(path, "w") as fh:
        fh.write(StepReport.csv_header() + "\n")
        for rep in reports:
            fh.write(rep.csv_row() + "\n")


def cmd_run(args) -> int:
    try:
        cfg = _load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE_IO
    except (ParseError, ValidationError, InvalidModel) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out_dir = args.output or cfg.output_directory
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out_dir!r}: {exc}",
              file=sys.stderr)
        return EXIT_USAGE_IO

    reports = []
    exit_code = EXIT_OK
    try:
        results = run_evolution(cfg.material, cfg.basis, cfg.spec, cfg.load,
                                cfg.solver)
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        if exc.report is not None:
            reports.append(exc.report)
        exit_code = EXIT_NONCONVERGENCE
        results = []
    except (ValidationError, InvalidModel) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        for state, rep in results:
            reports.append(rep)
            if cfg.snapshot_stride and rep.step % cfg.snapshot_stride == 0:
                tag = f"step{rep.step:05d}"
                write_snapshot(os.path.join(out_dir, f"{tag}_u.field"),
                               state.u, cfg.spec)
                write_snapshot(os.path.join(out_dir, f"{tag}_gamma.field"),
                               state.gamma, cfg.spec)
                if state.eta is not None:
                    write_snapshot(os.path.join(out_dir, f"{tag}_eta.field"),
                                   state.eta, cfg.spec)
        _write_summary(os.path.join(out_dir, "summary.csv"), reports)
    except OSError as exc:
        print(f"error: cannot write outputs under {out_dir!r}: {exc}",
              file=sys.stderr)
        return EXIT_USAGE_IO
    print(f"wrote {os.path.join(out_dir, 'summary.csv')} "
          f"({len(reports)} steps)")
    return exit_code


def cmd_verify(args) -> int:
    cfg = None
    if args.config:
        try:
            cfg = _load_config(args.config)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_USAGE_IO
        except (ParseError, ValidationError, InvalidModel) as exc:
            print(f"invalid scenario: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    results = run_suite(cfg)
    width = max(len(r.name) for r in results)
    all_ok = True
    for r in results:
        flag = "pass" if r.passed else "FAIL"
        all_ok &= r.passed
        print(f"{r.name:<{width}}  {flag}  [{r.seconds:6.2f}s]  {r.detail}")
    print("verification:", "all checks passed" if all_ok else "FAILURES above")
    return EXIT_OK if all_ok else EXIT_VALIDATION


def cmd_probe(args) -> int:
    try:
        cfg = _load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE_IO
    except (ParseError, ValidationError, InvalidModel) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        bound = predicted_coercivity(cfg.material, cfg.basis)
    except InvalidModel as exc:
        print(f"no coercivity bound: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    sampled = coercivity_probe(cfg.material, cfg.basis, cfg.spec,
                               cfg.probe_samples, cfg.probe_seed)
    print(f"predicted constant: {bound.constant:.17g}")
    print(f"splitting parameter: {bound.theta:.17g}")
    if not bound.includes_curl:
        print("length scale is zero: bound and quotients use the reduced "
              "seminorm without the curl term")
    print(f"sampled minimum quotient: {sampled:.17g} "
          f"({cfg.probe_samples} samples, seed {cfg.probe_seed})")
    ok = sampled >= bound.constant
    print("probe:", "sampled minimum dominates the predicted constant"
          if ok else "FAIL: sampled quotient below the predicted constant")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_bench(args) -> int:
    backends = _backend.available_backends()
    n = args.size
    reps = args.repeat
    rng = np.random.default_rng(0)
    x = rng.standard_normal((n, n, n, 3, 3))
    slip = rng.standard_normal((n, n, n, 12))
    eta = np.abs(rng.standard_normal(slip.shape))
    print(f"kernel benchmark on a {n}^3 grid, best of {reps} "
          f"(active backend: {_backend.BACKEND})")
    rows = []
    for name in backends:
        impl = _backend.get_backend(name)

        def stencil_round():
            acc = impl.diff_forward(x, 0, 0.1, True)
            acc = impl.diff_forward_adjoint(acc, 1, 0.1, False)
            return acc

        def prox_round():
            a = impl.prox_iso_sweep(slip, 0.7, 0.1, 0.3, eta)
            return impl.prox_kin_sweep(a, 0.7, 0.1)

        times = {}
        for label, fn in (("stencil", stencil_round), ("prox", prox_round)):
            best = np.inf
            for _ in range(reps):
                t0 = time.perf_counter()
                fn()
                best = min(best, time.perf_counter() - t0)
            times[label] = best
        rows.append((name, times))
        print(f"  {name:8s}  stencil {times['stencil'] * 1e3:8.3f} ms   "
              f"prox {times['prox'] * 1e3:8.3f} ms")
    if len(rows) == 2:
        s = rows[0][1]["stencil"] / rows[1][1]["stencil"]
        p = rows[0][1]["prox"] / rows[1][1]["prox"]
        print(f"  speedup ({rows[1][0]} over {rows[0][0]}): "
              f"stencil {s:.2f}x, prox {p:.2f}x")
    else:
        print("  compiled backend not built; python fallback only")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradplast",
        description="Desk-scale single-crystal gradient plasticity solver "
                    "and verification suite.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write summary.csv")
    p_run.add_argument("config", help="scenario file")
    p_run.add_argument("--output", help="override output directory")
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify", help="run the verification suite")
    p_ver.add_argument("config", nargs="?", default=None,
                       help="optional scenario whose grid/material to adopt")
    p_ver.set_defaults(func=cmd_verify)

    p_probe = sub.add_parser("probe", help="coercivity bound vs sampled quotients")
    p_probe.add_argument("config", help="scenario file")
    p_probe.set_defaults(func=cmd_probe)

    p_bench = sub.add_parser("bench", help="compare kernel backends")
    p_bench.add_argument("--size", type=int, default=32, help="grid edge cells")
    p_bench.add_argument("--repeat", type=int, default=5, help="timing repeats")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE_IO if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except GradplastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
