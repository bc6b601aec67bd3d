"""Command-line front end.

Exit codes: 0 success, 1 usage or parse error, 2 domain validation failure,
3 reproduction mismatch (or a measured horizon above its guaranteed bound).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .array_sim import (
    DivergedTrajectory,
    measure_sync,
    simulate,
    write_sync_csv,
    write_trajectory_csv,
)
from .config import ConfigError, load_config
from .coupling import (
    CouplingError,
    InvalidHorizon,
    RowSumViolation,
    SpectrumViolation,
    dump_coupling,
    random_coupling,
    validate_coupling,
)
from .interconnect import InterconnectError
from .linear_observer import (
    NotDeadbeatObservable,
    ObserverError,
    design_observer,
    dump_observer,
)
from .matrixcore import DimensionMismatch, parse_matrix
from .nonlinear_systems import ZeroB
from .reproduce import TARGETS, reproduce

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_MISMATCH = 0, 1, 2, 3

DOMAIN_ERRORS = (CouplingError, ObserverError, InterconnectError, DimensionMismatch, ZeroB)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _read_matrix(path: str):
    try:
        return parse_matrix(_read(path))
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _fmt_vec(values) -> str:
    return "[" + ", ".join(str(v) for v in values) + "]"


def _indent(text: str) -> str:
    return "\n".join("  " + line for line in text.splitlines())


def cmd_validate_coupling(args) -> int:
    g = _read_matrix(args.matrix)
    try:
        cm = validate_coupling(g)
    except RowSumViolation:
        print("invalid: row sums")
        return EXIT_DOMAIN
    except SpectrumViolation:
        print("invalid: spectrum")
        return EXIT_DOMAIN
    except DimensionMismatch:
        print("invalid: not square")
        return EXIT_DOMAIN
    print(f"valid, r={cm.horizon_r}, l={_fmt_vec(cm.left_eigvec_l)}")
    return EXIT_OK


def cmd_design_observer(args) -> int:
    a, c = _read_matrix(args.a), _read_matrix(args.c)
    try:
        obs = design_observer(a, c)
    except NotDeadbeatObservable:
        print("not deadbeat observable")
        return EXIT_DOMAIN
    except (ObserverError, DimensionMismatch) as exc:
        print(f"invalid: {exc}")
        return EXIT_DOMAIN
    print(f"p={obs.p}")
    print("H =")
    print(_indent(str(obs.h_gain)))
    print("L =")
    print(_indent(str(obs.l_gain)))
    if args.out:
        _write(args.out, dump_observer(obs))
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        cfg = load_config(_read(args.config))
    except ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    try:
        spec = cfg.build()
    except ConfigError as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    k_max = args.kmax if args.kmax is not None else cfg.k_max
    if k_max is None:
        p = spec.dynamics.p
        k_max = spec.ic.horizon * p + 10 if p is not None else 50
    tol = args.tol if args.tol is not None else cfg.tol
    traj = simulate(spec, k_max)
    out = args.out or cfg.output or f"{cfg.name}.csv"
    try:
        report = measure_sync(traj, tol)
    except DivergedTrajectory:
        print(f"diverged after step {traj.k_max}")
        return EXIT_DOMAIN
    stem = os.path.splitext(out)[0]
    try:
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        write_trajectory_csv(traj, out)
        write_sync_csv(report, f"{stem}_sync.csv")
        _write(f"{stem}_report.txt", report.to_text())
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from None
    print(report.summary())
    if report.bound_tau is not None and not report.passed:
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_reproduce(args) -> int:
    results = reproduce(args.target, args.out or ".")
    for res in results:
        print(res.report())
    return EXIT_OK if all(r.passed for r in results) else EXIT_MISMATCH


def cmd_random_coupling(args) -> int:
    try:
        cm = random_coupling(args.q, args.r, args.seed)
    except InvalidHorizon as exc:
        print(f"invalid: {exc}")
        return EXIT_DOMAIN
    text = dump_coupling(cm)
    if args.out:
        _write(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    print(f"r={cm.horizon_r}, l={_fmt_vec(cm.left_eigvec_l)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="deadbeat", description="Deadbeat observers and synchronizing arrays.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate-coupling", help="check a deadbeat coupling matrix")
    p.add_argument("matrix", help="plain-text matrix file")
    p.set_defaults(func=cmd_validate_coupling)

    p = sub.add_parser("design-observer", help="design the set-chain deadbeat observer for (A, C)")
    p.add_argument("a", help="matrix file for A")
    p.add_argument("c", help="matrix file for C")
    p.add_argument("--out", help="write the observer bundle here")
    p.set_defaults(func=cmd_design_observer)

    p = sub.add_parser("simulate", help="run a JSON scenario and measure synchronization")
    p.add_argument("config", help="JSON scenario file")
    p.add_argument("--tol", type=float, help="synchronization tolerance")
    p.add_argument("--kmax", type=int, help="number of steps")
    p.add_argument("--seed", type=int, help="seed for random initial states")
    p.add_argument("--out", help="trajectory CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="recompute a worked example and compare")
    p.add_argument("target", choices=[*TARGETS, "all"])
    p.add_argument("--out", help="directory for CSV files (default: current directory)")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("random-coupling", help="sample a deadbeat coupling matrix")
    p.add_argument("--q", type=int, required=True, help="number of agents")
    p.add_argument("--r", type=int, required=True, help="deadbeat horizon")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the matrix here")
    p.set_defaults(func=cmd_random_coupling)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"deadbeat: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DOMAIN_ERRORS as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
