"""Command-line interface.

Exit codes: 0 success, 1 verification failed, 2 no convergence or other
numerical failure, 3 degenerate stasis point or singular Jacobian,
4 degenerate cycle, 64 usage error or invalid parameter value, 65 bad
input data (including a non-planar system for ``q1``), 66 missing file.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import contextlib
import csv
import json
import re
import sys

import numpy as np

from . import errors
from .cycle import (
    FamilyMember,
    TwoCycle,
    _check_deltas,
    cycle_family,
    find_two_cycle_direct,
    find_two_cycle_reduced,
    stasis_in_cycle_check,
    verify_two_cycle,
)
from .field import builtin, load_system
from .ode import IntegratorConfig, SwitchSchedule, relaxed_trajectory, switched_trajectory
from .report import dumps
from .stasis import find_stasis_fixed_lambda, trace_stasis_curve

EX_OK = 0
EX_VERIFY_FAILED = 1
EX_NOCONV = 2
EX_DEGENERATE = 3
EX_DEGENERATE_CYCLE = 4
EX_USAGE = 64
EX_DATAERR = 65
EX_NOINPUT = 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # let "-1,0" and "-1e-3" through as values rather than option flags
    _NEGATIVE = re.compile(r"^-\.?\d[\d.,eE+-]*$")

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = self._NEGATIVE

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EX_USAGE)


def _floats(text: str, name: str, n: int | None = None) -> np.ndarray:
    try:
        values = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and values.size != n:
        raise UsageError(f"{name}: expected {n} values, got {values.size}")
    return values


def _add_system(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--system", help="system definition file")
    g.add_argument("--builtin", help="builtin system name (SYS-LR, SYS-PS, SYS-DG, SYS-3D)")
    p.add_argument("--integrator", choices=["rk4", "rkdp45"], help="integration method (default rkdp45)")
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--dt", type=float, help="sampling / fixed step (default 1e-3)")
    p.add_argument("--max-steps", type=int)


def _add_stasis(p, guess_flag="--guess", required=True):
    p.add_argument(guess_flag, required=required, help="stasis guess x1,...,xn")
    p.add_argument("--lambda", dest="lam", type=float, required=required, help="weight of f2 in (0, 1)")
    p.add_argument("--tol", type=float, default=1e-10)


def _add_cycle(p, required=True):
    _add_stasis(p, required=required)
    p.add_argument("--delta", type=float, help="half-period of the reduced loop")
    p.add_argument("--t2", type=float, help="f2 arc duration for direct shooting")
    p.add_argument("--method", choices=["reduced", "direct"], default="reduced")
    p.add_argument("--anchor", help="direct method: point the phase hyperplane passes through")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stasis-cycles", description="Stasis points and two-cycles of two-flow inclusions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("stasis-find", help="locate and certify a stasis point")
    _add_system(p)
    _add_stasis(p)
    p.add_argument("--max-iter", type=int, default=50)

    p = sub.add_parser("stasis-trace", help="continue the stasis curve, write CSV")
    _add_system(p)
    _add_stasis(p, guess_flag="--start")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--h", type=float, default=0.05, help="continuation step size")
    p.add_argument("--direction", type=int, choices=[1, -1], default=1, help="initial sense of lambda")
    p.add_argument("--out")

    p = sub.add_parser("cycle-find", help="construct a two-cycle, write JSON")
    _add_system(p)
    _add_cycle(p)
    p.add_argument("--samples", type=int, default=0, help="number of trajectory samples to include")
    p.add_argument("--out")

    p = sub.add_parser("cycle-sweep", help="reduced-route cycles for decreasing deltas, write CSV")
    _add_system(p)
    _add_stasis(p)
    p.add_argument("--deltas", required=True)
    p.add_argument("--parallel", action="store_true", help="solve each delta independently in threads")
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="integrate a switched or relaxed trajectory, write CSV")
    _add_system(p)
    p.add_argument("--x0", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--schedule", help='e.g. "1:0.5,2:0.6931"')
    g.add_argument("--relaxed", type=float, metavar="LAMBDA")
    p.add_argument("--tspan", help="a,b for --relaxed")
    p.add_argument("--out")

    p = sub.add_parser("verify", help="replay a two-cycle JSON and check its invariants")
    _add_system(p)
    p.add_argument("--cycle", required=True)

    p = sub.add_parser("q1", help="does a planar two-cycle contain a stasis point?")
    _add_system(p)
    _add_cycle(p, required=False)
    p.add_argument("--cycle", help="two-cycle JSON instead of cycle parameters")
    return parser


# -- helpers -----------------------------------------------------------------------

def _load(args):
    overrides = {}
    if args.builtin:
        pair = builtin(args.builtin)
    else:
        sf = load_system(args.system)
        pair, overrides = sf.pair, sf.overrides
    cfg = IntegratorConfig().with_(**overrides)
    cfg = cfg.with_(method=args.integrator, rtol=args.rtol, atol=args.atol, h=args.dt, max_steps=args.max_steps)
    return pair, cfg


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _stasis(args, pair, guess_attr="guess"):
    guess = _floats(getattr(args, guess_attr), f"--{guess_attr}", pair.dim)
    return find_stasis_fixed_lambda(pair, guess, args.lam, tol=args.tol)


def _cycle_from_args(args, pair, cfg):
    if args.guess is None or args.lam is None:
        raise UsageError("--guess and --lambda are required")
    if args.method == "reduced":
        if args.delta is None or args.t2 is not None:
            raise UsageError("--method reduced takes --delta (and not --t2)")
    elif args.t2 is None or args.delta is not None:
        raise UsageError("--method direct takes --t2 (and not --delta)")
    if args.anchor is not None and args.method != "direct":
        raise UsageError("--anchor only applies to --method direct")
    s = _stasis(args, pair)
    if args.method == "reduced":
        return find_two_cycle_reduced(pair, s, args.delta, cfg)
    anchor = None if args.anchor is None else _floats(args.anchor, "--anchor", pair.dim)
    return find_two_cycle_direct(pair, s, args.t2, cfg=cfg, anchor=anchor)


# -- commands ------------------------------------------------------------------------

def cmd_stasis_find(args):
    pair, _ = _load(args)
    guess = _floats(args.guess, "--guess", pair.dim)
    s = find_stasis_fixed_lambda(pair, guess, args.lam, tol=args.tol, max_iter=args.max_iter)
    sys.stdout.write(dumps(s.to_dict()))
    if s.degenerate:
        sys.stderr.write("stasis point is degenerate: d/dx(k1 f1 + k2 f2) is singular\n")
        return EX_DEGENERATE
    return EX_OK


def cmd_stasis_trace(args):
    pair, _ = _load(args)
    if args.steps < 0 or args.h <= 0:
        raise UsageError("--steps must be >= 0 and --h > 0")
    s = _stasis(args, pair, "start")
    curve = trace_stasis_curve(pair, s, args.steps, step_size=args.h, direction=args.direction)
    with _output(args.out) as fh:
        curve.write_csv(fh)
    if curve.reason != "steps":
        sys.stderr.write(f"continuation stopped early ({curve.reason}): {curve.message}\n")
    return EX_OK


def cmd_cycle_find(args):
    pair, cfg = _load(args)
    cycle = _cycle_from_args(args, pair, cfg)
    with _output(args.out) as fh:
        fh.write(dumps(cycle.to_dict(samples=args.samples)))
    return EX_OK


def _sweep_parallel(pair, s, deltas, cfg):
    def one(d):
        try:
            c = find_two_cycle_reduced(pair, s, d, cfg)
            return FamilyMember(d, c, c.amplitude)
        except errors.StasisCyclesError as exc:
            return FamilyMember(d, None, None, f"{type(exc).__name__}: {exc}")

    with concurrent.futures.ThreadPoolExecutor() as pool:
        return list(pool.map(one, deltas))


def cmd_cycle_sweep(args):
    pair, cfg = _load(args)
    try:
        deltas = _check_deltas(_floats(args.deltas, "--deltas"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    s = _stasis(args, pair)
    if s.degenerate:
        raise errors.DegenerateStasis(f"stasis point {s.x} is degenerate")
    members = _sweep_parallel(pair, s, deltas, cfg) if args.parallel else cycle_family(pair, s, deltas, cfg)
    failed = False
    with _output(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delta", "epsilon", "residual"])
        for m in members:
            if m.cycle is None:
                failed = True
                sys.stderr.write(f"delta={m.delta}: {m.error}\n")
                writer.writerow([f"{m.delta:.17g}", "", ""])
            else:
                writer.writerow([f"{m.delta:.17g}", f"{m.amplitude:.17g}", f"{m.cycle.closure_residual:.17g}"])
    return EX_NOCONV if failed else EX_OK


def cmd_simulate(args):
    pair, cfg = _load(args)
    x0 = _floats(args.x0, "--x0", pair.dim)
    if args.schedule is not None:
        if args.tspan is not None:
            raise UsageError("--tspan only applies to --relaxed")
        try:
            sched = SwitchSchedule.parse(args.schedule)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        traj = switched_trajectory(pair, x0, sched, cfg)
    else:
        if args.tspan is None:
            raise UsageError("--relaxed needs --tspan a,b")
        tspan = _floats(args.tspan, "--tspan", 2)
        if not 0.0 <= args.relaxed <= 1.0 or not tspan[1] > tspan[0]:
            raise UsageError("--relaxed must lie in [0, 1] and --tspan must be increasing")
        traj = relaxed_trajectory(pair, x0, args.relaxed, tspan, cfg)
    with _output(args.out) as fh:
        traj.write_csv(fh)
    return EX_OK


def _read_cycle(path) -> TwoCycle:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise errors.SystemFileError(f"{path}: invalid JSON ({exc})") from None
    try:
        return TwoCycle.from_dict(data)
    except ValueError as exc:
        raise errors.SystemFileError(f"{path}: {exc}") from None


def cmd_verify(args):
    pair, cfg = _load(args)
    cycle = _read_cycle(args.cycle)
    if cycle.start.size != pair.dim:
        raise errors.SystemFileError(f"cycle dimension {cycle.start.size} does not match system dimension {pair.dim}")
    report = verify_two_cycle(pair, cycle, cfg)
    sys.stdout.write(dumps(report.to_dict()))
    return EX_OK if report.passed else EX_VERIFY_FAILED


def cmd_q1(args):
    pair, cfg = _load(args)
    if pair.dim != 2:
        raise errors.NotPlanar(f"the containment experiment needs a planar system, got n = {pair.dim}")
    cycle = _read_cycle(args.cycle) if args.cycle else _cycle_from_args(args, pair, cfg)
    result = stasis_in_cycle_check(pair, cycle, cfg)
    sys.stdout.write(dumps(result.to_dict()))
    return EX_OK


COMMANDS = {
    "stasis-find": cmd_stasis_find,
    "stasis-trace": cmd_stasis_trace,
    "cycle-find": cmd_cycle_find,
    "cycle-sweep": cmd_cycle_sweep,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "q1": cmd_q1,
}

_EXIT_FOR = [
    (UsageError, EX_USAGE),
    (errors.UnknownSystemError, EX_USAGE),
    (FileNotFoundError, EX_NOINPUT),
    (errors.SystemFileError, EX_DATAERR),
    (errors.NotPlanar, EX_DATAERR),
    (errors.OpenCurve, EX_DATAERR),
    (errors.DegenerateStasis, EX_DEGENERATE),
    (errors.SingularJacobian, EX_DEGENERATE),
    (errors.DegenerateCycle, EX_DEGENERATE_CYCLE),
    (errors.StasisCyclesError, EX_NOCONV),
]


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        for kind, code in _EXIT_FOR:
            if isinstance(exc, kind):
                sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
                return code
        if isinstance(exc, (ValueError, OSError)):
            sys.stderr.write(f"error: {exc}\n")
            return EX_USAGE if isinstance(exc, ValueError) else EX_NOINPUT
        raise


if __name__ == "__main__":
    raise SystemExit(main())
