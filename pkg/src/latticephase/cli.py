"""latticephase command line.

Exit codes: 0 success (all audits pass), 1 usage error, 2 numerical failure,
3 audit failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .halfplane import HalfPlanePoint, ReductionError, reduce_to_fundamental
from .jacobi_theta import BudgetExhausted, RangeError, TruncationBudget
from .lattice_energy import FDStepUnderflow, Method, PotentialSpec, energy
from .lemma_audit import CATALOGUE, LEMMA_IDS, GridSpec, HypothesisRegionError, audit
from .phase_solver import (BracketError, Mode, global_minimize, phase_diagram, solve_alpha_a,
                           solve_alpha_b, thresholds_for_gamma, y_alpha)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_AUDIT = 0, 1, 2, 3
NUMERIC_ERRORS = (BracketError, BudgetExhausted, FDStepUnderflow, ReductionError, ArithmeticError)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-15
    y_max: float = 4.0
    output_format: str = "csv"
    output_path: Optional[str] = None
    digits: int = 10
    alpha_range: Optional[tuple] = None
    x_range: Optional[tuple] = None
    y_range: Optional[tuple] = None

    def __post_init__(self):
        if not 0 < self.tolerance <= 1e-2:
            raise UsageError("tolerance must lie in (0, 1e-2]")
        if not self.y_max >= 2:
            raise UsageError("y_max must be >= 2")
        if self.output_format not in ("csv", "json"):
            raise UsageError("output format must be csv or json")
        if not 1 <= self.digits <= 17:
            raise UsageError("digits must lie in [1, 17]")

    def fmt(self, v: float) -> str:
        return f"{v:.{self.digits}g}"

    @property
    def budget(self) -> TruncationBudget:
        return TruncationBudget(abs_tol=self.tolerance, rel_tol=max(self.tolerance * 10, 1e-14))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _point(text: str) -> HalfPlanePoint:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    try:
        return HalfPlanePoint(x, y)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _spec(text: str) -> PotentialSpec:
    try:
        return PotentialSpec.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _range(text: str) -> tuple:
    try:
        lo, hi, n = text.split(",")
        return float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO,HI,STEPS, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="latticephase", description="Lattice energy phase diagrams and threshold solvers.")
    p.add_argument("--tol", type=float, default=1e-15, help="absolute truncation tolerance")
    p.add_argument("--y-max", type=float, default=4.0, help="initial upper y for minimization scans")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None, help="write tables here instead of stdout")
    p.add_argument("--digits", type=int, default=10, help="significant digits in printed numbers")
    sub = p.add_subparsers(dest="cmd", required=True)

    e = sub.add_parser("eval", help="evaluate an energy at one point")
    e.add_argument("--spec", type=_spec, required=True)
    e.add_argument("--alpha", type=float, required=True)
    e.add_argument("--z", type=_point, required=True)
    e.add_argument("--method", choices=("auto", "direct", "reduced"), default="auto")

    r = sub.add_parser("reduce", help="reduce a point to the fundamental domain")
    r.add_argument("--z", type=_point, required=True)

    m = sub.add_parser("minimize", help="global minimizer over lattice shapes")
    m.add_argument("--spec", type=_spec, required=True)
    m.add_argument("--alpha", type=float, required=True)
    m.add_argument("--mode", choices=("full", "guided"), default=None)

    t = sub.add_parser("thresholds", help="transition values of alpha")
    t.add_argument("--gamma", type=float, default=None)

    for name, helptext in (("phase-diagram", "minimizer over an alpha sweep"),
                           ("curve-yalpha", "rectangular branch y_alpha over an alpha sweep")):
        s = sub.add_parser(name, help=helptext)
        if name == "phase-diagram":
            s.add_argument("--spec", type=_spec, required=True)
            s.add_argument("--mode", choices=("full", "guided"), default=None)
        s.add_argument("--alpha-from", type=float, required=True)
        s.add_argument("--alpha-to", type=float, required=True)
        s.add_argument("--steps", type=int, required=True)

    a = sub.add_parser("audit", help="grid audits of the supporting inequalities")
    g = a.add_mutually_exclusive_group(required=True)
    g.add_argument("--lemma", choices=LEMMA_IDS)
    g.add_argument("--all", action="store_true")
    a.add_argument("--alpha-range", type=_range, default=None, help="LO,HI,STEPS (with --lemma)")
    a.add_argument("--x-range", type=_range, default=None)
    a.add_argument("--y-range", type=_range, default=None)
    return p


def _sweep(args) -> np.ndarray:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.steps == 1:
        return np.array([args.alpha_from])
    return np.linspace(args.alpha_from, args.alpha_to, args.steps)


def _table(cfg: RunConfig, header: Sequence[str], rows: list, out) -> None:
    if cfg.output_format == "json":
        json.dump([dict(zip(header, r)) for r in rows], out, indent=1)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([cfg.fmt(v) if isinstance(v, float) else v for v in r])


def _cmd_eval(args, cfg, out):
    method = {"auto": Method.AUTO, "direct": Method.DIRECT, "reduced": Method.REDUCED}[args.method]
    v = energy(args.spec, args.alpha, args.z, cfg.budget, method)
    out.write(f"{cfg.fmt(v.value)} tail_bound={v.tail_bound:.3g}\n")
    return EXIT_OK


def _cmd_reduce(args, cfg, out):
    red = reduce_to_fundamental(args.z)
    word = str(red.word)
    out.write(f"{cfg.fmt(red.point.x)},{cfg.fmt(red.point.y)}" + (f"  {word}" if word else "") + "\n")
    return EXIT_OK


def _cmd_minimize(args, cfg, out):
    mode = Mode.parse(args.mode) if args.mode else (Mode.GUIDED if args.spec.k == 1 and not args.spec.gamma
                                                    else Mode.FULL)
    r = global_minimize(args.spec, args.alpha, mode, cfg.y_max)
    out.write(f"{r.label} {cfg.fmt(r.point.x)},{cfg.fmt(r.point.y)} energy={cfg.fmt(r.value)}\n")
    if r.y_max_hit:
        print("warning: minimizer sits at the y cap of the scan", file=sys.stderr)
    if not r.x_resolved:
        print("warning: energy is flat in x to rounding; x is not resolved", file=sys.stderr)
    return EXIT_OK


def _cmd_thresholds(args, cfg, out):
    if args.gamma is None:
        a, b = solve_alpha_a(), solve_alpha_b()
        out.write(f"alpha_a={cfg.fmt(a.value)} alpha_b={cfg.fmt(b.value)}\n")
    else:
        a, b = thresholds_for_gamma(args.gamma)
        out.write(f"alpha_g1={cfg.fmt(a.value)} alpha_g2={cfg.fmt(b.value)}\n")
    out.write(f"residual_1={a.residual:.3g} residual_2={b.residual:.3g}\n")
    return EXIT_OK


def _cmd_phase(args, cfg, out):
    mode = Mode.parse(args.mode) if args.mode else None
    rows = phase_diagram(args.spec, list(_sweep(args)), mode, cfg.y_max)
    _table(cfg, ("alpha", "label", "x", "y", "energy"),
           [(r.alpha, str(r.label), r.minimizer.x, r.minimizer.y, r.energy) for r in rows], out)
    return EXIT_OK


def _cmd_yalpha(args, cfg, out):
    rows = [(float(a), y_alpha(float(a))) for a in _sweep(args)]
    _table(cfg, ("alpha", "y_alpha"), rows, out)
    return EXIT_OK


def _cmd_audit(args, cfg, out):
    if args.all and (cfg.alpha_range or cfg.x_range or cfg.y_range):
        raise UsageError("grid overrides need a single --lemma")
    ids = LEMMA_IDS if args.all else (args.lemma,)
    ok = True
    for i in ids:
        grid = None
        if not args.all and (cfg.alpha_range or cfg.x_range or cfg.y_range):
            d = CATALOGUE[i].default_grid
            try:
                grid = GridSpec(cfg.alpha_range or d.alpha_range, cfg.x_range or d.x_range,
                                cfg.y_range or d.y_range)
            except ValueError as e:
                raise UsageError(str(e))
        rep = audit(i, grid)
        out.write(rep.line() + "\n")
        out.flush()
        ok &= rep.passed
    return EXIT_OK if ok else EXIT_AUDIT


COMMANDS = {"eval": _cmd_eval, "reduce": _cmd_reduce, "minimize": _cmd_minimize, "thresholds": _cmd_thresholds,
            "phase-diagram": _cmd_phase, "curve-yalpha": _cmd_yalpha, "audit": _cmd_audit}


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(args.tol, args.y_max, args.format, args.output, args.digits,
                        getattr(args, "alpha_range", None), getattr(args, "x_range", None),
                        getattr(args, "y_range", None))
        buf = io.StringIO()
        code = COMMANDS[args.cmd](args, cfg, buf if cfg.output_path else stdout)
        if cfg.output_path:
            with open(cfg.output_path, "w", newline="") as f:
                f.write(buf.getvalue())
        return code
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (HypothesisRegionError, RangeError, ValueError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
