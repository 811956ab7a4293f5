"""Command-line entry point: ``vorefine <command> ...``.

Exit status reports whether the tool ran, not the mathematical verdict;
verdicts live in the JSON output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import platform
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .exactnum import format_exact, parse_exact
from .lattice import lattice_report, parse_family
from .metrics import (
    SPLINE_KINDS,
    ErrorExperimentConfig,
    anomalies,
    partition_of_unity_check,
    run_error_experiment,
    sample_convolved_spline,
    support_ring,
)
from .refine import (
    FineFamilySpec,
    check_refinability,
    lozenge_families,
    parse_shift,
    propagation_families,
    propagation_trace,
    region_at,
    spot_check,
    unknown_name,
)
from .svg import draw_report, draw_tessellations
from .tess2d import KINDS, Window, make_tessellation, straddle_test, tessellation_report

DEFAULT_SEED = 20240601


class UsageError(Exception):
    pass


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _fraction_arg(text: str) -> Fraction:
    try:
        v = parse_exact(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not v.is_rational() or v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive rational, got {text!r}")
    return v.a


def _float_list(text: str) -> list[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _int_list(text: str) -> list[int]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


class Run:
    """Collects artifacts and writes the manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.out = Path(args.out) if args.out else None
        self.outputs: list[str] = []
        if self.out:
            self.out.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, data, binary: bool = False) -> None:
        if self.out is None:
            return
        path = self.out / name
        if binary:
            path.write_bytes(data)
        else:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(data)
        self.outputs.append(name)

    def manifest(self, params: dict) -> None:
        if self.out is None:
            return
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
        man = {
            "command": self.args.command,
            "parameters": params,
            "seed": self.args.seed,
            "versions": {"vorefine": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
            "timestamp": when.isoformat(timespec="seconds"),
            "outputs": sorted(self.outputs),
        }
        (self.out / "manifest.json").write_text(_dump_json(man), encoding="utf-8")


def cmd_lattice(args, run: Run) -> int:
    reports = [lattice_report(parse_family(s)) for s in args.family]
    for r in reports:
        print(f"{r['family']}: inner product {r['inner_product']}, sign {r['sign']:+d}, "
              f"ruled_out={str(r['ruled_out']).lower()}")
    run.write("lattice.json", _dump_json(reports if len(reports) > 1 else reports[0]))
    run.manifest({"family": args.family})
    return 0


def cmd_tess(args, run: Run) -> int:
    rep = tessellation_report(args.kind, args.fine_scale, args.window)
    print(f"{args.kind} at fine scale {format_exact(args.fine_scale)}: "
          f"{rep['straddle']['verdict']}; all lines contained: "
          f"{str(rep['all_lines_contained']).lower()}")
    run.write("tess.json", _dump_json(rep))
    if args.svg:
        coarse = make_tessellation(args.kind)
        c0 = coarse.cell(((0, 0), 0))
        win = Window.around(c0.centroid(), 2)
        fine = make_tessellation(args.kind, args.fine_scale)
        st = straddle_test(coarse, fine, win)
        run.write("tess.svg", draw_tessellations(win, coarse, [fine], st, title=args.kind))
    run.manifest({"kind": args.kind, "fine_scale": format_exact(args.fine_scale),
                  "window": args.window})
    return 0


def _families(args) -> FineFamilySpec:
    if args.preset:
        if args.kind != "hexagonal":
            raise UsageError("presets are defined for the hexagonal tessellation")
        if args.shift:
            raise UsageError("--preset and --shift are exclusive")
        return lozenge_families() if args.preset == "lozenge" else propagation_families()
    base = make_tessellation(args.kind, args.fine_scale)
    shifts = [parse_shift(s) for s in args.shift] or [(0, 0)]
    return FineFamilySpec(base, tuple(shifts))


def cmd_refine(args, run: Run) -> int:
    try:
        families = _families(args)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    coarse = make_tessellation(args.kind)
    rep = check_refinability(coarse, families, window_radius=args.window)
    out = rep.to_json()
    if rep.refinable and args.check_points:
        out["spot_check"] = spot_check(coarse, families, rep, args.check_points, args.seed)
    if not rep.refinable and families.J > 1:
        cell = rep.cells[0]
        seed = _trace_seed(cell, args.trace_at)
        tr = propagation_trace(cell.system, seed)
        sysm = cell.system
        out["propagation"] = {
            "seed_region": seed,
            "found": tr.found,
            "steps": [unknown_name(sysm.unknowns[s.equal[0]]) + " = "
                      + unknown_name(sysm.unknowns[s.equal[1]]) for s in tr.steps],
            "contradiction": [sysm.describe(r) for r in tr.contradiction] if tr.found else None,
        }
    print(f"{args.kind}: {out['verdict']}")
    print(out["narrative"])
    run.write("refine.json", _dump_json(out))
    if args.svg:
        run.write("refine.svg", draw_report(rep))
    run.manifest({"kind": args.kind, "fine_scale": format_exact(args.fine_scale),
                  "shifts": args.shift, "preset": args.preset, "window": args.window,
                  "check_points": args.check_points})
    return 0


def _trace_seed(cell, at):
    arr = cell.arrangement
    if at:
        return region_at(arr, parse_shift(at))
    try:
        return region_at(arr, arr.coarse_cell.centroid())
    except ValueError:
        return next(i for i, r in enumerate(arr.regions) if r.target == 1)


def cmd_error_exp(args, run: Run) -> int:
    if not args.eps:
        raise UsageError("--eps needs at least one value")
    if any(e <= 0 for e in args.eps):
        raise UsageError("epsilon values must be positive")
    if not args.levels or any(l < 0 for l in args.levels):
        raise UsageError("--levels needs non-negative integers")
    cfg = ErrorExperimentConfig(kind=args.kind, epsilons=tuple(args.eps),
                                levels=tuple(sorted(set(args.levels))))
    try:
        rows = run_error_experiment(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epsilon", "level", "error", "quadrature_resolution"])
    for r in rows:
        w.writerow([repr(r["epsilon"]), r["level"], f"{r['error']:.12e}", r["quadrature_resolution"]])
    text = buf.getvalue()
    sys.stdout.write(text)
    flagged = anomalies(rows)
    if flagged:
        summary = "anomaly: err(level+1) > err(level) at " + ", ".join(
            f"eps={e:g} level {l}->{l + 1}" for e, l in flagged)
    else:
        summary = "no anomaly: error non-increasing under refinement"
    print(summary)
    run.write("error.csv", text)
    run.manifest({"kind": args.kind, "eps": args.eps, "levels": cfg.levels})
    return 0


def cmd_spline_sample(args, run: Run) -> int:
    try:
        sp = sample_convolved_spline(args.kind, args.m, args.resolution)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dev = partition_of_unity_check(sp)
    summary = {
        "kind": args.kind, "m": args.m, "resolution": args.resolution,
        "h": repr(sp.h), "shape": list(sp.values.shape), "origin": [repr(c) for c in sp.origin],
        "min_value": repr(float(sp.values.min())), "max_value": repr(float(sp.values.max())),
        "partition_of_unity_max_deviation": repr(dev), "support_ring": support_ring(sp),
    }
    print(_dump_json(summary), end="")
    buf = io.BytesIO()
    np.save(buf, sp.values, allow_pickle=False)
    stem = f"spline_{args.kind}_m{args.m}_r{args.resolution}"
    run.write(stem + ".npy", buf.getvalue(), binary=True)
    run.write(stem + ".json", _dump_json(summary))
    run.manifest({"kind": args.kind, "m": args.m, "resolution": args.resolution})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vorefine", description=__doc__.splitlines()[0])
    p.add_argument("--out", metavar="DIR", help="write artifacts and manifest.json here")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized checks")
    p.add_argument("--svg", action="store_true", help="also write SVG drawings")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("lattice", help="obtuse-facet test for a root lattice")
    q.add_argument("family", nargs="+", help='e.g. "A:5", "Dstar:4", "cube-diag:3", "E8", "tri2d"')
    q.set_defaults(func=cmd_lattice)

    q = sub.add_parser("tess", help="straddle and line-containment tests")
    q.add_argument("kind", choices=KINDS)
    q.add_argument("--fine-scale", type=_fraction_arg, default=Fraction(1, 2))
    q.add_argument("--window", type=int, default=2, help="window radius in cell diameters")
    q.set_defaults(func=cmd_tess)

    q = sub.add_parser("refine", help="exact refinability decision with certificate")
    q.add_argument("kind", choices=KINDS)
    q.add_argument("--fine-scale", type=_fraction_arg, default=Fraction(1, 2))
    q.add_argument("--shift", action="append", default=[],
                   help='exact shift "x,y", repeat for several families')
    q.add_argument("--preset", choices=("lozenge", "propagation"))
    q.add_argument("--window", type=int, default=3, help="window radius in cell diameters")
    q.add_argument("--check-points", type=int, default=0,
                   help="exact spot check at this many random rational points")
    q.add_argument("--trace-at", help='point "x,y" picking the propagation seed region')
    q.set_defaults(func=cmd_refine)

    q = sub.add_parser("error-exp", help="L2 error of the smoothed indicator per level")
    q.add_argument("--eps", type=_float_list, required=True, help="e.g. 0.04,0.02,0.01")
    q.add_argument("--levels", type=_int_list, default=[0, 1], help="e.g. 0,1,2")
    q.add_argument("--kind", choices=("hexagonal", "square"), default="hexagonal")
    q.set_defaults(func=cmd_error_exp)

    q = sub.add_parser("spline-sample", help="sampled m-fold convolved cell indicator")
    q.add_argument("kind", choices=SPLINE_KINDS)
    q.add_argument("m", type=int)
    q.add_argument("--resolution", type=int, default=256)
    q.set_defaults(func=cmd_spline_sample)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run = Run(args)
    try:
        return args.func(args, run)
    except (UsageError, ValueError) as exc:
        print(f"vorefine {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
