"""Single-family and overcomplete hexagonal refinability, with certificates and drawings."""

import argparse
import json
import time
from fractions import Fraction
from pathlib import Path

from vorefine.exactnum import QuadExt
from vorefine.refine import (
    FineFamilySpec,
    check_refinability,
    lozenge_families,
    propagation_families,
    propagation_trace,
    region_at,
    unknown_name,
)
from vorefine.svg import draw_report
from vorefine.tess2d import make_tessellation

CASES = {
    "hex_half": lambda: FineFamilySpec.single("hexagonal", Fraction(1, 2)),
    "hex_third": lambda: FineFamilySpec.single("hexagonal", Fraction(1, 3)),
    "lozenge": lozenge_families,
    "propagation": propagation_families,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/overcomplete")
    ap.add_argument("--window", type=int, default=3)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    hexa = make_tessellation("hexagonal")
    for name, make in CASES.items():
        t0 = time.perf_counter()
        fam = make()
        rep = check_refinability(hexa, fam, args.window)
        js = rep.to_json()
        c = rep.cells[0]
        line = f"{name:<12} J={fam.J}  {rep.verdict:<14} regions={len(c.system.equations):<5}"
        if not c.result.feasible:
            line += f" certificate={len(c.result.certificate)} equations"
        if name == "propagation":
            seed = region_at(c.arrangement, (QuadExt(Fraction(1, 2)), QuadExt(Fraction(1, 4))))
            tr = propagation_trace(c.system, seed)
            js["propagation"] = [unknown_name(c.system.unknowns[s.equal[0]]) + " = "
                                 + unknown_name(c.system.unknowns[s.equal[1]]) for s in tr.steps]
            for s in js["propagation"]:
                print("    ", s)
            if tr.found:
                r1, r0 = tr.contradiction
                print("     ", c.system.describe(r1), " and ", c.system.describe(r0))
        (out / f"{name}.json").write_text(json.dumps(js, indent=2, sort_keys=True) + "\n")
        (out / f"{name}.svg").write_text(draw_report(rep))
        print(f"{line}  {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
