"""L2 error of the smoothed coarse indicator from level-0..L piecewise constants."""

import argparse
import csv
import sys
import time

from vorefine.metrics import ErrorExperimentConfig, anomalies, run_error_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    ap.add_argument("--levels", type=int, default=2, help="highest level")
    ap.add_argument("--csv", help="write rows here instead of stdout")
    args = ap.parse_args()

    for kind in ("hexagonal", "square"):
        t0 = time.perf_counter()
        cfg = ErrorExperimentConfig(kind, tuple(args.eps), tuple(range(args.levels + 1)))
        rows = run_error_experiment(cfg)
        print(f"# {kind}  ({time.perf_counter() - t0:.1f} s)")
        fh = open(args.csv.replace(".csv", f"_{kind}.csv"), "w", newline="") if args.csv else sys.stdout
        w = csv.writer(fh)
        w.writerow(["epsilon", "level", "error", "quadrature_resolution"])
        for r in rows:
            w.writerow([r["epsilon"], r["level"], f"{r['error']:.6g}", r["quadrature_resolution"]])
        if fh is not sys.stdout:
            fh.close()
        err = {(r["epsilon"], r["level"]): r["error"] for r in rows}
        for e in args.eps:
            if (e, 1) in err:
                print(f"# eps={e}: err1/err0 = {err[(e, 1)] / err[(e, 0)]:.3f}")
        print(f"# anomalies: {anomalies(rows) or 'none'}")


if __name__ == "__main__":
    main()
