"""Convergence table for the manufactured shrinking-circle problem.

    python scripts/run_eoc.py                       # meshes 100..500, default step control
    python scripts/run_eoc.py --no-stability-cap    # adaptive control alone; the orders degrade
"""
import argparse
import time

from curveflow.eoc import DEFAULT_MESHES, eoc_harness


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--meshes", default=",".join(map(str, DEFAULT_MESHES)))
    parser.add_argument("--tol", type=float, default=1e-3)
    parser.add_argument("--t-final", type=float, default=0.45)
    parser.add_argument("--stability-factor", type=float, default=0.5)
    parser.add_argument("--no-stability-cap", action="store_true", help="drop the geometric step cap")
    args = parser.parse_args()

    factor = None if args.no_stability_cap else args.stability_factor
    start = time.perf_counter()
    report = eoc_harness([int(m) for m in args.meshes.split(",")], T_final=args.t_final, tol=args.tol,
                         integrator={"stability_factor": factor})
    print(report.table())
    print("steps/rejections:", ", ".join(f"M={r.M}: {r.steps}/{r.rejections}" for r in report.rows))
    print(f"{time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main()
