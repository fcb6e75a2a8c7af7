"""Reduced (r, a) dynamics on both sides of the Hopf point.

Writes ``trajectory.csv`` and ``phase_portrait.csv`` per lambda under
``--out`` and prints the late-time behaviour of each run.
"""
import argparse
from pathlib import Path

import numpy as np

from curveflow.cli import main as cli_main
from curveflow.reduced_ode import LAMBDA_CYCLE, LAMBDA_STABLE, critical_lambda, jacobian_trace_det, HopfParams


def summarize(path: Path, lam: float) -> str:
    data = np.genfromtxt(path / "trajectory.csv", delimiter=",", names=True)
    late = data["t"] >= 0.5 * data["t"][-1]
    r = data["r"][late]
    return f"lambda={lam}: late r in [{r.min():.6f}, {r.max():.6f}]"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lambdas", default=f"{LAMBDA_CYCLE},{LAMBDA_STABLE}")
    parser.add_argument("--t-final", type=float, default=200.0)
    parser.add_argument("--out", type=Path, default=Path("hopf_out"))
    args = parser.parse_args()

    lam0 = critical_lambda()
    print(f"critical lambda {lam0:.9f}")
    for text in args.lambdas.split(","):
        lam = float(text)
        td = jacobian_trace_det(HopfParams(lam))
        out = args.out / f"lambda_{lam:g}"
        code = cli_main(["hopf", "--lambda", text, "--t-final", str(args.t_final), "--out", str(out)])
        if code:
            raise SystemExit(code)
        print(f"trace {td.trace:+.4f}, det {td.det:.4f}; " + summarize(out, lam))


if __name__ == "__main__":
    main()
