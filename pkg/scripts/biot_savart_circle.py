"""Circle binormal field against the adaptive-quadrature oracle.

Compares two ways of putting a discrete unit circle under the midpoint rule:
nodes on the circle with the field taken at a node (what the flow uses), and
a circumscribed polygon whose segment midpoints lie on the circle with the
field taken at one of those midpoints.
"""
import argparse
import math

import numpy as np
from scipy.integrate import quad

from curveflow.forces import BiotSavartSpec, biot_savart_at


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--delta", type=float, default=0.1)
    parser.add_argument("--meshes", default="100,200,400,800")
    args = parser.parse_args()

    d2 = args.delta**2
    oracle = quad(lambda s: (1 - math.cos(s)) * (d2 + 2 * (1 - math.cos(s))) ** -1.5, 0, 2 * math.pi,
                  points=[math.pi], epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    spec = BiotSavartSpec(args.delta)
    print(f"oracle {oracle:.12f}")
    print("M,error_at_node,error_at_midpoint_of_circumscribed")
    for M in map(int, args.meshes.split(",")):
        w = 2 * np.pi * np.arange(M) / M
        nodes = np.column_stack([np.cos(w), np.sin(w), np.zeros(M)])
        at_node = -biot_savart_at(nodes[0], nodes, spec)[2]
        outer = nodes / math.cos(math.pi / M)
        midpoint = np.array([math.cos(math.pi / M), math.sin(math.pi / M), 0.0])
        at_mid = -biot_savart_at(midpoint, outer, spec)[2]
        print(f"{M},{abs(at_node - oracle):.3e},{abs(at_mid - oracle):.3e}")


if __name__ == "__main__":
    main()
