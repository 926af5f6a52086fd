#!/usr/bin/env python3
"""Tabulate the solvability regime over a (theta1, theta2) grid and print a
compact character map (strongest regime = '2', weakest = '.')."""

import argparse

import numpy as np

from leray_alpha import classify_regime

GLYPHS = {"outside": ".", "local-only": "l", "global-H1": "1", "global-H0": "2"}


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=40)
    parser.add_argument("--theta1-max", type=float, default=2.0)
    parser.add_argument("--theta2-max", type=float, default=2.0)
    args = parser.parse_args()

    theta1_grid = np.linspace(0.0, args.theta1_max, args.points)
    theta2_grid = np.linspace(args.theta2_max / args.points, args.theta2_max, args.points)
    print("# rows: theta2 descending; columns: theta1 ascending")
    print(f"# legend: {GLYPHS}")
    for t2 in reversed(theta2_grid):
        row = "".join(GLYPHS[classify_regime(t1, t2).verdict] for t1 in theta1_grid)
        print(f"{t2:5.2f} {row}")


if __name__ == "__main__":
    main()
