"""Grid refinement of the corrector and of the discrete minimum.

Prints the corrector energy of the exact heat solution e^t sinh(x) and the
descent minimum for the sine-to-ramp data on a sequence of grids.

    python scripts/refinement_study.py --grids 16,32,64
"""

import argparse

import numpy as np

from lsqcontrol import BOUNDARY_H1, DescentOptions, ProblemSpec, lift_data, make_grid, minimize, solve_corrector


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grids", default="16,32,64")
    ap.add_argument("--maxit", type=int, default=6000)
    args = ap.parse_args()

    print(f"{'N':>5} {'E(e^t sinh x)':>15} {'m_h':>12} {'iters':>6}")
    for N in (int(s) for s in args.grids.split(",")):
        g = make_grid(1.0, N, N)
        E = solve_corrector(g, BOUNDARY_H1, g.interpolate(lambda t, x: np.exp(t) * np.sinh(x))).energy
        u0 = np.sin(np.pi * g.x)
        u0[-1] = 0.0
        ub = lift_data(ProblemSpec(BOUNDARY_H1, 1.0, u0, 0.2 * g.x, N, N), g)
        res = minimize(g, BOUNDARY_H1, ub, DescentOptions(maxit=args.maxit))
        print(f"{N:5d} {E:15.4e} {res.energy:12.4e} {res.iterations:6d}")


if __name__ == "__main__":
    main()
