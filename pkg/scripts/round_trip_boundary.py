"""Recover the boundary control of e^t sinh(x) and replay it through the forward solver.

    python scripts/round_trip_boundary.py --N 64
"""

import argparse
import time

import numpy as np

from lsqcontrol import (
    BOUNDARY_H1,
    DescentOptions,
    ForwardGrid,
    ProblemSpec,
    extract_boundary_control,
    forward_heat,
    lift_data,
    make_grid,
    minimize,
)
from lsqcontrol.verify import l2_error


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--maxit", type=int, default=500)
    args = ap.parse_args()

    N = args.N
    g = make_grid(1.0, N, N)
    u0, uT = np.sinh(g.x), np.e * np.sinh(g.x)
    start = time.perf_counter()
    res = minimize(g, BOUNDARY_H1, lift_data(ProblemSpec(BOUNDARY_H1, 1.0, u0, uT, N, N), g),
                   DescentOptions(maxit=args.maxit))
    ctl = extract_boundary_control(res.u, g)
    exact = np.exp(ctl.t) * np.sinh(1.0)
    ferr = l2_error(ctl.values, exact, g.ht) / l2_error(exact, 0 * exact, g.ht)
    xf, uf = forward_heat(u0, ctl, ForwardGrid(), BOUNDARY_H1)
    target = np.e * np.sinh(xf)
    rt = l2_error(uf, target, xf[1]) / l2_error(target, 0 * target, xf[1])
    print(f"E {res.initial_energy:.3e} -> {res.energy:.3e} in {res.iterations} iterations "
          f"({time.perf_counter() - start:.1f}s)")
    print(f"relative control error {ferr:.3e}, forward round-trip error {rt:.3e}")


if __name__ == "__main__":
    main()
