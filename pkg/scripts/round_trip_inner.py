"""Inner control on omega = (0.25, 0.75): reach a target produced by a known source.

    python scripts/round_trip_inner.py --N 64
"""

import argparse

import numpy as np

from lsqcontrol import (
    Control,
    DescentOptions,
    ForwardGrid,
    ProblemSpec,
    extract_inner_control,
    forward_heat,
    inner_variant,
    lift_data,
    make_grid,
    minimize,
)
from lsqcontrol.verify import l2_error

OMEGA = (0.25, 0.75)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--T", type=float, default=0.5)
    args = ap.parse_args()

    V, T, N = inner_variant(*OMEGA), args.T, args.N
    tf, xf = np.linspace(0, T, 257), np.linspace(0, 1, 257)
    src = (10 * (1 + tf[:, None]) * np.sin(np.pi * (xf[None, :] - 0.25) / 0.5)
           * ((xf >= 0.25) & (xf <= 0.75))[None, :])
    xT, uT_fine = forward_heat(np.sin(np.pi * xf), Control("inner", tf, xf, src), ForwardGrid(256, 256), V)

    g = make_grid(T, N, N)
    u0, uT = np.sin(np.pi * g.x), np.interp(g.x, xT, uT_fine)
    u0[[0, -1]] = uT[[0, -1]] = 0.0
    res = minimize(g, V, lift_data(ProblemSpec(V, T, u0, uT, N, N), g), DescentOptions())
    x2, uf = forward_heat(u0, extract_inner_control(res.u, g, OMEGA), ForwardGrid(), V)
    target = np.interp(x2, xT, uT_fine)
    rt = l2_error(uf, target, x2[1]) / l2_error(target, 0 * target, x2[1])
    print(f"E {res.initial_energy:.3e} -> {res.energy:.3e} in {res.iterations} iterations ({res.reason})")
    print(f"forward round-trip error {rt:.3e}")


if __name__ == "__main__":
    main()
