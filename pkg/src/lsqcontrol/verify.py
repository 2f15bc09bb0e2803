"""Independent checks: a Crank-Nicolson forward heat solver and error metrics.

The forward solver uses finite differences in space and Crank-Nicolson in
time, a different discretization from the space-time elements used by the
optimizer, so agreement between the two is evidence rather than tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded

from .corrector import Variant, solve_corrector
from .descent import pairing
from .grid import SpaceTimeGrid
from .problems import Control


@dataclass(frozen=True)
class ForwardGrid:
    Nx_f: int = 128
    Nt_f: int = 128
    theta: float = 0.5

    def __post_init__(self):
        if self.Nx_f < 2 or self.Nt_f < 2:
            raise ValueError("forward grid needs Nx_f >= 2 and Nt_f >= 2")
        if self.theta != 0.5:
            raise ValueError("only Crank-Nicolson (theta=1/2) is supported")


def _source(control: Control, variant: Variant, t, x):
    if control.kind != "inner":
        return None
    interp = RegularGridInterpolator((control.t, control.x), control.values,
                                     bounds_error=False, fill_value=0.0)
    tt, xx = np.meshgrid(t, x, indexing="ij")
    s = interp(np.stack([tt.ravel(), xx.ravel()], axis=1)).reshape(tt.shape)
    a, b = variant.omega
    return s * ((x >= a) & (x <= b))[None, :]


def forward_heat(u0, control: Control, fgrid: ForwardGrid, variant: Variant):
    """March u_t = u_xx (+ chi_omega f) to t=T; return ``(x, u(T, x))`` on the forward grid."""
    _, x, U = heat_trajectory(u0, control, fgrid, variant)
    return x, U[-1]


def heat_trajectory(u0, control: Control, fgrid: ForwardGrid, variant: Variant):
    """Crank-Nicolson solution at every time level, as ``(t, x, U[k, i])``.

    ``u0`` is sampled on a uniform grid of [0, 1] of any size and linearly
    interpolated onto the forward grid.  The time horizon is ``control.t[-1]``.
    """
    T = float(control.t[-1])
    N, M = fgrid.Nx_f, fgrid.Nt_f
    x = np.linspace(0.0, 1.0, N + 1)
    t = np.linspace(0.0, T, M + 1)
    h, dt = 1.0 / N, T / M
    u0 = np.asarray(u0, dtype=float)
    u = np.interp(x, np.linspace(0.0, 1.0, u0.size), u0)

    if control.kind == "boundary":
        right = np.interp(t, control.t, control.values)
        src = np.zeros((M + 1, N + 1))
    else:
        right = np.zeros(M + 1)
        src = _source(control, variant, t, x)

    n = N - 1
    lam = dt / (2.0 * h * h)
    ab = np.zeros((3, n))
    ab[0, 1:] = -lam
    ab[1, :] = 1.0 + 2.0 * lam
    ab[2, :-1] = -lam
    u[0] = 0.0
    u[-1] = right[0]
    U = np.empty((M + 1, N + 1))
    U[0] = u
    for k in range(M):
        ui = u[1:-1]
        rhs = (1.0 - 2.0 * lam) * ui
        rhs[1:] += lam * ui[:-1]
        rhs[:-1] += lam * ui[1:]
        rhs[-1] += lam * (right[k] + right[k + 1])
        rhs += 0.5 * dt * (src[k, 1:-1] + src[k + 1, 1:-1])
        u = np.concatenate(([0.0], solve_banded((1, 1), ab, rhs), [right[k + 1]]))
        U[k + 1] = u
    return t, x, U


def l2_error(a, b, h: float) -> float:
    """Trapezoidal L2 norm of ``a - b`` for samples with spacing ``h``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    d2 = (a - b) ** 2
    return float(np.sqrt(h * (d2.sum() - 0.5 * (d2[0] + d2[-1]))))


def fd_gradient_check(grid: SpaceTimeGrid, variant: Variant, u, U, eta: float = 1e-3,
                      tol: float = 1e-12) -> float:
    """Relative gap between a central difference of E and the gradient pairing."""
    u, U = np.asarray(u, dtype=float), np.asarray(U, dtype=float)
    v = solve_corrector(grid, variant, u, tol).v
    exact = pairing(grid, variant, v, U)
    if not np.any(U):
        return 0.0
    Ep = solve_corrector(grid, variant, u + eta * U, tol).energy
    Em = solve_corrector(grid, variant, u - eta * U, tol).energy
    fd = (Ep - Em) / (2.0 * eta)
    return abs(fd - exact) / max(abs(exact), 1e-14)


def convergence_order(errors, spacings) -> float:
    """Least-squares slope of log(error) against log(h)."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(spacings, dtype=float)
    if e.size < 2 or e.size != h.size:
        raise ValueError("need at least two (error, h) pairs of equal length")
    if np.any(e <= 0):
        raise ValueError("errors must be strictly positive")
    if np.any(np.diff(h) >= 0):
        raise ValueError("grid spacings must be strictly decreasing")
    return float(np.polyfit(np.log(h), np.log(e), 1)[0])
