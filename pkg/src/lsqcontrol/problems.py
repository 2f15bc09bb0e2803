"""Problem data, the feasible lift of the data, and control extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corrector import Variant, global_matrices, omega_indices
from .descent import DescentOptions
from .grid import SpaceTimeGrid, make_grid
from .linalg import assemble, cg_solve


class IncompatibleDataError(ValueError):
    pass


@dataclass
class ProblemSpec:
    variant: Variant
    T: float
    u0: np.ndarray
    uT: np.ndarray
    Nx: int
    Nt: int
    options: DescentOptions = field(default_factory=DescentOptions)

    def grid(self) -> SpaceTimeGrid:
        return make_grid(self.T, self.Nx, self.Nt)


@dataclass(frozen=True)
class Control:
    kind: str  # "boundary" or "inner"
    t: np.ndarray
    x: np.ndarray | None
    values: np.ndarray  # (Nt+1,) for boundary, (Nt+1, Nx+1) for inner


def _check_compatible(spec: ProblemSpec, atol=1e-12):
    ends = [0] if not spec.variant.is_inner else [0, -1]
    for name, data in (("u0", spec.u0), ("uT", spec.uT)):
        if len(data) != spec.Nx + 1:
            raise IncompatibleDataError(f"{name} has {len(data)} samples, expected {spec.Nx + 1}")
        for e in ends:
            if abs(data[e]) > atol:
                where = "x=0" if e == 0 else "x=1"
                raise IncompatibleDataError(f"{name} must vanish at {where}, got {data[e]!r}")


def lift_data(spec: ProblemSpec, grid: SpaceTimeGrid) -> np.ndarray:
    """Linear-in-time blend of the initial and final data."""
    _check_compatible(spec)
    s = (grid.t / grid.T)[:, None]
    u0 = np.asarray(spec.u0, dtype=float)[None, :]
    uT = np.asarray(spec.uT, dtype=float)[None, :]
    U = (1.0 - s) * u0 + s * uT
    U[0], U[-1] = u0[0], uT[0]  # exact data at the end slices
    U[:, 0] = 0.0
    if spec.variant.is_inner:
        U[:, -1] = 0.0
    return U.ravel()


def extract_boundary_control(u, grid: SpaceTimeGrid) -> Control:
    return Control("boundary", grid.t.copy(), None, grid.as_array(u)[:, -1].copy())


def extract_inner_control(u, grid: SpaceTimeGrid, omega, tol: float = 1e-12) -> Control:
    """Mass projection of the heat residual onto nodes strictly inside omega."""
    ia, ib = omega_indices(grid, omega)
    nodes = np.zeros((grid.Nt + 1, grid.Nx + 1), dtype=bool)
    nodes[:, ia + 1:ib] = True
    idx = np.flatnonzero(nodes.ravel())
    f = np.zeros(grid.n_nodes)
    if idx.size:
        gm = global_matrices(grid)
        u = np.asarray(u, dtype=float)
        # every element touching these nodes lies inside q_T
        r = ((gm["mixed"] @ u) + (gm["stiff_x"] @ u))[idx]
        Mq = _mass_on(grid, idx)
        f[idx], _ = cg_solve(Mq, r, tol=tol)
    return Control("inner", grid.t.copy(), grid.x.copy(), grid.as_array(f).copy())


def _mass_on(grid, idx):
    M = global_matrices(grid)["mass"]
    local = np.full(grid.n_nodes, -1)
    local[idx] = np.arange(idx.size)
    rows = np.repeat(np.arange(M.n), np.diff(M.indptr))
    r, c = local[rows], local[M.indices]
    sel = (r >= 0) & (c >= 0)
    return assemble(idx.size, (r[sel], c[sel], M.data[sel]))

