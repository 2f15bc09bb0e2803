"""Corrector problems and the error functional.

For a candidate field ``u`` the corrector ``v`` vanishes on the boundary of
Q_T and solves ``a(v, phi) = l_u(phi)`` for every interior test function:

* boundary   -- a = full H1(Q_T) product, l_u(phi) = -int(u_t phi + u_x phi_x)
* extended   -- a = full H1(Q_T) product, l_u(phi) =  int(u phi_t - u_x phi_x)
* inner      -- a = int(v_t phi_t + v_x phi_x), l_u = heat residual of u tested
                only against nodes outside the control interval omega

The loads are all ``l_u = -(B u)`` restricted to interior nodes, with ``B``
a fixed sparse "residual matrix" per variant; the gradient code reuses it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import SpaceTag, SpaceTimeGrid, dof_mask, element_integrals
from .linalg import SolveReport, SparseMatrix, assemble, cg_solve

BOUNDARY = "boundary"
EXTENDED = "boundary-extended"
INNER = "inner"
KINDS = (BOUNDARY, EXTENDED, INNER)


@dataclass(frozen=True)
class Variant:
    kind: str
    omega: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variant {self.kind!r}; expected one of {KINDS}")
        if self.kind == INNER:
            if self.omega is None:
                raise ValueError("inner variant needs omega=(a, b)")
            a, b = self.omega
            if not 0.0 < a < b < 1.0:
                raise ValueError(f"omega must satisfy 0 < a < b < 1, got {self.omega}")
        elif self.omega is not None:
            raise ValueError("omega only applies to the inner variant")

    @property
    def is_inner(self) -> bool:
        return self.kind == INNER


BOUNDARY_H1 = Variant(BOUNDARY)
BOUNDARY_EXTENDED = Variant(EXTENDED)


def inner_variant(a: float, b: float) -> Variant:
    return Variant(INNER, (float(a), float(b)))


def omega_indices(grid: SpaceTimeGrid, omega) -> tuple[int, int]:
    """Grid-line indices ``(ia, ib)`` of omega=(a, b); raises if not aligned."""
    out = []
    for end in omega:
        i = round(end * grid.Nx)
        if abs(i - end * grid.Nx) > 1e-9:
            raise ValueError(f"omega endpoint {end} is not on a grid line (Nx={grid.Nx})")
        out.append(int(i))
    return out[0], out[1]


def _coo(grid: SpaceTimeGrid, local: np.ndarray):
    nodes = grid.element_nodes()
    rows = np.repeat(nodes, 4, axis=1).ravel()
    cols = np.tile(nodes, (1, 4)).ravel()
    vals = np.tile(local.ravel(), nodes.shape[0])
    return rows, cols, vals


def _restrict(n_keep: int, keep: np.ndarray, n: int, coo) -> SparseMatrix:
    local = np.full(n, -1, dtype=np.int64)
    local[keep] = np.arange(keep.size)
    rows, cols, vals = coo
    r, c = local[rows], local[cols]
    sel = (r >= 0) & (c >= 0)
    return assemble(n_keep, (r[sel], c[sel], vals[sel]))


@lru_cache(maxsize=32)
def global_matrices(grid: SpaceTimeGrid) -> dict[str, SparseMatrix]:
    """Mass, stiffness and mixed matrices over all nodes (no boundary conditions)."""
    ei = element_integrals(grid.hx, grid.ht)
    n = grid.n_nodes
    return {name: assemble(n, _coo(grid, getattr(ei, name)))
            for name in ("mass", "stiff_x", "stiff_t", "mixed")}


def _energy_local(grid, variant):
    ei = element_integrals(grid.hx, grid.ht)
    local = ei.stiff_x + ei.stiff_t
    if not variant.is_inner:
        local = local + ei.mass
    return local


@lru_cache(maxsize=32)
def energy_matrix(grid: SpaceTimeGrid, variant: Variant) -> SparseMatrix:
    """Energy inner product over all nodes: full H1 (boundary variants) or Dirichlet stiffness (inner)."""
    return assemble(grid.n_nodes, _coo(grid, _energy_local(grid, variant)))


@lru_cache(maxsize=32)
def assemble_operator(grid: SpaceTimeGrid, variant: Variant) -> SparseMatrix:
    free = dof_mask(grid, SpaceTag.CORRECTOR_H10).free
    return _restrict(free.size, free, grid.n_nodes, _coo(grid, _energy_local(grid, variant)))


@lru_cache(maxsize=32)
def h1_gram(grid: SpaceTimeGrid, tag: SpaceTag) -> SparseMatrix:
    """H1(Q_T) Gram matrix restricted to the free nodes of ``tag``."""
    ei = element_integrals(grid.hx, grid.ht)
    free = dof_mask(grid, tag).free
    return _restrict(free.size, free, grid.n_nodes, _coo(grid, ei.mass + ei.stiff_x + ei.stiff_t))


def inner_test_rows(grid: SpaceTimeGrid, omega) -> np.ndarray:
    """Boolean node mask: True where the heat residual is penalised (x outside the open omega)."""
    ia, ib = omega_indices(grid, omega)
    col = np.ones(grid.Nx + 1, dtype=bool)
    col[ia + 1:ib] = False
    return np.tile(col, grid.Nt + 1)


@lru_cache(maxsize=32)
def residual_matrix(grid: SpaceTimeGrid, variant: Variant) -> SparseMatrix:
    """Matrix ``B`` over all nodes with corrector load ``-(B u)`` on interior rows."""
    ei = element_integrals(grid.hx, grid.ht)
    if variant.kind == EXTENDED:
        # int(u phi_t - u_x phi_x) = -(B u)  with  B = K_x - mixed^T
        local = ei.stiff_x - ei.mixed.T
    else:
        local = ei.mixed + ei.stiff_x
    rows, cols, vals = _coo(grid, local)
    if variant.is_inner:
        keep = inner_test_rows(grid, variant.omega)[rows]
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    return assemble(grid.n_nodes, (rows, cols, vals))


def assemble_load(grid: SpaceTimeGrid, variant: Variant, u) -> np.ndarray:
    if variant.is_inner:
        omega_indices(grid, variant.omega)
    free = dof_mask(grid, SpaceTag.CORRECTOR_H10).free
    return -(residual_matrix(grid, variant) @ np.asarray(u, dtype=float))[free]


def energy_product(grid: SpaceTimeGrid, variant: Variant, a, b) -> float:
    return float(np.asarray(a) @ (energy_matrix(grid, variant) @ np.asarray(b)))


@dataclass(frozen=True)
class CorrectorSolution:
    v: np.ndarray
    energy: float
    report: SolveReport


def solve_h10(grid: SpaceTimeGrid, variant: Variant, load, tol: float = 1e-10):
    """Solve the corrector operator against a load on interior nodes; return the full-grid field."""
    free = dof_mask(grid, SpaceTag.CORRECTOR_H10).free
    x, report = cg_solve(assemble_operator(grid, variant), load, tol=tol)
    v = np.zeros(grid.n_nodes)
    v[free] = x
    return v, report


def solve_corrector(grid: SpaceTimeGrid, variant: Variant, u, tol: float = 1e-10) -> CorrectorSolution:
    v, report = solve_h10(grid, variant, assemble_load(grid, variant, u), tol)
    return CorrectorSolution(v, 0.5 * energy_product(grid, variant, v, v), report)
