"""Gradient of the error functional and the descent loop.

The derivative of E at u in direction U is ``-v . (B U)`` where ``v`` is the
corrector of ``u`` and ``B`` the variant's residual matrix; for the boundary
variant this is ``-int(U_t v + U_x v_x)``.  Gradients are represented in the
H1(Q_T) metric on the variation space.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .corrector import (
    Variant,
    assemble_operator,
    energy_matrix,
    h1_gram,
    residual_matrix,
    solve_corrector,
    solve_h10,
)
from .grid import DofMask, SpaceTag, SpaceTimeGrid, dof_mask
from .linalg import cg_solve

log = logging.getLogger(__name__)


class NumericalFailure(RuntimeError):
    pass


def variation_tag(variant: Variant) -> SpaceTag:
    return SpaceTag.VARIATION_INNER if variant.is_inner else SpaceTag.VARIATION_BOUNDARY


def variation_mask(grid: SpaceTimeGrid, variant: Variant) -> DofMask:
    return dof_mask(grid, variation_tag(variant))


def _check_variation(grid, variant, U):
    if np.any(U[variation_mask(grid, variant).fixed] != 0.0):
        raise ValueError("direction is nonzero on fixed nodes of the variation space")


def pairing(grid: SpaceTimeGrid, variant: Variant, v, U) -> float:
    """Directional derivative <E'(u), U> given the corrector ``v`` of ``u``."""
    U = np.asarray(U, dtype=float)
    _check_variation(grid, variant, U)
    return float(-(np.asarray(v) @ (residual_matrix(grid, variant) @ U)))


def _dual_gradient(grid, variant, v) -> np.ndarray:
    """Coefficients of E'(u) on the free variation nodes."""
    free = variation_mask(grid, variant).free
    return -residual_matrix(grid, variant).rmatvec(np.asarray(v, dtype=float))[free]


def riesz_gradient(grid: SpaceTimeGrid, variant: Variant, v, tol: float = 1e-10) -> np.ndarray:
    """H1(Q_T) representative of E'(u) in the variation space."""
    return _riesz(grid, variant, _dual_gradient(grid, variant, v), tol)[0]


def _riesz(grid, variant, dual, tol):
    tag = variation_tag(variant)
    gfree, report = cg_solve(h1_gram(grid, tag), dual, tol=tol)
    g = np.zeros(grid.n_nodes)
    g[dof_mask(grid, tag).free] = gfree
    return g, report


def corrector_response(grid: SpaceTimeGrid, variant: Variant, d, tol: float = 1e-10) -> np.ndarray:
    """Corrector of the direction ``d`` alone (zero data)."""
    free = dof_mask(grid, SpaceTag.CORRECTOR_H10).free
    load = -(residual_matrix(grid, variant) @ np.asarray(d, dtype=float))[free]
    return solve_h10(grid, variant, load, tol)[0]


@dataclass(frozen=True)
class Step:
    eta: float
    V: np.ndarray
    degenerate: bool


def exact_step(grid: SpaceTimeGrid, variant: Variant, v, d, tol: float = 1e-10) -> Step:
    """Minimiser of ``eta -> E(u + eta d)``; exact because E is quadratic."""
    V = corrector_response(grid, variant, d, tol)
    X = energy_matrix(grid, variant)
    XV = X @ V
    VV = float(V @ XV)
    if VV <= 0.0:
        return Step(0.0, V, True)
    return Step(-float(np.asarray(v) @ XV) / VV, V, False)


@dataclass
class DescentOptions:
    maxit: int = 500
    tol_g: float = 1e-8
    tol_E: float = 1e-10
    method: str = "cg"  # "cg" (conjugate gradient on the quadratic) or "sd" (steepest descent)
    record_every: int = 1
    solver_tol: float = 1e-10

    def __post_init__(self):
        if self.maxit < 1:
            raise ValueError("maxit must be >= 1")
        if not (self.tol_g > 0 and self.tol_E > 0 and self.solver_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.method not in ("cg", "sd"):
            raise ValueError(f"unknown descent method {self.method!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass
class RunResult:
    u: np.ndarray
    v: np.ndarray
    history: list[tuple[int, float, float]] = field(default_factory=list)
    energy: float = np.inf
    initial_energy: float = np.inf
    iterations: int = 0
    converged: bool = False
    reason: str = ""


def minimize(grid: SpaceTimeGrid, variant: Variant, ubar, opts: DescentOptions | None = None) -> RunResult:
    """Minimise E over ``ubar + A_0`` starting from ``ubar``."""
    opts = opts or DescentOptions()
    tol = opts.solver_tol
    u = np.array(ubar, dtype=float)
    if not np.all(np.isfinite(u)):
        raise NumericalFailure("data lift contains non-finite values")
    sol = solve_corrector(grid, variant, u, tol)
    v, E = sol.v, sol.energy
    if not np.isfinite(E):
        raise NumericalFailure("initial energy is not finite")

    X = energy_matrix(grid, variant)
    free = variation_mask(grid, variant).free
    res = RunResult(u=u, v=v, initial_energy=E)
    d = None
    gz_old = None
    g0 = None
    k = 0
    while True:
        dual = _dual_gradient(grid, variant, v)
        g, _ = _riesz(grid, variant, dual, tol)
        gz = float(g[free] @ dual)
        gnorm = np.sqrt(max(gz, 0.0))
        if g0 is None:
            g0 = gnorm
        last = E <= opts.tol_E or gnorm <= opts.tol_g * g0 or gnorm == 0.0 or k >= opts.maxit
        if k % opts.record_every == 0 or last:
            res.history.append((k, E, gnorm))
        if E <= opts.tol_E:
            res.converged, res.reason = True, "energy"
            break
        if gnorm <= opts.tol_g * g0 or gnorm == 0.0:
            res.converged, res.reason = True, "gradient"
            break
        if k >= opts.maxit:
            res.reason = "maxit"
            break

        if opts.method == "cg" and d is not None:
            d = -g + (gz / gz_old) * d
            if d[free] @ dual >= 0.0:  # lost descent property: restart
                d = -g
        else:
            d = -g
        gz_old = gz

        step = exact_step(grid, variant, v, d, tol)
        if step.degenerate:
            res.reason = "stationary-direction"
            break
        u = u + step.eta * d
        v = v + step.eta * step.V
        E_new = 0.5 * float(v @ (X @ v))
        if not np.isfinite(E_new):
            raise NumericalFailure(f"energy became non-finite at iteration {k + 1}")
        E = E_new
        k += 1
        log.debug("iter %d E=%.6e |g|=%.3e", k, E, gnorm)

    res.u, res.v, res.energy, res.iterations = u, v, E, k
    return res


def normal_equation_minimum(grid: SpaceTimeGrid, variant: Variant, ubar) -> tuple[float, np.ndarray]:
    """Brute-force discrete minimum of E via dense least squares (small grids only)."""
    free = variation_mask(grid, variant).free
    cfree = dof_mask(grid, SpaceTag.CORRECTOR_H10).free
    A = assemble_operator(grid, variant).toarray()
    B = residual_matrix(grid, variant).toarray()[cfree]
    L = np.linalg.cholesky(A)
    # v = -A^{-1} B u ; E = 1/2 |L^T v|^2 = 1/2 |L^{-1} B u|^2
    W = np.linalg.solve(L, B)
    ubar = np.asarray(ubar, dtype=float)
    sol, *_ = np.linalg.lstsq(W[:, free], -(W @ ubar), rcond=None)
    u = ubar.copy()
    u[free] += sol
    r = W @ u
    return 0.5 * float(r @ r), u
