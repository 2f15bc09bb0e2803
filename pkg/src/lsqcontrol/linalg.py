"""CSR matrices and a Jacobi-preconditioned conjugate gradient solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class IndefiniteMatrixError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Square matrix in compressed sparse row layout, immutable after assembly."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    _csr: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        # scipy's CSR kernel loops rows in order, so products are reproducible
        object.__setattr__(
            self, "_csr", sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))
        )

    def __matmul__(self, x):
        return self._csr @ x

    def rmatvec(self, y):
        """Compute ``A.T @ y``."""
        return self._csr.T @ y

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def asymmetry(self) -> float:
        """``max|A - A^T|``."""
        d = self._csr - self._csr.T
        return float(abs(d).max()) if d.nnz else 0.0


def assemble(n: int, triplets) -> SparseMatrix:
    """Build a CSR matrix from ``(row, col, value)`` triplets, summing duplicates.

    ``triplets`` may be a list of tuples or a ``(rows, cols, vals)`` triple of arrays.
    """
    if isinstance(triplets, tuple) and len(triplets) == 3 and np.ndim(triplets[0]) == 1:
        rows, cols, vals = (np.asarray(a) for a in triplets)
    else:
        arr = list(triplets)
        rows = np.array([r for r, _, _ in arr], dtype=np.int64)
        cols = np.array([c for _, c, _ in arr], dtype=np.int64)
        vals = np.array([v for _, _, v in arr], dtype=float)
    rows = rows.astype(np.int64)
    cols = cols.astype(np.int64)
    vals = vals.astype(float)
    if rows.size and (rows.min() < 0 or cols.min() < 0 or rows.max() >= n or cols.max() >= n):
        raise ValueError(f"triplet index out of range for dimension {n}")

    key = rows * n + cols
    order = np.argsort(key, kind="stable")
    key, vals = key[order], vals[order]
    uniq, start = np.unique(key, return_index=True)
    summed = np.add.reduceat(vals, start) if vals.size else vals
    r, c = np.divmod(uniq, n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(r, minlength=n), out=indptr[1:])
    return SparseMatrix(n, indptr, c.astype(np.int64), summed)


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual: float
    converged: bool


def cg_solve(A: SparseMatrix, b, tol: float = 1e-10, maxit: int | None = None, x0=None,
             callback=None):
    """Solve ``A x = b`` for SPD ``A`` by Jacobi-preconditioned CG.

    Stops when the true relative residual ``|b - A x| / |b|`` drops below
    ``tol``.  ``callback(k, x)`` is invoked after every iteration.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = np.asarray(b, dtype=float)
    diag = A.diagonal()
    if np.any(diag <= 0):
        raise IndefiniteMatrixError("non-positive diagonal entry; matrix is not SPD")
    if maxit is None:
        maxit = 10 * A.n
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b), SolveReport(0, 0.0, True)
    if not np.isfinite(bnorm):
        return np.full_like(b, np.nan), SolveReport(0, float("nan"), False)

    dinv = 1.0 / diag
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x
    k = 0
    while True:
        k_start = k
        z = dinv * r
        p = z.copy()
        rz = r @ z
        while k < maxit and np.linalg.norm(r) > tol * bnorm:
            q = A @ p
            pq = p @ q
            if pq <= 0:
                raise IndefiniteMatrixError("non-positive curvature encountered in CG")
            alpha = rz / pq
            x += alpha * p
            r -= alpha * q
            z = dinv * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
            k += 1
            if callback is not None:
                callback(k, x)
        # recursive residual drifts from the true one; restart if they disagree
        r = b - A @ x
        rel = np.linalg.norm(r) / bnorm
        if rel <= tol or k >= maxit or k == k_start:
            return x, SolveReport(k, float(rel), bool(rel <= tol))
