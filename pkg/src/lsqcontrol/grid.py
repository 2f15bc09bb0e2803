"""Uniform space-time grid on (0, T) x (0, 1) with bilinear (Q1) elements.

Node ``(i, j)`` sits at ``x = i*hx``, ``t = j*ht`` and has global index
``j*(Nx + 1) + i`` (row-major by time level, then space index).  Every
field in the package is a flat array over this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class SpaceTag(Enum):
    VARIATION_BOUNDARY = "variation-boundary"
    VARIATION_INNER = "variation-inner"
    CORRECTOR_H10 = "corrector-h10"


@dataclass(frozen=True)
class SpaceTimeGrid:
    T: float
    Nx: int
    Nt: int

    @property
    def hx(self) -> float:
        return 1.0 / self.Nx

    @property
    def ht(self) -> float:
        return self.T / self.Nt

    @property
    def n_nodes(self) -> int:
        return (self.Nx + 1) * (self.Nt + 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.Nx + 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.Nt + 1)

    def index(self, i, j):
        return np.asarray(j) * (self.Nx + 1) + np.asarray(i)

    def node_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(t, x)`` coordinates of every node in global order."""
        tt, xx = np.meshgrid(self.t, self.x, indexing="ij")
        return tt.ravel(), xx.ravel()

    def interpolate(self, func) -> np.ndarray:
        """Nodal interpolant of ``func(t, x)`` (vectorized)."""
        t, x = self.node_coords()
        return np.asarray(func(t, x), dtype=float) * np.ones_like(t)

    def as_array(self, field: np.ndarray) -> np.ndarray:
        """View a field as an ``(Nt + 1, Nx + 1)`` array indexed ``[j, i]``."""
        return np.asarray(field).reshape(self.Nt + 1, self.Nx + 1)

    def element_nodes(self) -> np.ndarray:
        """Global node indices of every element, shape ``(Nx*Nt, 4)``.

        Local order: (x0,t0), (x1,t0), (x0,t1), (x1,t1).
        """
        i, j = np.meshgrid(np.arange(self.Nx), np.arange(self.Nt), indexing="xy")
        i, j = i.ravel(), j.ravel()
        return np.stack(
            [self.index(i, j), self.index(i + 1, j), self.index(i, j + 1), self.index(i + 1, j + 1)],
            axis=1,
        )

    def element_x_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        i = np.tile(np.arange(self.Nx), self.Nt)
        return i * self.hx, (i + 1) * self.hx


def make_grid(T: float, Nx: int, Nt: int) -> SpaceTimeGrid:
    if not T > 0:
        raise ValueError(f"time horizon must be positive, got T={T}")
    if int(Nx) != Nx or int(Nt) != Nt or Nx < 2 or Nt < 2:
        raise ValueError(f"need integer Nx>=2 and Nt>=2, got Nx={Nx}, Nt={Nt}")
    return SpaceTimeGrid(float(T), int(Nx), int(Nt))


@dataclass(frozen=True)
class DofMask:
    tag: SpaceTag
    free: np.ndarray
    fixed: np.ndarray


def dof_mask(grid: SpaceTimeGrid, tag: SpaceTag) -> DofMask:
    A = np.zeros((grid.Nt + 1, grid.Nx + 1), dtype=bool)
    A[0, :] = A[-1, :] = True
    A[:, 0] = True
    if tag in (SpaceTag.VARIATION_INNER, SpaceTag.CORRECTOR_H10):
        A[:, -1] = True
    elif tag is not SpaceTag.VARIATION_BOUNDARY:
        raise ValueError(f"unknown space tag {tag!r}")
    fixed = A.ravel()
    return DofMask(tag, np.flatnonzero(~fixed), np.flatnonzero(fixed))


@dataclass(frozen=True)
class ElementIntegrals:
    mass: np.ndarray
    stiff_x: np.ndarray
    stiff_t: np.ndarray
    mixed: np.ndarray  # mixed[a, b] = int phi_a * d/dt phi_b


def element_integrals(hx: float, ht: float) -> ElementIntegrals:
    # 1D factors; local index = 2*time_offset + space_offset, hence kron(time, space)
    def mass1(h):
        return h / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])

    def stiff1(h):
        return np.array([[1.0, -1.0], [-1.0, 1.0]]) / h

    conv1 = np.array([[-0.5, 0.5], [-0.5, 0.5]])  # int phi_a phi_b' (any h)
    return ElementIntegrals(
        mass=np.kron(mass1(ht), mass1(hx)),
        stiff_x=np.kron(mass1(ht), stiff1(hx)),
        stiff_t=np.kron(stiff1(ht), mass1(hx)),
        mixed=np.kron(conv1, mass1(hx)),
    )


_GAUSS3 = np.polynomial.legendre.leggauss(3)


def l2_error_field(grid: SpaceTimeGrid, field: np.ndarray, func) -> float:
    """L2(Q_T) distance between the Q1 field and ``func(t, x)``, 3x3 Gauss per element."""
    pts, wts = _GAUSS3
    s = 0.5 * (pts + 1.0)
    U = grid.as_array(field)
    total = 0.0
    for a, wa in zip(s, wts):  # time
        for b, wb in zip(s, wts):  # space
            uh = ((1 - a) * (1 - b) * U[:-1, :-1] + (1 - a) * b * U[:-1, 1:]
                  + a * (1 - b) * U[1:, :-1] + a * b * U[1:, 1:])
            tq = (np.arange(grid.Nt)[:, None] + a) * grid.ht
            xq = (np.arange(grid.Nx)[None, :] + b) * grid.hx
            total += 0.25 * wa * wb * np.sum((uh - func(tq, xq)) ** 2)
    return float(np.sqrt(total * grid.hx * grid.ht))
