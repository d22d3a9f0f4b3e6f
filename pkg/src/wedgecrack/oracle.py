"""Direct collocation solution of the half-plane crack integral equation.

The crack ``a < r < b`` orthogonal to the boundary of a half-plane satisfies::

    (1 / 4 pi) int_a^b chi(rho) [1 / (rho - r) + (r**2 + 4 r rho - rho**2) / (rho + r)**3] drho = p(r),
    int_a^b chi(rho) drho = 0.

With ``rho = m + c u`` and ``chi = phi(u) / sqrt(1 - u**2)`` the equation is
discretized by Gauss-Chebyshev quadrature of the first kind at the nodes
``u_i = cos((2i - 1) pi / 2n)`` and collocated at ``v_j = cos(j pi / n)``,
``j = 1..n-1``; the side condition closes the system.  The tip SIFs follow from
``phi(+-1)``, calibrated on the isolated pressurized crack where
``phi(u) = 4 P u`` and ``K = P sqrt(pi c)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as cheb

__all__ = ["CollocationGrid", "SieSolution", "sie_solve", "OracleConditioningError"]

logger = logging.getLogger(__name__)

_MAX_CONDITION = 1e12


class OracleConditioningError(RuntimeError):
    """The collocation matrix is too ill-conditioned to trust."""


@dataclass(frozen=True)
class CollocationGrid:
    """Chebyshev nodes and collocation points on ``(-1, 1)`` mapped onto ``(a, b)``."""

    n_nodes: int
    a: float
    b: float

    def __post_init__(self):
        if self.n_nodes < 8:
            raise ValueError("n_nodes must be at least 8")
        if not 0.0 <= self.a < self.b:
            raise ValueError("need 0 <= a < b")

    @property
    def nodes(self) -> np.ndarray:
        i = np.arange(1, self.n_nodes + 1)
        return np.cos((2 * i - 1) * np.pi / (2 * self.n_nodes))

    @property
    def collocation_points(self) -> np.ndarray:
        j = np.arange(1, self.n_nodes)
        return np.cos(j * np.pi / self.n_nodes)

    @property
    def half_length(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.a + self.b)

    def to_physical(self, u):
        return self.midpoint + self.half_length * np.asarray(u)


@dataclass
class SieSolution:
    grid: CollocationGrid
    phi: np.ndarray               # phi at the nodes
    K_minus: float                # mode-I SIF at r = a
    K_plus: float                 # mode-I SIF at r = b
    side_residual: float
    condition: float

    def phi_at(self, u):
        """Interpolated ``phi`` (Chebyshev series through the nodes)."""
        coef = cheb.chebfit(self.grid.nodes, self.phi, self.grid.n_nodes - 1)
        return cheb.chebval(np.asarray(u), coef)

    def density(self, r):
        """``chi(r)`` in the physical variable."""
        u = (np.asarray(r) - self.grid.midpoint) / self.grid.half_length
        return self.phi_at(u) / np.sqrt(1 - u**2)


def regular_kernel(r, rho):
    """Boundary correction ``(r**2 + 4 r rho - rho**2) / (rho + r)**3``."""
    return (r * r + 4 * r * rho - rho * rho) / (rho + r) ** 3


def sie_solve(a: float, b: float, load: float | Callable = 1.0, n_nodes: int = 64,
              regular: bool = True) -> SieSolution:
    """Solve the integral equation for crack-face pressure ``load`` (a constant or ``p(r)``).

    ``regular=False`` drops the boundary correction and leaves the isolated crack.
    """
    grid = CollocationGrid(n_nodes, a, b)
    u = grid.nodes
    v = grid.collocation_points
    c = grid.half_length
    rho = grid.to_physical(u)
    r = grid.to_physical(v)
    w = np.pi / n_nodes
    K = 1 / (u[None, :] - v[:, None])
    if regular:
        K = K + c * regular_kernel(r[:, None], rho[None, :])
    M = np.vstack([w * K / (4 * np.pi), np.ones(n_nodes)])
    p = np.full(r.shape, float(load)) if np.isscalar(load) else np.asarray(load(r), dtype=float)
    rhs = np.concatenate([p, [0.0]])
    cond = float(np.linalg.cond(M))
    if cond > _MAX_CONDITION:
        raise OracleConditioningError(f"collocation matrix condition {cond:.3g}")
    phi = np.linalg.solve(M, rhs)
    sol = SieSolution(grid, phi, 0.0, 0.0, float(abs(phi.sum())), cond)
    ends = sol.phi_at(np.array([-1.0, 1.0]))
    scale = np.sqrt(np.pi * c) / 4
    sol.K_minus = float(-scale * ends[0])
    sol.K_plus = float(scale * ends[1])
    return sol
