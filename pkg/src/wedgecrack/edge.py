"""Edge crack ``0 < r < b`` continuing a side of the wedge ``-pi < theta < alpha``.

The crack-face traction ``sigma(r) = (-p_theta(r), -p_rtheta(r))`` enters through
its transform ``g-(s) = int_0^1 sigma(b r) r**s dr``.  With
``F(t) = K+(t) X+(t)`` the solution is::

    chi-(s) = -(4 / K-(s)) [X-(s)]**-1 Psi-(s),   sigma+(s) = -(1 / K+(s)) [X+(s)]**-1 Psi+(s),
    Psi(s) = (1 / 2 pi i) int_Omega F(t) g-(t) / (t - s) dt,

and the tip stress intensity factors are ``K = sqrt(2 b) X_inf**-1 Psi_0`` with
``Psi_0 = (1 / 2 pi i) int_Omega F(t) g-(t) dt``.  For loads that are finite sums
of powers, ``sigma(b r) = sum_k c_k r**(nu_k - 1)``, ``g-`` has only simple
poles at ``-nu_k`` and every integral closes on them::

    Psi-(s) = -sum_k F(-nu_k) c_k / (s + nu_k),   Psi_0 = sum_k F(-nu_k) c_k.

General sampled loads use the weight matrix ``K = int_0^1 W(r) sigma(b r) dr``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .factor import FactorizationData, build_khrapkov, x_matrix
from .quadrature import QuadratureSettings, gauss_legendre, mellin_contour
from .roots import ALPHA_STAR, RootFindingError, char_roots
from .specfun import k_minus, k_plus

__all__ = [
    "LoadSpec",
    "EigenSolution",
    "EdgeSolution",
    "NoSecondRootError",
    "sif_edge_constant",
    "edge_d_matrix",
    "weight_matrix",
    "eigen_solution",
    "sif_edge_eigen",
    "solve_edge_general",
    "sif_from_weight",
]

logger = logging.getLogger(__name__)

_OMEGA = -0.25
# The gamma ratio carries ~1e-13 relative error, so contour integrals over long
# ranges cannot resolve below ~1e-11 absolute.
_CONTOUR_REL_TOL = 1e-9
_CONTOUR_ABS_TOL = 1e-10
_REMAINDER_CUTOFF = 1e5


class NoSecondRootError(RootFindingError):
    """The second eigen-solution does not exist at this angle."""


@dataclass(frozen=True)
class LoadSpec:
    """Crack-face loading.

    ``kind`` is one of

    * ``"constant"``: ``p_theta = P[0]``, ``p_rtheta = P[1]`` on ``0 < r < b``;
    * ``"eigen"``: the crack-face load cancelling an eigen-solution of the
      uncracked wedge, ``which`` in ``{"first", "second"}`` with amplitude ``k_theta0``;
    * ``"power"``: ``sigma(b r) = sum_k c_k r**(nu_k - 1)`` given as ``terms=[(nu_k, c_k), ...]``
      with ``Re nu_k > 0``;
    * ``"sampled"``: a callable ``sampler(r)`` returning ``sigma(b r)`` with shape ``r.shape + (2,)``.
    """

    kind: str
    P: tuple[float, float] = (0.0, 0.0)
    which: str = "first"
    k_theta0: float = 1.0
    terms: tuple = ()
    sampler: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in ("constant", "eigen", "power", "sampled"):
            raise ValueError(f"unknown load kind {self.kind!r}")
        if self.kind == "constant" and not np.all(np.isfinite(self.P)):
            raise ValueError("constant loads must be finite")
        if self.kind == "eigen" and self.which not in ("first", "second"):
            raise ValueError("which must be 'first' or 'second'")
        if self.kind == "power" and any(np.real(nu) <= 0 for nu, _ in self.terms):
            raise ValueError("power exponents must satisfy Re nu > 0")
        if self.kind == "sampled" and self.sampler is None:
            raise ValueError("a sampled load needs a sampler")

    @classmethod
    def constant(cls, p1: float, p2: float = 0.0) -> "LoadSpec":
        return cls("constant", P=(float(p1), float(p2)))

    @classmethod
    def eigen(cls, which: str = "first", k_theta0: float = 1.0) -> "LoadSpec":
        return cls("eigen", which=which, k_theta0=float(k_theta0))

    @classmethod
    def power(cls, terms: Sequence) -> "LoadSpec":
        return cls("power", terms=tuple((complex(nu), tuple(np.asarray(c, dtype=complex))) for nu, c in terms))

    @classmethod
    def sampled(cls, sampler: Callable) -> "LoadSpec":
        return cls("sampled", sampler=sampler)

    def pole_terms(self, alpha: float, b: float) -> list[tuple[complex, np.ndarray]]:
        """``[(nu_k, c_k)]`` with ``sigma(b r) = sum c_k r**(nu_k - 1)``."""
        if self.kind == "constant":
            return [(1.0, -np.asarray(self.P, dtype=complex))]
        if self.kind == "eigen":
            eig = eigen_solution(alpha, self.which)
            amp = -self.k_theta0 * b ** (eig.mu - 1)
            return [(eig.mu, amp * np.array([1.0, eig.k_star], dtype=complex))]
        if self.kind == "power":
            return [(nu, np.asarray(c, dtype=complex)) for nu, c in self.terms]
        raise ValueError("sampled loads have no pole representation")

    def traction(self, alpha: float, b: float, r) -> np.ndarray:
        """``sigma(b r)`` at ``r`` in ``(0, 1)``, shape ``r.shape + (2,)``."""
        r = np.asarray(r, dtype=float)
        if self.kind == "sampled":
            return np.asarray(self.sampler(r))
        out = np.zeros(r.shape + (2,), dtype=complex)
        for nu, c in self.pole_terms(alpha, b):
            out += r[..., None] ** (nu - 1) * c
        return out.real if np.all(out.imag == 0) else out


@dataclass(frozen=True)
class EigenSolution:
    """Traction-free power solution ``r**(mu - 1) k(theta)`` of the uncracked wedge.

    ``k_theta = C1 cos(s t) + C2 cos((s+2) t) + C3 sin(s t) + C4 sin((s+2) t)``
    with ``s = mu - 1``, normalized so that ``k_theta(0) = 1``.
    """

    alpha: float
    mu: float
    k_star: float
    C: tuple[float, float, float, float]
    d0: float

    def k_theta(self, theta):
        s = self.mu - 1
        c1, c2, c3, c4 = self.C
        return c1 * np.cos(s * theta) + c2 * np.cos((s + 2) * theta) + c3 * np.sin(s * theta) + c4 * np.sin((s + 2) * theta)

    def k_rtheta(self, theta):
        s = self.mu - 1
        c1, c2, c3, c4 = self.C
        ratio = s / (s + 2)
        return (ratio * c1 * np.sin(s * theta) + c2 * np.sin((s + 2) * theta)
                - ratio * c3 * np.cos(s * theta) - c4 * np.cos((s + 2) * theta))

    def boundary_residual(self) -> float:
        """Largest traction on the wedge faces ``theta = -pi`` and ``theta = alpha``."""
        faces = np.array([-np.pi, self.alpha])
        return float(np.max(np.abs(np.concatenate([self.k_theta(faces), self.k_rtheta(faces)]))))


def eigen_solution(alpha: float, which: str = "first") -> EigenSolution:
    """Eigen-solution for the smaller (``"first"``) or larger (``"second"``) root in ``(0, 1)``."""
    if which not in ("first", "second"):
        raise ValueError("which must be 'first' or 'second'")
    mu, mu0 = char_roots(alpha)
    if which == "second":
        if mu0 is None:
            raise NoSecondRootError(f"no second eigen-solution at alpha={alpha} (threshold about {ALPHA_STAR:.4f})")
        mu = mu0
    m, a = mu, alpha
    pi_m = m * np.pi
    d0 = (m - 1) * np.cos(pi_m) - m * np.cos(pi_m - 2 * a) + np.cos(m * (np.pi + 2 * a))
    scale = 4 * m * np.sin(pi_m) * np.sin(a) ** 2
    c4 = d0 / scale
    ratio = c4 / d0
    c1 = ratio * ((m + 1) * np.sin(pi_m) + np.sin(m * (np.pi + 2 * a)) - m * np.sin(pi_m + 2 * a))
    c2 = ratio * ((m - 1) * np.sin(pi_m) - np.sin(m * (np.pi + 2 * a)) - m * np.sin(pi_m - 2 * a))
    c3 = ratio * ((m + 1) * np.cos(pi_m) - np.cos(m * (np.pi + 2 * a)) - m * np.cos(pi_m + 2 * a))
    k_star = (m * (m + 1) * np.cos(pi_m - 2 * a) + m * (m - 1) * np.cos(pi_m + 2 * a)
              - 2 * np.cos(m * (np.pi + 2 * a)) - 2 * (m * m - 1) * np.cos(pi_m)) / (scale * (m + 1))
    return EigenSolution(alpha, mu, float(k_star), (c1, c2, c3, c4), float(d0))


def _f_plus(fact: FactorizationData, s) -> np.ndarray:
    """``K+(s) X+(s)`` for ``Re s < 0``."""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    return k_plus(s)[:, None, None] * x_matrix(fact, s, "plus")


def edge_d_matrix(alpha: float, settings: QuadratureSettings = QuadratureSettings()) -> np.ndarray:
    """``D = 2 sqrt(2 / pi) X_inf**-1 X+(-1)``, so that ``b**-1/2 K = D P`` for constant loads."""
    fact = build_khrapkov(alpha, settings)
    return (2 * np.sqrt(2 / np.pi) * fact.X_inf.T @ fact.X_plus_minus1).real


def sif_edge_constant(alpha: float, b: float, P, settings: QuadratureSettings = QuadratureSettings()):
    """``(K, D)`` for constant crack-face loads ``p_theta = P[0]``, ``p_rtheta = P[1]``."""
    if b <= 0:
        raise ValueError("b must be positive")
    if not 0.0 < alpha < np.pi:
        raise ValueError("alpha must lie in (0, pi)")
    D = edge_d_matrix(alpha, settings)
    return np.sqrt(b) * D @ np.asarray(P, dtype=float), D


def sif_edge_eigen(alpha: float, b: float = 1.0, k_theta0: float = 1.0, which: str = "first",
                   settings: QuadratureSettings = QuadratureSettings()):
    """``(K, D, eigen)`` for the load cancelling an eigen-solution on the crack faces.

    ``D = -sqrt(2) K+(-mu) X_inf**-1 X+(-mu)`` and ``K = b**(mu - 1/2) k_theta0 D (1, k_star)``.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    eig = eigen_solution(alpha, which)
    fact = build_khrapkov(alpha, settings)
    D = (-np.sqrt(2) * fact.X_inf.T @ _f_plus(fact, -eig.mu)[0]).real
    K = b ** (eig.mu - 0.5) * k_theta0 * D @ np.array([1.0, eig.k_star])
    return K, D, eig


def weight_matrix(alpha: float, b: float, r: float, settings: QuadratureSettings = QuadratureSettings()) -> np.ndarray:
    """Weight matrix ``W(r)`` with ``K = int_0^1 W(r) sigma(b r) dr``.

    ``W = sqrt(2 b) X_inf**-1 (1 / 2 pi i) int_Omega K+(t) X+(t) r**t dt``.  With
    ``z = -t`` the integrand behaves like ``-z**-1/2 X_inf + z**-3/2 M`` where
    ``M = s (X - X_inf) - X_inf / 8`` in the limit; both terms are inverted in
    closed form (``1 / sqrt(pi x)`` and ``2 sqrt(x / pi)`` with ``x = -log r``) and
    only the ``O(z**-5/2)`` remainder is integrated numerically.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie strictly inside (0, 1)")
    fact = build_khrapkov(alpha, settings)
    x_inf = fact.X_inf
    m1 = fact.X_inf_slope - x_inf / 8

    def remainder(t):
        z = (-t)[:, None, None]
        out = _f_plus(fact, t) + z**-0.5 * x_inf - z**-1.5 * m1
        # beyond the cutoff the remainder is below the gamma-ratio noise floor
        out[np.abs(t.imag) > _REMAINDER_CUTOFF] = 0.0
        return out

    x = -np.log(r)
    closed = 2 * np.sqrt(x / np.pi) * m1 - x_inf / np.sqrt(np.pi * x)
    scale = max(1.0, float(np.max(np.abs(closed))))
    contour = replace(settings, rel_tol=max(settings.rel_tol, _CONTOUR_REL_TOL),
                      abs_tol=max(settings.abs_tol, _CONTOUR_ABS_TOL * scale))
    total = mellin_contour(remainder, r, _OMEGA, contour).value + closed
    return (np.sqrt(2 * b) * x_inf.T @ total).real


def sif_from_weight(alpha: float, b: float, load: LoadSpec, nodes: int = 24,
                    settings: QuadratureSettings = QuadratureSettings()) -> np.ndarray:
    """``K = int_0^1 W(r) sigma(b r) dr`` with ``r = 1 - u**2`` absorbing the tip singularity."""
    u, w = gauss_legendre(nodes)
    u = 0.5 * (u + 1)
    w = 0.5 * w
    r = 1 - u * u
    sig = np.asarray(load.traction(alpha, b, r))
    total = np.zeros(2)
    for ri, ui, wi, si in zip(r, u, w, sig):
        total += wi * 2 * ui * (weight_matrix(alpha, b, ri, settings) @ si).real
    return total


@dataclass
class EdgeSolution:
    """Stress intensity factors and transform evaluators of an edge-crack solution."""

    alpha: float
    b: float
    K: np.ndarray
    psi0: np.ndarray
    fact: FactorizationData = field(repr=False)
    terms: list = field(repr=False, default_factory=list)
    load: LoadSpec | None = field(repr=False, default=None)

    def psi_minus(self, s) -> np.ndarray:
        """``Psi-(s)`` for ``Re s > Re Omega``, shape ``s.shape + (2,)``."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.zeros(s.shape + (2,), dtype=complex)
        for nu, c in self.terms:
            f = _f_plus(self.fact, -nu)[0]
            out -= (f @ c)[None, :] / (s + nu)[:, None]
        return out

    def chi_minus(self, s) -> np.ndarray:
        """Transform of the displacement-jump derivative, ``Re s > -1/2``."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        inv = self.fact.inverse(s, "minus")
        return -4 / k_minus(s)[:, None] * np.einsum("nij,nj->ni", inv, self.psi_minus(s))

    def sigma_plus(self, s) -> np.ndarray:
        """Transform of the stresses ahead of the tip, ``Re s < 0``."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        f = _f_plus(self.fact, s)
        g = np.zeros(s.shape + (2,), dtype=complex)
        for nu, c in self.terms:
            g += c[None, :] / (s + nu)[:, None]
        psi_plus = self.psi_minus(s) + np.einsum("nij,nj->ni", f, g)
        inv = self.fact.inverse(s, "plus")
        return -1 / k_plus(s)[:, None] * np.einsum("nij,nj->ni", inv, psi_plus)


def solve_edge_general(alpha: float, b: float, load: LoadSpec,
                       settings: QuadratureSettings = QuadratureSettings()) -> EdgeSolution:
    """Solve the edge-crack problem for any :class:`LoadSpec`.

    Power-type loads (constant, eigen, power) use the pole form of ``Psi``;
    sampled loads get their SIFs from the weight matrix and carry no transform
    evaluators.
    """
    if b <= 0:
        raise ValueError("b must be positive")
    fact = build_khrapkov(alpha, settings)
    if load.kind == "sampled":
        K = sif_from_weight(alpha, b, load, settings=settings)
        psi0 = fact.X_inf @ K / np.sqrt(2 * b)
        return EdgeSolution(alpha, b, K, psi0, fact, [], load)
    terms = load.pole_terms(alpha, b)
    psi0 = np.zeros(2, dtype=complex)
    for nu, c in terms:
        psi0 += _f_plus(fact, -nu)[0] @ c
    K = np.sqrt(2 * b) * fact.X_inf.T @ psi0
    if np.all(np.abs(K.imag) <= 1e-12 * max(1.0, np.max(np.abs(K)))):
        K = K.real
    return EdgeSolution(alpha, b, K, psi0, fact, terms, load)
