"""Internal crack ``a < r < b`` along a side of the wedge, constant crack-face load.

With ``delta = a / b`` the transforms are represented as::

    chi-(s) = (delta**(s+1) / 4) G K- X- Sigma2 + (1 / K-) [X-]**-1 Sigma1,
    chi+(s) = (delta**(-s-1) / (4 K+)) G [X+]**-1 Sigma1 + K+ X+ Sigma2,
    Sigma1 = N1m / (s + 1) + sum_{m>=0} A+_m / (s - s_m),
    Sigma2 = C + N1p / (s + 1) + N2p / (s + 1)**2 + sum_{m>=1} A-_m / (s + s_m),

where ``s_0 = 0``, ``s_1 = 1`` and ``s_m`` (``m >= 2``) run over the remaining
poles of ``G`` in ``Re s > 0``.  Requiring ``chi+-`` to be regular at every pole
gives a linear system for the residues ``A+-``; the closure ``chi-(0) = 0``
fixes ``C``.  The system is truncated where ``delta**Re(s_N)`` drops below a
tolerance and solved densely.

Two rows differ from a naive term-by-term expansion:

* the row at ``s = -1``, where ``G`` and ``Sigma2`` have a double pole, keeps
  every term of the Laurent expansion of ``G [X+]**-1`` (including the constant
  term of ``G``), and
* the closure row keeps the constant term ``(4 / pi) G0'(0)`` of ``G`` at 0,
  which does not vanish because ``J`` depends on ``s``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .factor import FactorizationData, build_khrapkov, rotation, x_matrix
from .kernels import MaterialSpec, g0_side, g0_side_derivative, g_side, residue_g_side
from .quadrature import QuadratureSettings
from .roots import RootTable, pole_window
from .specfun import k_minus, k_plus

__all__ = [
    "CrackConfig",
    "TruncatedSystem",
    "SifResult",
    "TruncationError",
    "NoCrackError",
    "assemble_internal",
    "solve_internal",
    "internal_roots",
    "q_matrix",
    "energy_release",
    "near_vertex_energy",
]

logger = logging.getLogger(__name__)

_LOG2 = np.log(2.0)
_C1 = 2 * (1 - _LOG2)       # 1/K+(s) = -(sqrt(pi)/2) (1 - _C1 (s + 1)) + O((s + 1)**2)
MAX_ROOTS = 400


class TruncationError(ValueError):
    """The truncated system cannot reach the requested tolerance."""


class NoCrackError(ValueError):
    """``a >= b``: there is no crack."""


@dataclass(frozen=True)
class CrackConfig:
    a: float
    b: float

    def __post_init__(self):
        if self.b <= 0 or self.a < 0:
            raise ValueError("need 0 <= a and b > 0")
        if self.a >= self.b:
            raise NoCrackError("a must be smaller than b")

    @property
    def delta(self) -> float:
        return self.a / self.b


@dataclass
class SifResult:
    """Stress intensity factors at both tips with energies and diagnostics."""

    K_minus: np.ndarray          # (K_I, K_II) at r = a
    K_plus: np.ndarray           # (K_I, K_II) at r = b
    dU_minus: float | None = None
    dU_plus: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def K_I_minus(self):
        return float(self.K_minus[0])

    @property
    def K_II_minus(self):
        return float(self.K_minus[1]) if len(self.K_minus) > 1 else 0.0

    @property
    def K_I_plus(self):
        return float(self.K_plus[0])

    @property
    def K_II_plus(self):
        return float(self.K_plus[1]) if len(self.K_plus) > 1 else 0.0


def internal_roots(alpha: float, delta: float, tol: float = 1e-14, max_roots: int = MAX_ROOTS) -> RootTable:
    """Poles ``s_0 = 0, s_1 = 1, s_2, ...`` (conjugates included) with ``delta**Re(s_n) >= tol``."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    re_max = max(2.0, np.log(tol) / np.log(delta)) + 1.0
    # grow the window so an unreachable tolerance fails before a huge scan
    re_win = min(re_max, 32.0)
    while True:
        table = pole_window(alpha, re_win)
        roots, tags = [], []
        for z, tag in zip(table.roots, table.tags):
            roots.append(z)
            tags.append(tag)
            if z.imag > 0:
                roots.append(np.conj(z))
                tags.append(tag)
        if re_win >= re_max or len(roots) > max_roots:
            break
        re_win = min(re_max, 2 * re_win)
    if len(roots) > max_roots:
        last = roots[max_roots - 1]
        if delta ** last.real > tol:
            raise TruncationError(f"{max_roots} poles reach only delta**Re s = {delta ** last.real:.1e} > {tol:g}")
        roots, tags = roots[:max_roots], tags[:max_roots]
        # keep conjugate pairs together
        if roots[-1].imag > 0:
            roots, tags = roots[:-1], tags[:-1]
    return RootTable(alpha, np.array(roots, dtype=complex), tuple(tags))


def q_matrix(alpha: float, fact: FactorizationData | None = None) -> np.ndarray:
    """``Q = X_inf**2``, the rotation by ``2 q``."""
    fact = fact or build_khrapkov(alpha)
    return rotation(2 * fact.q)


@dataclass
class _Constants:
    """Quantities of the representation that do not depend on the unknowns."""

    N1p: np.ndarray
    N2p: np.ndarray
    N1m: np.ndarray
    n1_row_matrix: np.ndarray     # coefficient of lambda0 in the s = -1 row
    n1_row_rhs: np.ndarray        # A-_1 = n1_row_rhs + n1_row_matrix lambda0
    closure_20: np.ndarray
    closure_21: np.ndarray
    closure_w: np.ndarray
    closure_a0: np.ndarray


def _constants(fact: FactorizationData, delta: float, P: np.ndarray, n1_row: str) -> _Constants:
    alpha = fact.alpha
    x1 = fact.X_plus_minus1
    y0 = np.linalg.inv(x1)
    y1 = fact.dX_plus_inv_minus1
    g0m1 = g0_side(-1.0, alpha)
    log_d = np.log(delta)
    sq = np.sqrt(np.pi)
    N1p = 2 / sq * (y0 * (_C1 + log_d) - y1) @ g0m1 @ P
    N2p = -2 / sq * g0m1 @ y0 @ P
    N1m = 8 / sq * x1 @ P

    # s = -1 row: A-_1 = R + M lambda0 with lambda0 = -sum A+_m / (1 + s_m)
    if n1_row == "printed":
        g_res = 4 / np.pi * g0m1
        d1 = -g_res @ y0 @ y0 / (4 * k_plus(-1.0) ** 2)
        h1 = -_C1 * np.linalg.inv(g0m1) + x1 @ y1
        n1_matrix = d1
        n1_rhs = d1 @ h1 @ N1m
    elif n1_row == "derived":
        phi0 = -sq / 2
        phi1 = sq / 2 * (_C1 + log_d)
        gm1 = 4 / np.pi * g0m1
        g0 = 4 / np.pi * g0_side_derivative(-1.0, alpha)
        f_m1 = gm1 @ y0
        f_0 = gm1 @ y1 + g0 @ y0
        kp = k_plus(-1.0)
        # d/ds K+ at -1: K+ = -(2/sqrt(pi)) (1 + _C1 (s + 1)) + ...
        dkp = -2 / sq * _C1
        m0 = kp * x1
        m1 = dkp * x1 + kp * fact.dX_plus_minus1
        m0_inv = np.linalg.inv(m0)
        n1_matrix = -0.25 * phi0 * m0_inv @ f_m1
        n1_rhs = -m0_inv @ (0.25 * (phi0 * f_0 + phi1 * f_m1) @ N1m + m1 @ N2p) - N1p
    else:
        raise ValueError("n1_row must be 'derived' or 'printed'")

    # closure chi-(0) = 0
    z = fact.X_minus_0
    dz = fact.derivative_near(0.0, "minus")
    w = np.linalg.inv(z)
    dw = -w @ dz @ w
    gam_m1 = 4 / np.pi * g0_side(0.0, alpha)
    gam_0 = 4 / np.pi * g0_side_derivative(0.0, alpha)
    u0 = delta * sq
    u1 = delta * sq * np.log(delta / 4)
    v0 = 1 / sq
    v1 = 2 * _LOG2 / sq
    closure_20 = 0.25 * (u0 * (gam_m1 @ dz + gam_0 @ z) + u1 * gam_m1 @ z)
    closure_21 = 0.25 * u0 * gam_m1 @ z
    return _Constants(N1p, N2p, N1m, n1_matrix, n1_rhs, closure_20, closure_21, v0 * w, v0 * dw + v1 * w)


@dataclass
class TruncatedSystem:
    """Solved truncated system for one configuration."""

    alpha: float
    delta: float
    P: np.ndarray
    roots: np.ndarray
    A_plus: np.ndarray            # (len(roots), 2): residues at s_n, n >= 0
    A_minus: np.ndarray           # (len(roots), 2): residues at -s_n; row 0 unused
    C_circ: np.ndarray
    N1_plus: np.ndarray
    N2_plus: np.ndarray
    N1_minus: np.ndarray
    residual: float
    condition: float
    fact: FactorizationData = field(repr=False)

    @property
    def N_plus(self) -> int:
        return len(self.roots) - 1

    @property
    def N_minus(self) -> int:
        return len(self.roots) - 1

    def sigma1(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = self.N1_minus[None, :] / (s + 1)[:, None]
        out = out + (self.A_plus[None, :, :] / (s[:, None] - self.roots[None, :])[:, :, None]).sum(axis=1)
        return out

    def sigma2(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = self.C_circ[None, :] + self.N1_plus[None, :] / (s + 1)[:, None] + self.N2_plus[None, :] / ((s + 1) ** 2)[:, None]
        r = self.roots[1:]
        out = out + (self.A_minus[None, 1:, :] / (s[:, None] + r[None, :])[:, :, None]).sum(axis=1)
        return out

    def chi_minus(self, s, side="minus"):
        """Transform ``chi-`` from the representation (``Re s > -0.45``, away from poles)."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        g = g_side(s, self.alpha)
        km = k_minus(s)
        xm = x_matrix(self.fact, s, side)
        inv = self.fact.inverse(s, side)
        first = 0.25 * (self.delta ** (s + 1) * km)[:, None, None] * g @ xm
        return (np.einsum("nij,nj->ni", first, self.sigma2(s))
                + np.einsum("nij,nj->ni", inv, self.sigma1(s)) / km[:, None])

    def chi_plus(self, s, side="plus"):
        """Transform ``chi+`` from the representation (``Re s < 0.45``, away from poles)."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        g = g_side(s, self.alpha)
        kp = k_plus(s)
        xp = x_matrix(self.fact, s, side)
        inv = self.fact.inverse(s, side)
        first = 0.25 * (self.delta ** (-s - 1) / kp)[:, None, None] * g @ inv
        return (np.einsum("nij,nj->ni", first, self.sigma1(s))
                + kp[:, None] * np.einsum("nij,nj->ni", xp, self.sigma2(s)))

    def closure_defect(self, radius: float = 0.2, nodes: int = 64) -> float:
        """``|chi-(0)|`` from the mean of the representation over a circle around 0."""
        theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
        return float(np.max(np.abs(self.chi_minus(radius * np.exp(1j * theta)).mean(axis=0))))

    def transform_identity_residual(self, taus=None) -> float:
        """Largest ``|chi-(t) - delta**(t+1) chi+(t)|`` on the imaginary axis, relative to ``|chi-|``."""
        taus = np.linspace(0.3, 6.0, 10) if taus is None else np.asarray(taus)
        t = 1j * taus
        cm = self.chi_minus(t, "minus")
        cp = self.chi_plus(t, "plus")
        diff = cm - (self.delta ** (t + 1))[:, None] * cp
        return float(np.max(np.abs(diff)) / max(np.max(np.abs(cm)), 1e-300))


def _coefficients(fact: FactorizationData, roots: np.ndarray, delta: float):
    """``D-_n = delta**(s_n+1) Delta-_n`` and ``D+_n = delta**(s_n-1) Delta+_n`` (index 0 of ``D+`` unused)."""
    alpha = fact.alpha
    n = len(roots)
    res_minus = np.stack([residue_g_side(z, alpha) for z in roots])
    res_plus = np.stack([residue_g_side(-z, alpha) for z in roots])
    xm = x_matrix(fact, roots, "minus")
    xm[0] = fact.X_minus_0
    xp_inv = fact.inverse(-roots[1:], "plus")
    km = k_minus(roots)
    kp = k_plus(-roots[1:])
    scale_m = delta ** (roots + 1)
    d_minus = -0.25 * (scale_m * km**2)[:, None, None] * res_minus @ xm @ xm
    d_plus = np.zeros((n, 2, 2), dtype=complex)
    scale_p = delta ** (roots[1:] - 1)
    d_plus[1:] = -0.25 * (scale_p / kp**2)[:, None, None] * res_plus[1:] @ xp_inv @ xp_inv
    return d_minus, d_plus


def assemble_internal(alpha: float, delta: float, P, roots: RootTable | np.ndarray,
                      fact: FactorizationData | None = None, n1_row: str = "derived"):
    """Dense linear system ``M x = rhs`` for ``x = (A+_0..A+_N, A-_1..A-_N, C)``.

    Returns ``(M, rhs, constants)``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    fact = fact or build_khrapkov(alpha)
    P = np.asarray(P, dtype=complex)
    s = np.asarray(roots.roots if isinstance(roots, RootTable) else roots, dtype=complex)
    n = len(s)
    if n < 2 or s[0] != 0 or s[1] != 1:
        raise ValueError("the pole list must start with 0 and 1")
    k = _constants(fact, delta, P, n1_row)
    d_minus, d_plus = _coefficients(fact, s, delta)
    size = 2 * n + 2 * (n - 1) + 2
    M = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    ap = lambda m: slice(2 * m, 2 * m + 2)                      # A+_m, m = 0..n-1
    am = lambda m: slice(2 * n + 2 * (m - 1), 2 * n + 2 * m)   # A-_m, m = 1..n-1
    cc = slice(size - 2, size)
    eye = np.eye(2)
    for i in range(n):
        row = ap(i)
        M[row, row] += eye
        for m in range(1, n):
            M[row, am(m)] -= d_minus[i] / (s[i] + s[m])
        M[row, cc] -= d_minus[i]
        rhs[row] = d_minus[i] @ (k.N1p / (s[i] + 1) + k.N2p / (s[i] + 1) ** 2)
    # s = -1
    row = am(1)
    M[row, row] += eye
    for m in range(n):
        M[row, ap(m)] += k.n1_row_matrix / (1 + s[m])
    rhs[row] = k.n1_row_rhs
    for i in range(2, n):
        row = am(i)
        M[row, row] += eye
        for m in range(n):
            M[row, ap(m)] += d_plus[i] / (s[i] + s[m])
        rhs[row] = d_plus[i] @ (k.N1m / (1 - s[i]))
    # closure
    row = cc
    M[row, cc] += k.closure_20
    for m in range(1, n):
        M[row, am(m)] += k.closure_20 / s[m] - k.closure_21 / s[m] ** 2
        M[row, ap(m)] -= k.closure_w / s[m]
    M[row, ap(0)] += k.closure_a0
    rhs[row] = (-k.closure_20 @ (k.N1p + k.N2p) + k.closure_21 @ (k.N1p + 2 * k.N2p) - k.closure_w @ k.N1m)
    return M, rhs, k


def _solve(alpha, delta, P, roots, fact, n1_row):
    M, rhs, k = assemble_internal(alpha, delta, P, roots, fact, n1_row)
    x = np.linalg.solve(M, rhs)
    residual = float(np.max(np.abs(M @ x - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    n = len(roots)
    a_plus = x[: 2 * n].reshape(n, 2)
    a_minus = np.zeros((n, 2), dtype=complex)
    a_minus[1:] = x[2 * n: 2 * n + 2 * (n - 1)].reshape(n - 1, 2)
    cond = float(np.linalg.cond(M))
    return TruncatedSystem(alpha, delta, np.asarray(P, dtype=complex), np.asarray(roots), a_plus, a_minus,
                           x[-2:], k.N1p, k.N2p, k.N1m, residual, cond, fact)


def solve_system(alpha: float, delta: float, P, tol: float = 1e-14, max_roots: int = MAX_ROOTS,
                 settings: QuadratureSettings = QuadratureSettings(), n1_row: str = "derived") -> TruncatedSystem:
    fact = build_khrapkov(alpha, settings)
    roots = internal_roots(alpha, delta, tol, max_roots).roots
    return _solve(alpha, delta, P, roots, fact, n1_row)


def energy_release(K, material: MaterialSpec | None = None, h: float = 1.0, E: float | None = None) -> float:
    """Energy released by a tip advance ``h``: ``(h / E) (K_I**2 + K_II**2)``."""
    if h <= 0:
        raise ValueError("h must be positive")
    if E is None:
        E = material.effective[0] if material is not None else 1.0
    K = np.asarray(K, dtype=float)
    return float(h / E * np.sum(K**2))


def near_vertex_energy(K_edge, delta: float, h: float = 1.0, E: float = 1.0, log_power: int = 2) -> float:
    """Small-``delta`` estimate ``h (K_I**2 + K_II**2) / (E delta |log delta|**p)`` at the tip near the vertex."""
    return float(h * np.sum(np.asarray(K_edge) ** 2) / (E * delta * abs(np.log(delta)) ** log_power))


def solve_internal(alpha: float, a: float, b: float, P, material: MaterialSpec | None = None,
                   settings: QuadratureSettings = QuadratureSettings(), tol: float = 1e-14,
                   max_roots: int = MAX_ROOTS, h: float = 1.0, n1_row: str = "derived") -> SifResult:
    """Stress intensity factors at both tips of the crack ``a < r < b`` under constant load ``P``."""
    from .edge import sif_edge_constant

    cfg = CrackConfig(a, b)
    P = np.asarray(P, dtype=float)
    if cfg.a == 0.0:
        K, _ = sif_edge_constant(alpha, b, P, settings)
        return SifResult(np.zeros(2), K, None, energy_release(K, material, h), {"route": "edge"})
    sys_ = solve_system(alpha, cfg.delta, P, tol, max_roots, settings, n1_row)
    fact = sys_.fact
    K_minus = 0.5 * np.sqrt(a / 2) * fact.X_inf @ sys_.C_circ
    K_plus = 0.5 * np.sqrt(b / 2) * fact.X_inf.T @ (sys_.N1_minus + sys_.A_plus.sum(axis=0))
    imag = float(max(np.max(np.abs(K_minus.imag)), np.max(np.abs(K_plus.imag))))
    diag = {
        "roots": len(sys_.roots),
        "truncation": float(cfg.delta ** sys_.roots[-1].real),
        "residual": sys_.residual,
        "condition": sys_.condition,
        "imag_part": imag,
        "closure_defect": sys_.closure_defect(),
        "transform_identity": sys_.transform_identity_residual(),
        "quad_error": fact.quad_error,
        "system": sys_,
    }
    K_minus, K_plus = K_minus.real, K_plus.real
    return SifResult(K_minus, K_plus, energy_release(K_minus, material, h), energy_release(K_plus, material, h), diag)
