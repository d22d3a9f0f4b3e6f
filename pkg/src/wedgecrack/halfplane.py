"""Internal crack ``a < r < b`` orthogonal to the boundary of a half-plane, normal load ``P``.

The kernel ``L(s) = (sin(pi s/2)**2 - s**2) / (2 sin(pi s))`` splits as
``L = -(1/4) L+ / L-`` with ``L+- = a+- X+-``.  With ``p+ = P / L+(-1)`` and
``p- = pi P L+(-1) / 4`` the transforms are::

    chi-(s) = delta**(s+1) / (L- L) [Lm(s) + C + p- / (s+1)] - 4 L- [Lp(s) - p+ / (s+1)],
    chi+(s) = delta**(-s-1) L+ / L [Lp(s) - p+ / (s+1)] - 4 / L+ [Lm(s) + C + p- / (s+1)],
    Lp(s) = sum_{m>=0} A+_m / (s - s_m),    Lm(s) = sum_{m>=1} A-_m / (s + s_m),

with ``s_0 = 0`` and ``s_m`` (``m >= 1``) the nonreal zeros of
``s**2 - sin(pi s/2)**2`` in ``Re s > 0``, conjugates included.  Regularity at
every ``s_n`` and ``-s_n`` gives the residue system; ``chi-(0) = 0`` fixes
``C``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .factor import ScalarFactorData, build_scalar_factor
from .internal import MAX_ROOTS, CrackConfig, SifResult, TruncationError, energy_release, near_vertex_energy
from .kernels import MaterialSpec, l_fun
from .quadrature import QuadratureSettings, integrate_decaying
from .roots import halfplane_window

__all__ = [
    "HalfplaneSystem",
    "halfplane_roots",
    "assemble_halfplane",
    "solve_halfplane_system",
    "solve_halfplane_split",
    "solve_halfplane",
    "koiter_gamma",
    "l0_const",
    "edge_limit_sif",
    "near_boundary_energy",
]

logger = logging.getLogger(__name__)


def halfplane_roots(delta: float, tol: float = 1e-14, max_roots: int = MAX_ROOTS) -> np.ndarray:
    """``s_0 = 0`` followed by the nonreal zeros with ``delta**Re(s_n) >= tol``, conjugate pairs adjacent."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    re_max = max(3.0, np.log(tol) / np.log(delta)) + 1.0
    # grow the window so an unreachable tolerance fails before a huge scan
    re_win = min(re_max, 32.0)
    while True:
        roots = [0j]
        for z in halfplane_window(re_win):
            roots.extend([z, np.conj(z)])
        if re_win >= re_max or len(roots) > max_roots:
            break
        re_win = min(re_max, 2 * re_win)
    if len(roots) > max_roots:
        last = roots[max_roots - 1]
        if delta ** last.real > tol:
            raise TruncationError(f"{max_roots} roots reach only delta**Re(s) = {delta ** last.real:.3g}")
        roots = roots[: max_roots - (max_roots - 1) % 2]
    return np.array(roots, dtype=complex)


@dataclass
class HalfplaneSystem:
    """Solved truncated system: residues ``A+-``, closure constant ``C`` and load constants."""

    delta: float
    P: float
    roots: np.ndarray
    A_plus: np.ndarray           # residues at s_n, n >= 0
    A_minus: np.ndarray          # residues at -s_n; entry 0 unused
    C_circ: complex
    p_plus: float
    p_minus: float
    residual: float
    condition: float
    fact: ScalarFactorData = field(repr=False)

    @property
    def A0_plus(self) -> complex:
        return self.A_plus[0]

    def partial_sum(self, sign: str, k: int) -> complex:
        """``a_k+-  = sum_{m>=1} A+-_m / s_m**k``."""
        coeff = self.A_plus if sign == "+" else self.A_minus
        return complex(np.sum(coeff[1:] / self.roots[1:] ** k))

    def lambda_plus(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return (self.A_plus[None, :] / (s[:, None] - self.roots[None, :])).sum(axis=1)

    def lambda_minus(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        return (self.A_minus[None, 1:] / (s[:, None] + self.roots[None, 1:])).sum(axis=1)

    def chi_minus(self, s, side="minus"):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        lm = self.fact.l_minus(s, side)
        first = self.delta ** (s + 1) / (lm * l_fun(s)) * (self.lambda_minus(s) + self.C_circ + self.p_minus / (s + 1))
        return first - 4 * lm * (self.lambda_plus(s) - self.p_plus / (s + 1))

    def chi_plus(self, s, side="plus"):
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        lp = self.fact.l_plus(s, side)
        first = self.delta ** (-s - 1) * lp / l_fun(s) * (self.lambda_plus(s) - self.p_plus / (s + 1))
        return first - 4 / lp * (self.lambda_minus(s) + self.C_circ + self.p_minus / (s + 1))

    def closure_defect(self, radius: float = 0.2, nodes: int = 64) -> float:
        """``|chi-(0)|`` from the mean of the representation over a circle around 0."""
        theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
        return float(abs(self.chi_minus(radius * np.exp(1j * theta)).mean()))

    def pole_defect(self, radius: float = 1e-3, nodes: int = 32) -> float:
        """Largest ``|residue|`` of ``chi-`` at ``0`` and at the first few ``s_n``, relative to ``|A+_n|``."""
        theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
        worst = 0.0
        for n in range(min(len(self.roots), 5)):
            t = self.roots[n] + radius * np.exp(1j * theta)
            res = np.mean(self.chi_minus(t) * (t - self.roots[n]))
            worst = max(worst, abs(res) / max(abs(self.A_plus[n]), 1e-300))
        return worst

    def transform_identity_residual(self, taus=None) -> float:
        """Largest ``|chi-(t) - delta**(t+1) chi+(t)|`` on the imaginary axis, relative to ``|chi-|``."""
        taus = np.linspace(0.3, 6.0, 10) if taus is None else np.asarray(taus)
        t = 1j * taus
        cm = self.chi_minus(t, "minus")
        cp = self.chi_plus(t, "plus")
        return float(np.max(np.abs(cm - self.delta ** (t + 1) * cp)) / max(np.max(np.abs(cm)), 1e-300))


def _weights(fact: ScalarFactorData, s: np.ndarray, delta: float):
    """``delta**(s_n+1) Delta-_n`` and ``delta**(s_n-1) Delta+_n`` (entry 0 of the latter unused)."""
    res = np.empty(len(s), dtype=complex)
    # sin(pi s) / (pi sin(pi s) - 4 s), written to avoid overflow for large Im s
    res[1:] = 1 / (np.pi - 4 * s[1:] / np.sin(np.pi * s[1:]))
    lm = fact.l_minus(s[1:], "minus")
    w_minus = np.empty(len(s), dtype=complex)
    w_minus[0] = delta * 2.0          # Delta-_0 = 2 pi / ((pi**2 - 4) L-(0)**2) = 2
    w_minus[1:] = delta ** (s[1:] + 1) * res[1:] / lm**2
    w_plus = np.zeros(len(s), dtype=complex)
    w_plus[1:] = delta ** (s[1:] - 1) * res[1:] * fact.l_plus(-s[1:], "plus") ** 2
    return w_minus, w_plus


def _load_constants(fact: ScalarFactorData, P: float):
    lp1 = complex(fact.l_plus(-1.0)).real
    return P / lp1, np.pi * P * lp1 / 4


def assemble_halfplane(delta: float, P: float, roots: np.ndarray, fact: ScalarFactorData | None = None):
    """Dense system ``M x = rhs`` for ``x = (A+_0..A+_N, A-_1..A-_N, C)``; returns ``(M, rhs, p+, p-)``."""
    fact = fact or build_scalar_factor()
    s = np.asarray(roots, dtype=complex)
    n = len(s)
    if n < 1 or s[0] != 0:
        raise ValueError("the pole list must start with 0")
    p_plus, p_minus = _load_constants(fact, P)
    w_minus, w_plus = _weights(fact, s, delta)
    size = 2 * n
    M = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)
    ip = np.arange(n)
    im = n + np.arange(n - 1)          # A-_m, m = 1..n-1
    cc = size - 1
    sums = s[:, None] + s[None, :]
    with np.errstate(divide="ignore"):
        inv_sums = np.where(sums == 0, 0, 1 / np.where(sums == 0, 1, sums))
    M[ip, ip] = 1.0
    M[np.ix_(ip, im)] = -w_minus[:, None] * inv_sums[:, 1:]
    M[ip, cc] = -w_minus
    rhs[ip] = w_minus * p_minus / (s + 1)
    M[im, im] = 1.0
    M[np.ix_(im, ip)] = w_plus[1:, None] * inv_sums[1:, :]
    rhs[im] = w_plus[1:] * p_plus / (s[1:] - 1)
    # closure chi-(0) = 0
    lg = np.log(delta) - fact.L0_const
    sm = s[1:]
    M[cc, cc] = 2 * delta * lg
    M[cc, im] = 2 * delta * (lg / sm - 1 / sm**2)
    M[cc, ip[1:]] = 1 / sm
    M[cc, 0] = -fact.L0_const
    rhs[cc] = -2 * delta * (lg * p_minus - p_minus) - p_plus
    return M, rhs, p_plus, p_minus


def _unpack(x, n):
    a_plus = x[:n]
    a_minus = np.zeros(n, dtype=complex)
    a_minus[1:] = x[n: 2 * n - 1]
    return a_plus, a_minus, x[-1]


def solve_halfplane_system(delta: float, P: float = 1.0, tol: float = 1e-14, max_roots: int = MAX_ROOTS,
                           settings: QuadratureSettings = QuadratureSettings(),
                           roots: np.ndarray | None = None) -> HalfplaneSystem:
    """Joint solve of the residue rows and the closure row."""
    fact = build_scalar_factor(settings)
    s = halfplane_roots(delta, tol, max_roots) if roots is None else np.asarray(roots, dtype=complex)
    M, rhs, p_plus, p_minus = assemble_halfplane(delta, P, s, fact)
    x = np.linalg.solve(M, rhs)
    residual = float(np.max(np.abs(M @ x - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    a_plus, a_minus, c = _unpack(x, len(s))
    return HalfplaneSystem(delta, P, s, a_plus, a_minus, c, p_plus, p_minus, residual,
                           float(np.linalg.cond(M)), fact)


def solve_halfplane_split(delta: float, P: float = 1.0, tol: float = 1e-14, max_roots: int = MAX_ROOTS,
                          settings: QuadratureSettings = QuadratureSettings(),
                          roots: np.ndarray | None = None) -> HalfplaneSystem:
    """Two-system route: ``A = C A0 + A1`` with ``C`` recovered from the closure row afterwards."""
    fact = build_scalar_factor(settings)
    s = halfplane_roots(delta, tol, max_roots) if roots is None else np.asarray(roots, dtype=complex)
    M, rhs, p_plus, p_minus = assemble_halfplane(delta, P, s, fact)
    n = len(s)
    core = M[:-1, :-1]
    # the C column holds -w_minus on the A+ rows: unit load f- = 1
    x0 = np.linalg.solve(core, -M[:-1, -1])
    x1 = np.linalg.solve(core, rhs[:-1])
    closure = M[-1, :-1]
    c = (rhs[-1] - closure @ x1) / (M[-1, -1] + closure @ x0)
    x = np.concatenate([c * x0 + x1, [c]])
    residual = float(np.max(np.abs(M @ x - rhs)) / max(np.max(np.abs(rhs)), 1e-300))
    a_plus, a_minus, _ = _unpack(x, n)
    return HalfplaneSystem(delta, P, s, a_plus, a_minus, c, p_plus, p_minus, residual,
                           float(np.linalg.cond(core)), fact)


def koiter_gamma(settings: QuadratureSettings = QuadratureSettings()) -> float:
    """``exp(-(1/pi) int_0^inf log(1 - tau**2 / sinh(pi tau/2)**2) dtau / (tau**2 + 1))``."""
    from .factor import _l0_log_tau

    res = integrate_decaying(lambda t: _l0_log_tau(t) / (t**2 + 1), np.pi, settings)
    return float(np.exp(-res.value / np.pi))


def l0_const(fact: ScalarFactorData | None = None) -> float:
    """Logarithmic derivative of ``L-`` at 0: ``X1 + log 2``."""
    fact = fact or build_scalar_factor()
    return float(fact.X1 + np.log(2.0))


def edge_limit_sif(b: float, P: float, settings: QuadratureSettings = QuadratureSettings()) -> float:
    """SIF of the edge crack ``0 < r < b``: ``sqrt(pi b) P gamma``."""
    return float(np.sqrt(np.pi * b) * P * koiter_gamma(settings))


def near_boundary_energy(b: float, P: float, delta: float, h: float = 1.0, E: float = 1.0,
                         log_power: int = 2) -> tuple[float, float]:
    """Small-``delta`` estimates of the energies released at ``r = a`` and ``r = b``.

    ``log_power = 2`` follows from squaring the SIF asymptote; ``log_power = 1``
    gives the single-log form.
    """
    k = edge_limit_sif(b, P)
    return near_vertex_energy([k], delta, h, E, log_power), energy_release([k], h=h, E=E)


def solve_halfplane(a: float, b: float, P: float = 1.0, material: MaterialSpec | None = None,
                    settings: QuadratureSettings = QuadratureSettings(), tol: float = 1e-14,
                    max_roots: int = MAX_ROOTS, h: float = 1.0) -> SifResult:
    """Mode-I SIFs at both tips of the crack ``a < r < b``; ``a = 0`` gives the edge crack."""
    cfg = CrackConfig(a, b)
    if cfg.a == 0.0:
        k = edge_limit_sif(b, P, settings)
        return SifResult(np.zeros(1), np.array([k]), None, energy_release([k], material, h), {"route": "edge"})
    sys_ = solve_halfplane_system(cfg.delta, P, tol, max_roots, settings)
    k_minus = 2 * np.sqrt(a) * sys_.C_circ
    k_plus = np.sqrt(b) * (sys_.p_plus - np.sum(sys_.A_plus))
    diag = {
        "roots": len(sys_.roots),
        "truncation": float(cfg.delta ** sys_.roots[-1].real) if len(sys_.roots) > 1 else 0.0,
        "residual": sys_.residual,
        "condition": sys_.condition,
        "imag_part": float(max(abs(k_minus.imag), abs(k_plus.imag))),
        "closure_defect": sys_.closure_defect(),
        "transform_identity": sys_.transform_identity_residual(),
        "quad_error": sys_.fact.quad_error,
        "system": sys_,
    }
    K_minus = np.array([k_minus.real])
    K_plus = np.array([k_plus.real])
    return SifResult(K_minus, K_plus, energy_release(K_minus, material, h), energy_release(K_plus, material, h), diag)
