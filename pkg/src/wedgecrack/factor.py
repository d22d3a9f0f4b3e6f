"""Khrapkov factorization of ``G0`` and the scalar factorization of ``L0``.

Both factorizations reduce to Cauchy integrals over the imaginary axis of even,
exponentially decaying densities ``phi``::

    F(s) = -(s / pi) int_0^inf phi(tau) / (tau**2 + s**2) dtau

which is holomorphic off the imaginary axis; its restriction to ``Re s < 0``
is the plus factor and to ``Re s > 0`` the minus factor.  With
``phi_B = log Delta(i tau)`` and ``phi_beta = eps(i tau) / f(i tau)**(1/2)``::

    B = exp(F_B / 2),  beta = F_beta,  X = B (C I + S J),
    C = cosh(w**(1/2)),  S = beta sinh(w**(1/2)) / w**(1/2),  w = f beta**2,

so ``X = B exp(beta J)`` and ``X+ = G0 X-`` on the axis.  ``C`` and ``S`` are
even functions of ``w**(1/2)``, so no square-root branch enters.

The densities are tabulated once per angle on a composite Gauss-Legendre rule.
Points far from the axis use the table directly; points within one panel width
use the even extension and singularity subtraction::

    int_0^T phi / (tau**2 + s**2) = (1 / 2 tau0) [int_{-T}^{T} (phi - phi(tau0)) / (tau - tau0)
                                     + phi(tau0) log((T - tau0) / (-T - tau0))],
    tau0 = -i s,

which also yields the one-sided boundary values and the continuation of each
factor a short distance across the axis.
"""
from __future__ import annotations

import hashlib
import logging
import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .kernels import g0_side, j_matrix, kernel_eigens, l0_fun, log1p_complex, cauchy_mean
from .quadrature import QuadratureSettings, composite_nodes, integrate_decaying, truncation_point
from .specfun import a_minus, a_plus

__all__ = [
    "FactorizationError",
    "CauchyTable",
    "FactorizationData",
    "ScalarFactorData",
    "build_khrapkov",
    "build_scalar_factor",
    "x_matrix",
    "closed_form_x0",
    "rotation",
    "CACHE_ENV",
    "CACHE_FORMAT_VERSION",
]

logger = logging.getLogger(__name__)

CACHE_ENV = "WEDGECRACK_CACHE"
CACHE_FORMAT_VERSION = 1
_PANEL_ORDER = 16
_INITIAL_WIDTH = 0.25
_NEAR_AXIS = 1.0          # |Re s| below this many panel widths uses the subtraction form
_CONTINUATION_LIMIT = 0.45
_CHUNK = 256              # points per block when forming the quadrature kernel


class FactorizationError(RuntimeError):
    """Raised for invalid factor requests or failed table construction."""


def rotation(angle: float) -> np.ndarray:
    """``[[cos a, -sin a], [sin a, cos a]]``."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def _log_side(z, side):
    """Logarithm continuous from the side where the path ``tau - tau0`` lives."""
    z = np.asarray(z, dtype=complex)
    arg = np.angle(z)
    if side == "minus":
        arg = np.where(arg < 0, arg + 2 * np.pi, arg)
    else:
        arg = np.where(arg > 0, arg - 2 * np.pi, arg)
    return np.log(np.abs(z)) + 1j * arg


@dataclass
class CauchyTable:
    """Tabulated even densities on ``[0, T]`` with evaluators of ``F(s)`` and ``F'(s)``.

    ``phi_at(s)`` must return the analytic continuation ``phi(-i s)`` (i.e. the
    density written as a function of the point ``s`` on the imaginary axis),
    with one column per density.
    """

    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray          # shape (n_nodes, n_densities)
    width: float
    upper: float
    phi_at: Callable = field(repr=False, default=None)

    def _side_of(self, s, side):
        if side is None:
            if np.any(s.real == 0):
                raise FactorizationError("a side must be given for points on the imaginary axis")
            return np.where(s.real < 0, "plus", "minus")
        return np.full(s.shape, side)

    def evaluate(self, s, side=None):
        """``F(s)`` for every density, shape ``s.shape + (n_densities,)``.

        ``side`` selects the factor: ``"plus"`` (native for ``Re s < 0``) or
        ``"minus"`` (native for ``Re s > 0``); ``None`` means native.
        """
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        sides = self._side_of(s, side)
        out = np.empty(s.shape + (self.values.shape[1],), dtype=complex)
        far = np.abs(s.real) >= _NEAR_AXIS * self.width
        native = np.where(s.real < 0, "plus", "minus")
        direct = far & (sides == native)
        if np.any(direct):
            out[direct] = self._direct(s[direct])
        rest = ~direct
        if np.any(rest):
            if np.any(np.abs(s[rest].real) > _CONTINUATION_LIMIT):
                raise FactorizationError("continuation across the axis is limited to |Re s| < 0.45")
            for side_name in ("plus", "minus"):
                pick = rest & (sides == side_name)
                if np.any(pick):
                    pts = s[pick]
                    out[pick] = np.concatenate([self._near_axis(pts[lo:lo + _CHUNK], side_name)
                                                for lo in range(0, pts.size, _CHUNK)])
        return out

    def _direct(self, s):
        out = np.empty(s.shape + (self.values.shape[1],), dtype=complex)
        for lo in range(0, s.size, _CHUNK):
            sd = s[lo:lo + _CHUNK]
            kern = self.weights[None, :] / (self.nodes[None, :] ** 2 + sd[:, None] ** 2)
            out[lo:lo + _CHUNK] = -(sd[:, None] / np.pi) * (kern @ self.values)
        return out

    def _near_axis(self, s, side):
        tau0 = -1j * s
        phi0 = np.asarray(self.phi_at(s))
        nodes, w = self.nodes, self.weights
        total = np.zeros(phi0.shape, dtype=complex)
        for sign in (1.0, -1.0):
            diff = sign * nodes[None, :] - tau0[:, None]
            close = np.abs(diff) < 1e-9
            quot = (self.values[None, :, :] - phi0[:, None, :]) / np.where(close, 1.0, diff)[:, :, None]
            for i, k in zip(*np.nonzero(close)):
                # derivative of the even density at the node, by central difference
                eta = 1e-5
                t = 1j * (sign * nodes[k])
                ahead = np.asarray(self.phi_at(np.array([t + 1j * eta])))[0]
                behind = np.asarray(self.phi_at(np.array([t - 1j * eta])))[0]
                quot[i, k] = (ahead - behind) / (2 * eta)
            total += np.einsum("k,ikd->id", w, quot)
        log_term = np.log(self.upper - tau0) - _log_side(-self.upper - tau0, side)
        # -(s / pi) / (2 tau0) = -i / (2 pi), finite at s = 0
        return (-0.5j / np.pi) * (total + phi0 * log_term[:, None])

    def derivative(self, s):
        """``dF/ds`` at points off the axis (native side), shape ``s.shape + (n_densities,)``."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        if np.any(np.abs(s.real) < _NEAR_AXIS * self.width):
            raise FactorizationError("derivative near the axis: use a Cauchy mean")
        t2 = self.nodes[None, :] ** 2
        s2 = s[:, None] ** 2
        kern = self.weights[None, :] * (t2 - s2) / (t2 + s2) ** 2
        return -(kern @ self.values) / np.pi

    def integral(self) -> np.ndarray:
        """``int_0^T phi`` for every density."""
        return self.weights @ self.values


def _build_table(phi_tau: Callable, phi_at: Callable, decay: float, settings: QuadratureSettings,
                 probes: np.ndarray) -> tuple[CauchyTable, float]:
    upper = truncation_point(decay, settings)
    while np.max(np.abs(phi_tau(np.array([upper])))) / decay > settings.truncation_guard * 1e-2:
        upper *= 1.2
    width = _INITIAL_WIDTH
    previous = None
    for _ in range(6):
        panels = int(np.ceil(upper / width))
        nodes, weights = composite_nodes(np.linspace(0.0, upper, panels + 1), _PANEL_ORDER)
        table = CauchyTable(nodes, weights, np.asarray(phi_tau(nodes)).reshape(nodes.size, -1),
                            upper / panels, upper, phi_at)
        current = table.evaluate(probes)
        if previous is not None:
            err = float(np.max(np.abs(current - previous)))
            if err <= max(settings.abs_tol, settings.rel_tol * np.max(np.abs(current))):
                return table, err
        previous = current
        width /= 2
    raise FactorizationError("factor table did not converge")


def _cosh_sqrt(w):
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1.0
    out = np.cosh(np.sqrt(w))
    if np.any(small):
        ws = w[small]
        acc = np.zeros_like(ws)
        term = np.ones_like(ws)
        for k in range(1, 20):
            acc += term
            term = term * ws / ((2 * k - 1) * (2 * k))
        out[small] = acc
    return out


def _sinhc_sqrt(w):
    """``sinh(sqrt w) / sqrt w`` and its derivative with respect to ``w``."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < 1.0
    safe = np.where(small, 1.0, w)
    r = np.sqrt(safe)
    val = np.sinh(r) / r
    der = (np.cosh(r) - val) / (2 * safe)
    if np.any(small):
        ws = w[small]
        v = np.zeros_like(ws)
        d = np.zeros_like(ws)
        term = np.ones_like(ws)           # w**k / (2k+1)!
        for k in range(20):
            v += term
            term = term * ws / ((2 * k + 2) * (2 * k + 3))
        dterm = np.full_like(ws, 1.0 / 6.0)  # w**(k-1) / (2k+1)!
        for k in range(1, 20):
            d += k * dterm
            dterm = dterm * ws / ((2 * k + 2) * (2 * k + 3))
        val[small] = v
        der[small] = d
    return val, der


@dataclass
class FactorizationData:
    """Khrapkov factors for a crack continuing a side of the wedge of angle ``alpha``."""

    alpha: float
    settings: QuadratureSettings
    table: CauchyTable = field(repr=False)
    quad_error: float
    q: float
    X_inf: np.ndarray
    X_inf_slope: np.ndarray     # lim s (X(s) - X_inf) as |s| -> inf
    X_plus_0: np.ndarray
    X_minus_0: np.ndarray
    X_plus_minus1: np.ndarray
    dX_plus_minus1: np.ndarray
    dX_plus_inv_minus1: np.ndarray

    def b_beta(self, s, side=None):
        """``(B, beta)`` at ``s``."""
        vals = self.table.evaluate(s, side)
        return np.exp(0.5 * vals[..., 0]), vals[..., 1]

    def matrix(self, s, side=None):
        return x_matrix(self, s, side)

    def inverse(self, s, side=None):
        """``[X(s)]**-1 = (C I - S J) / B`` (``det(C I + S J) = 1``)."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        b, beta = self.b_beta(s, side)
        c, sh = _c_s(s, beta, self.alpha)
        out = -sh[:, None, None] * j_matrix(s, self.alpha)
        out[:, 0, 0] += c
        out[:, 1, 1] += c
        return out / b[:, None, None]

    def derivative(self, s):
        """``dX/ds`` at points off the imaginary axis (native factor)."""
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        vals = self.table.evaluate(s)
        ders = self.table.derivative(s)
        b = np.exp(0.5 * vals[:, 0])
        db = 0.5 * ders[:, 0] * b
        beta, dbeta = vals[:, 1], ders[:, 1]
        sa2 = np.sin(self.alpha) ** 2
        f = 1 - s * s * sa2
        w = f * beta**2
        dw = -2 * s * sa2 * beta**2 + 2 * f * beta * dbeta
        c = _cosh_sqrt(w)
        shc, dshc = _sinhc_sqrt(w)
        sh = beta * shc
        dc = 0.5 * shc * dw
        dsh = dbeta * shc + beta * dshc * dw
        jm = j_matrix(s, self.alpha)
        djm = np.zeros_like(jm)
        djm[:, 0, 1] = np.sin(self.alpha)
        djm[:, 1, 0] = -np.sin(self.alpha)
        eye = np.eye(2)
        core = c[:, None, None] * eye + sh[:, None, None] * jm
        dcore = dc[:, None, None] * eye + dsh[:, None, None] * jm + sh[:, None, None] * djm
        return db[:, None, None] * core + b[:, None, None] * dcore

    def derivative_near(self, s, side, radius=0.2):
        """``dX/ds`` at any point of the strip by Cauchy's formula."""
        return cauchy_mean(lambda t: x_matrix(self, t, side), complex(s), complex(s), radius, order=1)


def _c_s(s, beta, alpha):
    w = (1 - s * s * np.sin(alpha) ** 2) * beta**2
    shc, _ = _sinhc_sqrt(w)
    return _cosh_sqrt(w), beta * shc


def x_matrix(data: FactorizationData, s, side=None) -> np.ndarray:
    """Khrapkov factor ``X+`` (``side="plus"``) or ``X-`` (``side="minus"``).

    Off the axis ``side`` defaults to the native factor of the half-plane of
    ``s``; on the axis it selects the boundary value.  A non-native side is
    allowed for ``|Re s| < 0.45`` (analytic continuation).  Returns shape
    ``s.shape + (2, 2)`` (scalars give a single 2x2 matrix).
    """
    s_arr = np.asarray(s, dtype=complex)
    scalar = s_arr.ndim == 0
    s1 = np.atleast_1d(s_arr)
    b, beta = data.b_beta(s1, side)
    c, sh = _c_s(s1, beta, data.alpha)
    out = sh[:, None, None] * j_matrix(s1, data.alpha)
    out[:, 0, 0] += c
    out[:, 1, 1] += c
    out *= b[:, None, None]
    return out[0] if scalar else out.reshape(s_arr.shape + (2, 2))


def closed_form_x0(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """``(X+(0), X-(0))`` from the eigenvalue limits at ``s = 0``."""
    lam1 = 0.5 * (1 + np.pi / (alpha - np.sin(alpha)))
    lam2 = 0.5 * (1 + np.pi / (alpha + np.sin(alpha)))
    eps0 = 0.5 * np.log(lam1 / lam2)
    c0, s0 = np.cosh(eps0 / 2), np.sinh(eps0 / 2)
    j0 = j_matrix(0.0, alpha).real
    delta0 = lam1 * lam2
    plus = delta0**0.25 * (c0 * np.eye(2) + s0 * j0)
    minus = delta0**-0.25 * (c0 * np.eye(2) - s0 * j0)
    return plus, minus


def _khrapkov_densities(alpha):
    sa2 = np.sin(alpha) ** 2

    def phi_tau(tau):
        ke = kernel_eigens(1j * np.asarray(tau, dtype=float), alpha)
        return np.stack([np.log(ke.delta).real, (ke.eps / ke.f_half).real], axis=-1)

    def phi_at(s):
        ke = kernel_eigens(np.asarray(s, dtype=complex), alpha, check_branch=False)
        return np.stack([np.log(ke.delta), ke.eps / ke.f_half], axis=-1)

    return phi_tau, phi_at, sa2


def _cache_dir() -> Path | None:
    root = os.environ.get(CACHE_ENV)
    if root == "":
        return None
    return Path(root) if root else Path.home() / ".cache" / "wedgecrack"


def _cache_path(alpha, settings) -> Path | None:
    root = _cache_dir()
    if root is None:
        return None
    key = f"{CACHE_FORMAT_VERSION}:{alpha!r}:{settings.rel_tol!r}:{settings.abs_tol!r}:{settings.truncation_guard!r}"
    return root / f"khrapkov_{hashlib.sha1(key.encode()).hexdigest()[:16]}.npz"


def _load_table(path, alpha, settings, phi_at):
    try:
        with np.load(path) as data:
            header = data["header"]
            if int(header[0]) != CACHE_FORMAT_VERSION or header[1] != alpha or header[2] != settings.rel_tol:
                return None
            table = CauchyTable(data["nodes"], data["weights"], data["values"],
                                float(header[4]), float(header[5]), phi_at)
            return table, float(header[6])
    except (OSError, KeyError, ValueError):
        return None


def _save_table(path, alpha, settings, table, err):
    header = np.array([CACHE_FORMAT_VERSION, alpha, settings.rel_tol, table.nodes.size,
                       table.width, table.upper, err])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, header=header, nodes=table.nodes, weights=table.weights, values=table.values)
        os.replace(tmp, path)
    except OSError as exc:  # caching is an optimisation only
        logger.debug("could not write factor cache %s: %s", path, exc)


@lru_cache(maxsize=64)
def build_khrapkov(alpha: float, settings: QuadratureSettings = QuadratureSettings()) -> FactorizationData:
    """Tabulate the Khrapkov factors for angle ``alpha`` (memoized and disk-cached)."""
    if not 0.0 < alpha < np.pi:
        raise ValueError("alpha must lie in (0, pi)")
    alpha = float(alpha)
    phi_tau, phi_at, sa2 = _khrapkov_densities(alpha)
    path = _cache_path(alpha, settings)
    loaded = _load_table(path, alpha, settings, phi_at) if path and path.exists() else None
    if loaded is None:
        probes = np.array([-1.0, -0.5 + 2j, -2.0 + 7j, 1.5, 0.1 + 1j])
        table, err = _build_table(phi_tau, phi_at, 2 * alpha, settings, probes)
        if path:
            _save_table(path, alpha, settings, table, err)
    else:
        table, err = loaded
    q_int = integrate_decaying(lambda t: phi_tau(t)[:, 1], 2 * alpha, settings)
    q = float(np.real(q_int.value)) * np.sqrt(sa2) / np.pi
    # s (X(s) - X_inf) -> -(int phi_B / 2 pi) X_inf - (sin q / sin a) J0: the constant
    # part J0 of J anticommutes with the generator of X_inf.
    j0 = np.array([[np.cos(alpha), -np.sin(alpha)], [-np.sin(alpha), -np.cos(alpha)]])
    slope = -table.integral()[0].real / (2 * np.pi) * rotation(q) - np.sin(q) / np.sin(alpha) * j0
    proto = FactorizationData(alpha, settings, table, err, q, rotation(q), slope, None, None, None, None, None)
    proto.X_plus_0 = x_matrix(proto, 0.0, "plus")
    proto.X_minus_0 = x_matrix(proto, 0.0, "minus")
    proto.X_plus_minus1 = x_matrix(proto, -1.0)
    proto.dX_plus_minus1 = proto.derivative(-1.0)[0]
    inv = np.linalg.inv(proto.X_plus_minus1)
    proto.dX_plus_inv_minus1 = -inv @ proto.dX_plus_minus1 @ inv
    proto.quad_error = max(err, q_int.error)
    return proto


@dataclass
class ScalarFactorData:
    """Factors ``L+- = a+- X+-`` of the half-plane kernel, ``X+ / X- = L0`` on the axis."""

    settings: QuadratureSettings
    table: CauchyTable = field(repr=False)
    quad_error: float
    X_minus_0: float
    L_minus_0: float
    X1: float
    L0_const: float
    gamma_koiter: float

    def x(self, s, side=None):
        s_arr = np.asarray(s, dtype=complex)
        out = np.exp(self.table.evaluate(np.atleast_1d(s_arr), side)[..., 0])
        return out[0] if s_arr.ndim == 0 else out.reshape(s_arr.shape)

    def l_plus(self, s, side="plus"):
        return a_plus(s) * self.x(s, side)

    def l_minus(self, s, side="minus"):
        return a_minus(s) * self.x(s, side)


def _l0_log_tau(tau):
    tau = np.asarray(tau, dtype=float)
    u = 0.5 * np.pi * tau
    out = np.full(tau.shape, np.log(1 - 4 / np.pi**2))
    nz = tau > 1e-6
    # tau / sinh(u) written with exp(-u) stays finite for large tau
    ratio = 2 * tau[nz] * np.exp(-u[nz]) / -np.expm1(-2 * u[nz])
    out[nz] = np.log1p(-ratio**2)
    return out


def _x1_integrand(tau):
    """``(u coth u - 1) / (tau**2 - sinh(u)**2)`` with ``u = pi tau / 2``."""
    tau = np.asarray(tau, dtype=float)
    out = np.empty(tau.shape)
    k = np.pi**2 / 4
    small = tau < 0.1
    ts = tau[small] ** 2
    u2 = k * ts
    num = k * (1 / 3 - u2 * (1 / 45 - u2 * (2 / 945 - u2 / 4725)))
    den = 1 - k - u2 * k * (1 / 3 + u2 * (2 / 45 + u2 / 315))
    out[small] = num / den
    tl = tau[~small]
    u = 0.5 * np.pi * tl
    e2 = np.exp(-2 * u)  # scale by exp(-2u) to avoid overflow
    out[~small] = (u * (1 + e2) / (1 - e2) - 1) * 4 * e2 / (4 * tl**2 * e2 - (1 - e2) ** 2)
    return out


@lru_cache(maxsize=4)
def build_scalar_factor(settings: QuadratureSettings = QuadratureSettings()) -> ScalarFactorData:
    """Tabulate the half-plane factor ``X`` and its constants."""
    phi_tau = lambda t: _l0_log_tau(t)[:, None]
    phi_at = lambda s: np.log(l0_fun(np.asarray(s, dtype=complex)))[:, None]
    probes = np.array([-1.0, -0.5 + 2j, 1.0, 2.0 + 3j, 0.1 + 1j])
    table, err = _build_table(phi_tau, phi_at, np.pi, settings, probes)
    gamma_int = integrate_decaying(lambda t: _l0_log_tau(t) / (t**2 + 1), np.pi, settings)
    gamma = float(np.exp(-gamma_int.value / np.pi))
    x1_int = integrate_decaying(_x1_integrand, np.pi, settings)
    x1 = float(2 / np.pi * x1_int.value)
    x_minus_0 = float(np.pi / np.sqrt(np.pi**2 - 4))
    l_minus_0 = float(np.sqrt(np.pi / (np.pi**2 - 4)))
    return ScalarFactorData(settings, table, max(err, gamma_int.error, x1_int.error),
                            x_minus_0, l_minus_0, x1, x1 + np.log(2.0), gamma)
