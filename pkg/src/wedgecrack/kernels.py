"""Kernel functions of the wedge crack problems.

Conventions
-----------
* ``d(s, theta) = s**2 sin(theta)**2 - sin(theta s)**2``.
* For a crack continuing one side of a wedge of angle ``alpha`` the kernel
  splits as ``G(s) = 4 cot(pi s) G0(s)`` with
  ``G0 = b1 I + b2 J(s)``, ``J = [[l, m+], [m-, -l]]``, ``l = cos(alpha)`` and
  ``m± = (±s - 1) sin(alpha)``.  ``J @ J = f I`` with ``f = 1 - s**2 sin(alpha)**2``.
* The half-plane kernel is ``L(s) = (sin(pi s/2)**2 - s**2) / (2 sin(pi s))``,
  ``L = tan(pi s/2) L0(s) / 4`` and ``L0 = 1 - s**2 / sin(pi s/2)**2``.

All functions broadcast over numpy arrays of complex ``s``; 2x2 matrices are
returned with shape ``s.shape + (2, 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "CaseTag",
    "WedgeGeometry",
    "MaterialSpec",
    "KernelPoleError",
    "BranchCutError",
    "d_fun",
    "d_prime",
    "g_general",
    "g_side",
    "b_coefficients",
    "j_matrix",
    "g0_side",
    "g0_side_derivative",
    "kernel_eigens",
    "KernelEigens",
    "residue_g_side",
    "l_fun",
    "l0_fun",
    "cauchy_mean",
    "log1p_complex",
]

_ANGLE_TOL = 1e-14
_POLE_GUARD = 1e-12
_ASYMPTOTIC_IM = 3.0      # switch to the exponential-safe form when |Im(alpha s)| exceeds this
_SATURATED_IM = 340.0     # beyond this sin(alpha s) overflows; b1 = 1, b2 = 0 to machine precision
_REMOVABLE_RADIUS = 1e-3  # neighbourhood of s = ±1 evaluated by a Cauchy mean
_CAUCHY_CIRCLE = 0.2
_CAUCHY_NODES = 64


class KernelPoleError(ValueError):
    """Raised when a kernel is evaluated too close to one of its poles."""


class BranchCutError(ValueError):
    """Raised when ``f**(1/2)`` is requested on its branch cut."""


class CaseTag(str, Enum):
    GENERAL = "general"
    SIDE_CRACK = "side_crack"
    HALFPLANE = "halfplane"


@dataclass(frozen=True)
class WedgeGeometry:
    """Wedge ``-alpha2 < theta < alpha1`` with the crack on ``theta = 0``."""

    alpha1: float
    alpha2: float = np.pi

    def __post_init__(self):
        if not 0.0 < self.alpha1 < np.pi:
            raise ValueError(f"alpha1 must lie in (0, pi), got {self.alpha1!r}")
        if not 0.0 < self.alpha2 <= np.pi + _ANGLE_TOL:
            raise ValueError(f"alpha2 must lie in (0, pi], got {self.alpha2!r}")

    @property
    def case_tag(self) -> CaseTag:
        if abs(self.alpha2 - np.pi) < _ANGLE_TOL:
            return CaseTag.SIDE_CRACK
        if abs(self.alpha1 - np.pi / 2) < _ANGLE_TOL and abs(self.alpha2 - np.pi / 2) < _ANGLE_TOL:
            return CaseTag.HALFPLANE
        return CaseTag.GENERAL


@dataclass(frozen=True)
class MaterialSpec:
    """Isotropic elastic constants; plane strain is mapped to effective plane-stress values."""

    young_modulus: float = 1.0
    poisson: float = 0.3
    strain_state: str = "plane_stress"

    def __post_init__(self):
        if self.young_modulus <= 0:
            raise ValueError("Young's modulus must be positive")
        if not 0.0 <= self.poisson < 0.5:
            raise ValueError("Poisson's ratio must lie in [0, 1/2)")
        if self.strain_state not in ("plane_stress", "plane_strain"):
            raise ValueError(f"unknown strain state {self.strain_state!r}")

    @property
    def effective(self) -> tuple[float, float]:
        """``(E, nu)`` used in the plane-stress formulas."""
        e, nu = self.young_modulus, self.poisson
        if self.strain_state == "plane_strain":
            return e / (1 - nu**2), nu / (1 - nu**2)
        return e, nu


def _c(s):
    return np.asarray(s, dtype=complex)


def _sinc(z):
    z = _c(z)
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-8
    out[nz] = np.sin(z[nz]) / z[nz]
    out[~nz] = 1.0 - z[~nz] ** 2 / 6.0
    return out


def _tanc(z):
    z = _c(z)
    out = np.ones_like(z)
    nz = np.abs(z) > 1e-8
    out[nz] = np.tan(z[nz]) / z[nz]
    out[~nz] = 1.0 + z[~nz] ** 2 / 3.0
    return out


def log1p_complex(z):
    """``log(1 + z)`` accurate for tiny complex ``z`` (numpy's complex log1p is not)."""
    z = _c(z)
    series = z * (1 - z * (0.5 - z * (1 / 3 - z / 4)))
    return np.where(np.abs(z) < 1e-4, series, np.log(1 + z))


def d_fun(s, theta):
    """``s**2 sin(theta)**2 - sin(theta s)**2``."""
    s = _c(s)
    return s * s * np.sin(theta) ** 2 - np.sin(theta * s) ** 2


def d_prime(s, theta):
    """Derivative of :func:`d_fun` with respect to ``s``."""
    s = _c(s)
    return 2 * s * np.sin(theta) ** 2 - theta * np.sin(2 * theta * s)


def _guard(dval, s):
    if np.any(np.abs(dval) < _POLE_GUARD * (1 + np.abs(s) ** 2)):
        raise KernelPoleError("kernel evaluated at a zero of d(s, theta); use residue formulas")


def g_general(s, alpha1, alpha2):
    """Full 2x2 kernel for a crack on ``theta = 0`` of the wedge ``(-alpha2, alpha1)``."""
    s = _c(s)
    d1, d2 = d_fun(s, alpha1), d_fun(s, alpha2)
    _guard(d1, s)
    _guard(d2, s)
    out = np.empty(s.shape + (2, 2), dtype=complex)
    for j in (1, 2):
        sign = (-1) ** j
        out[..., j - 1, j - 1] = (-(np.sin(2 * alpha1 * s) - sign * s * np.sin(2 * alpha1)) / d1
                                  - (np.sin(2 * alpha2 * s) - sign * s * np.sin(2 * alpha2)) / d2)
        out[..., j - 1, 2 - j] = 2 * s * ((-1) ** (j - 1) * s - 1) * (
            -np.sin(alpha1) ** 2 / d1 + np.sin(alpha2) ** 2 / d2)
    return out


def g_side(s, alpha):
    """Kernel for the crack continuing a wedge side (``alpha2 = pi``), direct evaluation."""
    s = _c(s)
    d1 = d_fun(s, alpha)
    _guard(d1, s)
    sin_ps = np.sin(np.pi * s)
    if np.any(np.abs(sin_ps) < _POLE_GUARD):
        raise KernelPoleError("cot(pi s) pole: s is an integer")
    cot2 = 2 * np.cos(np.pi * s) / sin_ps
    sa = np.sin(alpha)
    out = np.empty(s.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -(np.sin(2 * alpha * s) + s * np.sin(2 * alpha)) / d1 + cot2
    out[..., 1, 1] = -(np.sin(2 * alpha * s) - s * np.sin(2 * alpha)) / d1 + cot2
    out[..., 0, 1] = -2 * s * (s - 1) * sa**2 / d1
    out[..., 1, 0] = -2 * s * (-s - 1) * sa**2 / d1
    return out


def cauchy_mean(fun, s, center, radius=_CAUCHY_CIRCLE, nodes=_CAUCHY_NODES, order=0):
    """Value (``order=0``) or first derivative (``order=1``) of an analytic ``fun`` at ``s``.

    Uses the trapezoidal rule for Cauchy's integral formula on a circle around
    ``center``.  ``fun`` must be analytic in a disc somewhat larger than the
    circle, apart from a removable singularity, and may return arrays of any
    trailing shape.
    """
    s = _c(s)
    theta = 2 * np.pi * (np.arange(nodes) + 0.5) / nodes
    t = center + radius * np.exp(1j * theta)
    vals = np.asarray(fun(t))
    extra = (1,) * (vals.ndim - 1)
    w = (t - center)[(slice(None),) + (None,) * s.ndim]
    diff = t[(slice(None),) + (None,) * s.ndim] - s[None]
    kern = w / diff ** (order + 1)
    kern = kern.reshape(kern.shape + extra)
    scale = 1.0 if order == 0 else float(order)
    return scale * np.mean(kern * vals[(slice(None),) + (None,) * s.ndim], axis=0)


def _b_raw(s, alpha):
    s = _c(s)
    b1 = np.empty_like(s)
    b2 = np.empty_like(s)
    y = np.abs((alpha * s).imag)
    small = y <= _ASYMPTOTIC_IM
    big = (y > _ASYMPTOTIC_IM) & (y <= _SATURATED_IM)
    huge = y > _SATURATED_IM
    sa = np.sin(alpha)
    if np.any(small):
        z = s[small]
        dt = sa**2 - alpha**2 * _sinc(alpha * z) ** 2
        tc = _tanc(np.pi * z)
        b1[small] = 0.5 * (1 - np.pi * alpha * tc * _sinc(2 * alpha * z) / dt)
        b2[small] = -np.pi * tc * sa / (2 * dt)
    if np.any(big):
        z = s[big]
        sin_az = np.sin(alpha * z)
        u = z * sa / sin_az
        tp = np.tan(np.pi * z)
        b1[big] = 0.5 * (1 - tp * (np.cos(alpha * z) / sin_az) / (u * u - 1))
        b2[big] = -tp * u / (2 * sin_az * (u * u - 1))
    if np.any(huge):
        b1[huge] = 1.0
        b2[huge] = 0.0
    return b1, b2


def b_coefficients(s, alpha):
    """The even meromorphic functions ``(b1, b2)`` with ``G0 = b1 I + b2 J``.

    The removable singularities at ``s = ±1`` are evaluated through a Cauchy
    mean on a surrounding circle.
    """
    s = _c(s)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    with np.errstate(divide="ignore", invalid="ignore"):  # removable points are overwritten below
        b1, b2 = _b_raw(s, alpha)
    for center in (1.0, -1.0):
        near = np.abs(s - center) < _REMOVABLE_RADIUS
        if np.any(near):
            vals = cauchy_mean(lambda t: np.stack(_b_raw(t, alpha), axis=-1), s[near], center)
            b1[near], b2[near] = vals[..., 0], vals[..., 1]
    if scalar:
        return b1[0], b2[0]
    return b1, b2


def j_matrix(s, alpha):
    """``J(s) = [[cos a, (s - 1) sin a], [(-s - 1) sin a, -cos a]]``."""
    s = _c(s)
    sa, ca = np.sin(alpha), np.cos(alpha)
    out = np.empty(s.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = ca
    out[..., 1, 1] = -ca
    out[..., 0, 1] = (s - 1) * sa
    out[..., 1, 0] = (-s - 1) * sa
    return out


def g0_side(s, alpha):
    """Matrix ``G0(s) = b1 I + b2 J(s)``, analytic at ``s = 0, ±1``."""
    s = _c(s)
    b1, b2 = b_coefficients(s, alpha)
    out = b2[..., None, None] * j_matrix(s, alpha)
    out[..., 0, 0] += b1
    out[..., 1, 1] += b1
    return out


def g0_side_derivative(s, alpha, radius=0.2):
    """``dG0/ds`` by Cauchy's formula on a circle of the given radius around ``s``.

    The radius must keep the circle clear of the poles of ``G0`` (half-integers
    and the zeros of ``d``); 0.2 is safe near the integers.
    """
    s = _c(s)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.stack([cauchy_mean(lambda t: g0_side(t, alpha), si, si, radius, order=1) for si in s])
    return out[0] if scalar else out


@dataclass(frozen=True)
class KernelEigens:
    lam1: np.ndarray
    lam2: np.ndarray
    delta: np.ndarray
    eps: np.ndarray
    f: np.ndarray
    f_half: np.ndarray


def kernel_eigens(s, alpha, check_branch=True):
    """Eigenvalues ``b1 ± b2 f**(1/2)`` of ``G0`` with ``Delta = det G0`` and ``eps = log(lam1/lam2)/2``.

    ``f**(1/2)`` is the principal root, holomorphic off the real rays
    ``|s| >= 1/sin(alpha)`` and equal to 1 at ``s = 0``.
    """
    s = _c(s)
    f = 1 - s * s * np.sin(alpha) ** 2
    if check_branch and np.any((np.abs(s.imag) < 1e-14) & (f.real <= 0)):
        raise BranchCutError("f**(1/2) requested on its branch cut")
    fh = np.sqrt(f)
    b1, b2 = b_coefficients(s, alpha)
    lam1 = b1 + b2 * fh
    lam2 = b1 - b2 * fh
    delta = b1 * b1 - b2 * b2 * f
    eps = 0.5 * log1p_complex(2 * b2 * fh / lam2)
    return KernelEigens(lam1, lam2, delta, eps, f, fh)


def residue_g_side(s_pole, alpha):
    """Residue of ``G(s) = 4 cot(pi s) G0(s)`` at a pole.

    Integers use ``(4/pi) G0(m)``; nonreal or non-integer zeros of ``d`` use the
    simple-zero formula ``[-sin(2 alpha s) I - 2 s sin(alpha) J(s)] / d'(s)``.
    """
    s_pole = complex(s_pole)
    if abs(s_pole.imag) < 1e-12 and abs(s_pole.real - round(s_pole.real)) < 1e-12:
        return 4 / np.pi * g0_side(round(s_pole.real), alpha)
    dp = d_prime(s_pole, alpha)
    if abs(dp) < _POLE_GUARD:
        raise KernelPoleError("double zero of d(s, alpha): residue formula degenerates")
    num = -2 * s_pole * np.sin(alpha) * j_matrix(s_pole, alpha)
    num[0, 0] -= np.sin(2 * alpha * s_pole)
    num[1, 1] -= np.sin(2 * alpha * s_pole)
    return num / dp


def l_fun(s):
    """Half-plane kernel ``(sin(pi s/2)**2 - s**2) / (2 sin(pi s))``."""
    s = _c(s)
    return (np.sin(np.pi * s / 2) ** 2 - s * s) / (2 * np.sin(np.pi * s))


def l0_fun(s):
    """``1 - s**2 / sin(pi s/2)**2``, analytic at ``s = 0``."""
    s = _c(s)
    ratio = (2 / np.pi) / _sinc(np.pi * s / 2)
    return 1 - ratio * ratio
