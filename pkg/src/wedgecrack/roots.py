"""Pole and zero tables in the complex plane.

``d(s, a) = (s sin a - sin a s)(s sin a + sin a s)``, so its zeros are the
zeros of the two entire factors ``h_c(s) = s sin a - c sin(a s)`` with
``c = ±1``.  Complex zeros are located by argument-principle box counting on
subdivided rectangles and polished by Newton's method; real zeros come from a
sign-change scan.  Only representatives with ``Re s > 0`` and ``Im s >= 0`` are
stored; conjugates are implied.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .kernels import d_fun

__all__ = [
    "RootFindingError",
    "ConfluentPoleError",
    "RootTable",
    "winding_number",
    "factor_zeros",
    "sigma_zeros",
    "pole_table",
    "pole_window",
    "halfplane_zero_table",
    "halfplane_window",
    "char_roots",
    "ALPHA_STAR",
]

logger = logging.getLogger(__name__)

_NEWTON_TOL = 1e-15
_SEPARATION = 1e-6
_LEFT_EDGE = 0.5


class RootFindingError(RuntimeError):
    """Root finder failed or the argument-principle audit disagrees."""


class ConfluentPoleError(RootFindingError):
    """An integer pole coincides with a zero of ``d`` (double pole)."""


@dataclass(frozen=True)
class RootTable:
    """Ordered poles ``s_0 = 0, s_1 = 1, s_2, ...`` with tags ``integer`` / ``sigma``."""

    alpha: float
    roots: np.ndarray
    tags: tuple[str, ...] = field(default_factory=tuple)

    @property
    def count(self) -> int:
        return len(self.roots)

    def __len__(self):
        return len(self.roots)

    @property
    def is_real(self) -> np.ndarray:
        return np.abs(self.roots.imag) == 0.0


def _h(s, alpha, c):
    return s * np.sin(alpha) - c * np.sin(alpha * s)


def _dh(s, alpha, c):
    return np.sin(alpha) - c * alpha * np.cos(alpha * s)


def _edge_phase(fun, z0, z1, n=64, depth=0):
    t = np.linspace(0.0, 1.0, n + 1)
    z = z0 + (z1 - z0) * t
    vals = fun(z)
    if np.any(np.abs(vals) < 1e-300):
        raise RootFindingError("zero on a counting contour")
    dphi = np.angle(vals[1:] / vals[:-1])
    bad = np.abs(dphi) > np.pi / 4
    if not np.any(bad) or depth > 12:
        return float(np.sum(dphi))
    total = 0.0
    for k in range(n):
        if bad[k]:
            total += _edge_phase(fun, z[k], z[k + 1], 16, depth + 1)
        else:
            total += dphi[k]
    return total


def winding_number(fun, x0, x1, y0, y1, n=64) -> int:
    """Number of zeros of an entire ``fun`` inside the rectangle ``[x0, x1] x [y0, y1]``."""
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    phase = 0.0
    for k in range(4):
        z0, z1 = corners[k], corners[(k + 1) % 4]
        # long edges need proportionally more samples or close zeros alias
        phase += _edge_phase(fun, z0, z1, max(n, int(n * abs(z1 - z0))))
    count = phase / (2 * np.pi)
    rounded = int(round(count))
    if abs(count - rounded) > 1e-3:
        raise RootFindingError(f"non-integer winding number {count}")
    return rounded


def _newton(fun, dfun, z, box):
    x0, x1, y0, y1 = box
    for _ in range(60):
        step = fun(z) / dfun(z)
        z = z - step
        if abs(step) < _NEWTON_TOL * max(1.0, abs(z)):
            break
    else:
        return None
    pad = 1e-9 * max(1.0, abs(z))
    if x0 - pad <= z.real <= x1 + pad and y0 - pad <= z.imag <= y1 + pad:
        return z
    return None


def _boxes(fun, dfun, box, count, found, depth=0):
    if count == 0:
        return
    x0, x1, y0, y1 = box
    if count == 1 and max(x1 - x0, y1 - y0) < 2.0:
        z = _newton(fun, dfun, complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), box)
        if z is not None:
            found.append(z)
            return
    if max(x1 - x0, y1 - y0) < _SEPARATION:
        raise ConfluentPoleError(f"{count} zeros closer than {_SEPARATION:g} near {complex(x0, y0)}")
    if depth > 80:
        raise RootFindingError("box subdivision did not isolate the zeros")
    if x1 - x0 >= y1 - y0:
        xm = 0.5 * (x0 + x1) + 1e-7 * (x1 - x0)
        halves = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
    else:
        ym = 0.5 * (y0 + y1) + 1e-7 * (y1 - y0)
        halves = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
    first = winding_number(fun, *halves[0])
    _boxes(fun, dfun, halves[0], first, found, depth + 1)
    _boxes(fun, dfun, halves[1], count - first, found, depth + 1)


def _imag_bound(alpha, re_max):
    return np.arcsinh(2.0 * (re_max + 2.0)) / alpha + 1.0


def factor_zeros(alpha: float, c: int, re_max: float) -> list[complex]:
    """Nonreal zeros of ``s sin(alpha) - c sin(alpha s)`` with ``0.5 < Re s < re_max`` and ``Im s > 0``."""
    fun = lambda z: _h(z, alpha, c)
    dfun = lambda z: _dh(s=z, alpha=alpha, c=c)
    ytop = _imag_bound(alpha, re_max)
    # Count the full symmetric box, subtract the real zeros, halve for the upper half.
    total = winding_number(fun, _LEFT_EDGE, re_max, -ytop, ytop)
    real = _real_factor_zeros(alpha, c, re_max)
    upper, rem = divmod(total - len(real), 2)
    if rem:
        raise RootFindingError("zero count is not symmetric about the real axis")
    lower_edge = _SEPARATION
    count = winding_number(fun, _LEFT_EDGE, re_max, lower_edge, ytop)
    if count != upper:
        raise ConfluentPoleError("a complex zero lies within the separation band of the real axis")
    found: list[complex] = []
    _boxes(fun, dfun, (_LEFT_EDGE, re_max, lower_edge, ytop), count, found)
    if len(found) != count:
        raise RootFindingError(f"found {len(found)} zeros, argument principle counts {count}")
    return found


def _real_factor_zeros(alpha, c, re_max):
    x = np.linspace(_LEFT_EDGE, re_max, int(64 * (re_max - _LEFT_EDGE)) + 2)
    vals = _h(x, alpha, c).real
    out = []
    for k in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
        out.append(brentq(lambda t: _h(t, alpha, c).real, x[k], x[k + 1], xtol=1e-15, rtol=1e-15))
    return out


def sigma_zeros(alpha: float, re_max: float) -> np.ndarray:
    """Zeros of ``d(., alpha)`` with ``Re s > 0``, ``Im s >= 0``, excluding ``s = 1``, sorted by real part."""
    re_max = float(re_max) + 0.37  # keep the right edge away from integers and symmetric points
    zeros = []
    for c in (1, -1):
        zeros.extend(factor_zeros(alpha, c, re_max))
        zeros.extend(complex(x) for x in _real_factor_zeros(alpha, c, re_max) if abs(x - 1.0) > 1e-9)
    zeros = np.array(sorted(zeros, key=lambda z: (z.real, z.imag)), dtype=complex)
    zeros = np.array([_polish(z, alpha) for z in zeros], dtype=complex)
    return zeros[zeros.real <= re_max - 0.37]


def _polish(z, alpha):
    c = 1 if abs(_h(z, alpha, 1)) < abs(_h(z, alpha, -1)) else -1
    for _ in range(5):
        step = _h(z, alpha, c) / _dh(z, alpha, c)
        z = z - step
        if abs(step) < 1e-16 * abs(z):
            break
    if abs(z.imag) < 1e-15:
        z = complex(z.real, 0.0)
    return z


def pole_window(alpha: float, re_max: float) -> RootTable:
    """All poles ``s_n`` with ``Re s_n <= re_max``: 0, 1, integers and ``d``-zeros merged by real part."""
    sig = sigma_zeros(alpha, re_max)
    ints = np.arange(2, int(np.floor(re_max)) + 1, dtype=float)
    for m in ints:
        if np.any(np.abs(sig - m) < _SEPARATION):
            raise ConfluentPoleError(f"integer pole {int(m)} coincides with a zero of d at alpha={alpha}")
    entries = [(m, "integer") for m in ints] + [(z, "sigma") for z in sig]
    entries.sort(key=lambda e: (complex(e[0]).real, complex(e[0]).imag))
    roots = np.array([0.0, 1.0] + [complex(e[0]) for e in entries], dtype=complex)
    tags = ("integer", "integer") + tuple(e[1] for e in entries)
    return RootTable(alpha, roots, tags)


def pole_table(alpha: float, n: int) -> RootTable:
    """``s_0 = 0``, ``s_1 = 1`` and the next ``n`` poles of ``G`` in ``Re s > 0``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    re_max = n + 2.0
    while True:
        table = pole_window(alpha, re_max)
        if table.count >= n + 2:
            return RootTable(alpha, table.roots[: n + 2], table.tags[: n + 2])
        re_max *= 1.5


def halfplane_window(re_max: float) -> np.ndarray:
    """Nonreal zeros of ``s**2 - sin(pi s / 2)**2`` with ``Re s <= re_max``, ``Im s > 0``."""
    sig = sigma_zeros(np.pi / 2, re_max)
    return sig[sig.imag > 0]


def halfplane_zero_table(n: int) -> np.ndarray:
    """First ``n`` nonreal zeros of ``s**2 - sin(pi s / 2)**2`` in the first quadrant, ordered by real part."""
    if n < 1:
        raise ValueError("n must be at least 1")
    re_max = 2.0 * n + 4.0
    while True:
        zeros = halfplane_window(re_max)
        if len(zeros) >= n:
            return zeros[:n]
        re_max *= 1.5


ALPHA_STAR = 0.431 * np.pi  # approximate threshold for the second characteristic root


def char_roots(alpha: float, grid: int = 2048) -> tuple[float, float | None]:
    """Roots of ``sin(mu (pi + alpha))**2 - mu**2 sin(alpha)**2`` in ``(0, 1)``.

    Returns ``(mu, mu0)``; ``mu0`` is ``None`` when only one root exists.
    """
    if not 0.0 < alpha < np.pi:
        raise ValueError("alpha must lie in (0, pi)")
    fun = lambda m: np.sin(m * (np.pi + alpha)) ** 2 - (m * np.sin(alpha)) ** 2
    mu = np.arange(1, grid) / grid
    vals = fun(mu)
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    found = [brentq(fun, mu[k], mu[k + 1], xtol=1e-16, rtol=1e-15) for k in idx]
    if not found:
        raise RootFindingError(f"no characteristic root in (0, 1) at alpha={alpha}")
    return found[0], (found[1] if len(found) > 1 else None)
