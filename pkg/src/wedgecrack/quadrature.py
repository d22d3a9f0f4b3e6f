"""Numerical integration used by the factorization and weight-function code.

Three kinds of integral appear:

* smooth integrands on ``[0, inf)`` with a known exponential decay rate,
* Cauchy principal values on a finite interval,
* vertical-line contour integrals ``(1/2 pi i) int F(t) r**t dt`` whose
  integrand decays only algebraically but oscillates with frequency ``|log r|``.

Every routine returns a :class:`QuadResult` carrying an error estimate.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "QuadratureSettings",
    "QuadResult",
    "QuadratureError",
    "SlowConvergenceWarning",
    "gauss_legendre",
    "composite_nodes",
    "truncation_point",
    "integrate_decaying",
    "integrate_interval",
    "pv_cauchy",
    "wynn_epsilon",
    "mellin_contour",
]

logger = logging.getLogger(__name__)

_PANEL_ORDER = 16


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails to reach its tolerance."""


class SlowConvergenceWarning(RuntimeWarning):
    """Emitted when a contour integral converges slowly (``r`` close to 1)."""


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_panels: int = 4096
    truncation_guard: float = 1e-14

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.truncation_guard <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_panels < 4:
            raise ValueError("max_panels must be at least 4")

    def accepts(self, err, value) -> bool:
        return err <= max(self.abs_tol, self.rel_tol * np.max(np.abs(value)))


class QuadResult(NamedTuple):
    value: complex | np.ndarray
    error: float


@lru_cache(maxsize=32)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on ``[-1, 1]``."""
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_nodes(breaks, order: int = _PANEL_ORDER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss-Legendre rule over consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    left, right = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (right - left)
    nodes = (left + half * (x + 1)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def _apply(f, nodes, weights):
    vals = np.asarray(f(nodes))
    return np.tensordot(weights, vals, axes=(0, 0))


def truncation_point(decay_rate: float, settings: QuadratureSettings, minimum: float = 40.0) -> float:
    """Upper limit ``T`` such that ``exp(-decay_rate T)`` is below the truncation guard."""
    if decay_rate <= 0:
        raise ValueError("decay_rate must be positive")
    return max(minimum, -np.log(settings.truncation_guard) / decay_rate)


def integrate_interval(f: Callable, a: float, b: float, settings: QuadratureSettings = QuadratureSettings(),
                       panels: int = 4, breaks=None) -> QuadResult:
    """Composite Gauss-Legendre on ``[a, b]`` with panel doubling until converged.

    ``breaks`` optionally fixes interior breakpoints (e.g. a near-singular point)
    that every refinement keeps.
    """
    fixed = np.unique(np.concatenate([[a, b], [] if breaks is None else np.asarray(breaks, float)]))
    fixed = fixed[(fixed >= a) & (fixed <= b)]

    def rule(n):
        pts = np.concatenate([np.linspace(lo, hi, n + 1)[:-1] for lo, hi in zip(fixed[:-1], fixed[1:])] + [[b]])
        return _apply(f, *composite_nodes(pts))

    n = max(1, panels)
    coarse = rule(n)
    while True:
        fine = rule(2 * n)
        err = float(np.max(np.abs(fine - coarse)))
        if settings.accepts(err, fine):
            return QuadResult(fine, err)
        n *= 2
        if n * (fixed.size - 1) > settings.max_panels:
            raise QuadratureError(f"no convergence on [{a}, {b}] after {n} panels (error {err:.3e})")
        coarse = fine


def integrate_decaying(f: Callable, decay_rate: float, settings: QuadratureSettings = QuadratureSettings(),
                       head: float = 0.0) -> QuadResult:
    """Integral of ``f`` over ``[0, inf)`` for integrands decaying like ``exp(-decay_rate t)``.

    The range is truncated at :func:`truncation_point` (extended while the
    integrand is still above the guard there) and integrated by panel doubling.
    """
    upper = max(truncation_point(decay_rate, settings), head)
    for _ in range(20):
        tail = float(np.max(np.abs(np.asarray(f(np.array([upper]))))))
        if tail / decay_rate <= settings.truncation_guard:
            break
        upper *= 1.25
    else:
        raise QuadratureError("integrand does not decay at the stated rate")
    result = integrate_interval(f, 0.0, upper, settings, panels=max(4, int(np.ceil(upper))))
    return QuadResult(result.value, result.error + tail / decay_rate)


def pv_cauchy(f: Callable, t: float, a: float, b: float,
              settings: QuadratureSettings = QuadratureSettings(), df: Callable | None = None) -> QuadResult:
    """Principal value of ``int_a^b f(x) / (x - t) dx`` for ``a < t < b``.

    Uses singularity subtraction: ``int (f(x) - f(t)) / (x - t) dx + f(t) log((b - t)/(t - a))``.
    ``t`` is kept as a panel breakpoint so no node lands on it; ``df`` (the
    derivative of ``f``) is used for nodes within 1e-7 of ``t`` if supplied.
    """
    if not a < t < b:
        raise ValueError("the singular point must lie strictly inside (a, b)")
    ft = np.asarray(f(np.array([t])))[0]

    def subtracted(x):
        diff = x - t
        vals = np.asarray(f(x))
        shape = (-1,) + (1,) * (vals.ndim - 1)
        out = (vals - ft) / diff.reshape(shape)
        if df is not None:
            close = np.abs(diff) < 1e-7
            if np.any(close):
                out[close] = np.asarray(df(x[close]))
        return out

    reg = integrate_interval(subtracted, a, b, settings, panels=4, breaks=[t])
    return QuadResult(reg.value + ft * np.log((b - t) / (t - a)), reg.error)


def wynn_epsilon(partial_sums) -> tuple[complex | np.ndarray, float]:
    """Wynn's epsilon extrapolation of a sequence of partial sums (element-wise for arrays).

    Returns the extrapolated limit and the size of its last change.
    """
    seq = [np.asarray(p, dtype=complex) for p in partial_sums]
    n = len(seq)
    if n < 3:
        return seq[-1], float(np.max(np.abs(seq[-1] - seq[0]))) if n > 1 else np.inf
    prev = [np.zeros_like(seq[0]) for _ in range(n + 1)]
    cur = list(seq)
    best, best_prev = seq[-1], seq[-2]
    for k in range(1, n):
        nxt = []
        for j in range(len(cur) - 1):
            diff = cur[j + 1] - cur[j]
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = np.where(diff != 0, 1.0 / diff, 1e300)
            nxt.append(prev[j + 1] + inv)
        prev, cur = cur, nxt
        if k % 2 == 0 and len(cur) >= 2:
            best, best_prev = cur[-1], cur[-2]
        if len(cur) < 2:
            if k % 2 == 0 and len(cur) == 1:
                best = cur[-1]
            break
    if not np.all(np.isfinite(best)) or np.max(np.abs(best)) > 1e250:
        return seq[-1], float(np.max(np.abs(seq[-1] - seq[-2])))
    return best, float(np.max(np.abs(best - best_prev)))


def mellin_contour(F: Callable, r: float, omega: float = -0.25,
                   settings: QuadratureSettings = QuadratureSettings(),
                   head: float = 20.0, max_cycles: int = 60) -> QuadResult:
    """``(1 / 2 pi i) int_{omega - i inf}^{omega + i inf} F(t) r**t dt`` for ``F`` decaying algebraically.

    The head ``|tau| <= head`` is integrated adaptively.  Beyond it the real
    axis is cut at half-periods ``pi / |log r|`` of the oscillation ``r**(i tau)``,
    and the resulting sequence of partial sums is accelerated with Wynn's
    epsilon algorithm.
    """
    if r <= 0 or r == 1:
        raise ValueError("r must be positive and different from 1")
    log_r = np.log(r)
    if abs(log_r) < 1e-3:
        warnings.warn(f"contour integral at r={r} converges slowly", SlowConvergenceWarning, stacklevel=2)

    def both_sides(tau):
        tp = omega + 1j * tau
        tm = omega - 1j * tau
        vp = np.asarray(F(tp))
        vm = np.asarray(F(tm))
        shape = (-1,) + (1,) * (vp.ndim - 1)
        return (vp * np.exp(tp * log_r).reshape(shape) + vm * np.exp(tm * log_r).reshape(shape)) / (2 * np.pi)

    half_period = np.pi / abs(log_r)
    # The head must cover a few oscillations; geometric panels follow the algebraic decay.
    head = max(head, 8 * half_period)
    breaks = np.unique(np.concatenate([np.linspace(0.0, min(head, 20.0), 21),
                                       np.geomspace(min(head, 20.0), head, max(2, int(np.ceil(np.log2(head / 20.0)))) + 1)]))
    start = integrate_interval(both_sides, 0.0, head, settings, panels=max(2, int(np.ceil(2 / min(1.0, half_period)))),
                               breaks=breaks)
    order = 24
    sums = [start.value]
    total = start.value
    lo = head
    estimate, err = total, np.inf
    for cycle in range(max_cycles):
        hi = lo + half_period
        nodes, weights = composite_nodes([lo, hi], order)
        increment = np.tensordot(weights, both_sides(nodes), axes=(0, 0))
        total = total + increment
        sums.append(total)
        lo = hi
        if not np.any(increment):
            return QuadResult(total, start.error)
        if len(sums) >= 6:
            new_estimate, _ = wynn_epsilon(sums)
            err = float(np.max(np.abs(new_estimate - estimate)))
            estimate = new_estimate
            if settings.accepts(err, estimate) and cycle > 8:
                return QuadResult(estimate, err + start.error)
    logger.debug("mellin_contour reached max_cycles at r=%g (err %.2e)", r, err)
    if not err < 1e3 * max(settings.abs_tol, settings.rel_tol * np.max(np.abs(estimate))):
        raise QuadratureError(f"contour integral did not converge at r={r} (err {err:.2e})")
    return QuadResult(estimate, err + start.error)
