"""Acceptance criteria 1-10 at their stated tolerances.

Each test records one pass/fail line, printed in the terminal summary.
"""
import time
import warnings

import numpy as np
import pytest

from wedgecrack.cli import table_rows
from wedgecrack.edge import sif_edge_constant, sif_edge_eigen
from wedgecrack.factor import build_khrapkov, build_scalar_factor, x_matrix
from wedgecrack.halfplane import (edge_limit_sif, koiter_gamma, near_boundary_energy, solve_halfplane,
                                  solve_halfplane_system)
from wedgecrack.internal import energy_release, near_vertex_energy, q_matrix, solve_internal, solve_system
from wedgecrack.kernels import g0_side, g_side, l_fun
from wedgecrack.oracle import sie_solve

from conftest import TABLE_ANGLES

TAUS = np.linspace(0.1, 30.0, 50)
P_WEDGE = np.array([1.0, 1.0])
WEDGE_ANGLES = [np.pi / 4, np.pi / 2, 3 * np.pi / 4]


def _table(number, report, tol_for):
    t0 = time.perf_counter()
    rows = table_rows(number)
    elapsed = time.perf_counter() - t0
    bad = [r for r in rows if r["rel_err"] > tol_for(r)]
    worst = max(rows, key=lambda r: r["rel_err"])
    detail = (f"{len(rows) - len(bad)}/{len(rows)} entries within tolerance; worst "
              f"{worst['quantity']} at alpha={worst['alpha_over_pi']}pi rel err {worst['rel_err']:.2e}; "
              f"{elapsed:.1f}s")
    ok = report(number, not bad and elapsed < 120, detail)
    assert ok, detail


def test_criterion_1_table1(report):
    _table(1, report, lambda r: 1e-4)


def test_criterion_2_table2(report):
    _table(2, report, lambda r: 1e-4)


def test_criterion_3_table3(report):
    stray = lambda r: r["alpha_over_pi"] == "3/4" and r["quantity"] == "K_I"
    _table(3, report, lambda r: 1e-3 if stray(r) else 1e-4)


def test_criterion_4_koiter_constant(report):
    t0 = time.perf_counter()
    gamma = koiter_gamma()
    elapsed = time.perf_counter() - t0
    ok = abs(gamma - 1.1215222) <= 1e-6 and round(gamma, 4) == 1.1215 and elapsed < 1.0
    detail = f"gamma = {gamma:.10f} in {elapsed:.3f}s"
    assert report(4, ok, detail), detail


def test_criterion_5_closed_form_limits(report):
    prod = max(np.max(np.abs(build_khrapkov(a).X_minus_0 @ build_khrapkov(a).X_plus_0 - np.eye(2)))
               for a in TABLE_ANGLES)
    sf = build_scalar_factor()
    x0_err = abs(sf.X_minus_0 - np.pi / np.sqrt(np.pi**2 - 4))
    lm0 = sf.l_minus(0.0, "minus")
    delta0_err = abs((2 * np.pi / ((np.pi**2 - 4) * lm0**2)).real - 2.0)
    K, _, _ = sif_edge_eigen(0.999 * np.pi)
    eig_err = max(abs(K[0] - 2.50663), abs(K[1]))
    ok = prod < 1e-10 and x0_err < 1e-10 and delta0_err < 1e-10 and eig_err < 1e-2
    detail = (f"|X-X+(0) - I| {prod:.1e}, X-(0) err {x0_err:.1e}, Delta0 err {delta0_err:.1e}, "
              f"eigen limit K = ({K[0]:.5f}, {K[1]:.5f})")
    assert report(5, ok, detail), detail


def test_criterion_6_factorization_residuals(report):
    t = 1j * TAUS
    bv = comm = 0.0
    for alpha in TABLE_ANGLES:
        fact = build_khrapkov(alpha)
        xp = x_matrix(fact, t, "plus")
        bv = max(bv, np.max(np.abs(xp @ fact.inverse(t, "minus") - g0_side(t, alpha))))
        s = -0.25 + t
        g = g_side(s, alpha)
        for side in ("plus", "minus"):
            x = x_matrix(fact, s, side)
            scale = np.max(np.abs(g @ x), axis=(1, 2))
            comm = max(comm, np.max(np.max(np.abs(g @ x - x @ g), axis=(1, 2)) / scale))
    sf = build_scalar_factor()
    scalar = np.max(np.abs(-0.25 * sf.l_plus(t, "plus") / sf.l_minus(t, "minus") - l_fun(t)) / np.abs(l_fun(t)))
    ok = bv < 1e-8 and comm < 1e-10 and scalar < 1e-9
    detail = f"boundary value {bv:.1e}, commutation {comm:.1e}, scalar {scalar:.1e}"
    assert report(6, ok, detail), detail


def test_criterion_7_internal_asymptotics(report):
    deltas = np.array([1e-3, 1e-4, 1e-5, 1e-6])
    t0 = time.perf_counter()
    monotone, final_ok, extrap_ok = True, True, True
    worst_final = worst_extrap = 0.0
    for alpha in WEDGE_ANGLES:
        K_edge, _ = sif_edge_constant(alpha, 1.0, P_WEDGE)
        target = (q_matrix(alpha) @ K_edge).real
        res = [solve_internal(alpha, d, 1.0, P_WEDGE) for d in deltas]
        errs = np.array([np.max(np.abs(r.K_plus - K_edge)) / np.max(np.abs(K_edge)) for r in res])
        monotone &= bool(np.all(np.diff(errs) < 0))
        worst_final = max(worst_final, errs[-1])
        scaled = np.array([-np.sqrt(d) * np.log(d) * r.K_minus for d, r in zip(deltas, res)])
        # the approach is algebraic in 1 / log(delta): extrapolate with a quadratic least-squares fit
        limit = np.polyfit(1 / np.abs(np.log(deltas)), scaled, 2)[-1]
        worst_extrap = max(worst_extrap, np.max(np.abs(limit - target) / np.abs(target)))
    elapsed = time.perf_counter() - t0
    final_ok = worst_final <= 1e-3
    extrap_ok = worst_extrap <= 0.05
    ok = monotone and final_ok and extrap_ok and elapsed < 300
    detail = (f"K+ error monotone: {monotone}; K+ rel err at delta=1e-6 {worst_final:.2e} (need 1e-3); "
              f"extrapolated K- rel err {worst_extrap:.2e} (need 5e-2); {elapsed:.1f}s")
    assert report(7, ok, detail), detail


def test_criterion_8_oracle(report):
    agree = conv = 0.0
    for d in (0.2, 0.5, 0.8):
        wh = solve_halfplane(d, 1.0, 1.0)
        s64 = sie_solve(d, 1.0, 1.0, 64)
        s128 = sie_solve(d, 1.0, 1.0, 128)
        agree = max(agree, abs(wh.K_I_minus / s128.K_minus - 1), abs(wh.K_I_plus / s128.K_plus - 1))
        conv = max(conv, abs(s64.K_minus / s128.K_minus - 1), abs(s64.K_plus / s128.K_plus - 1))
    ok = agree <= 1e-3 and conv < 1e-6
    detail = f"Wiener-Hopf vs collocation {agree:.1e}; collocation 64 -> 128 nodes {conv:.1e}"
    assert report(8, ok, detail), detail


def _decay_slope(roots, coeffs, delta, skip):
    x = roots[skip:].real * np.log(delta)
    y = np.log(np.abs(coeffs[skip:]))
    keep = y > np.log(1e-13)
    return np.polyfit(x[keep], y[keep], 1)[0]


def test_criterion_9_truncation_convergence(report):
    change = 0.0
    slopes = []
    for d in (0.1, 0.3, 0.5):
        for alpha in WEDGE_ANGLES:
            a = solve_internal(alpha, d, 1.0, P_WEDGE)
            b = solve_internal(alpha, d, 1.0, P_WEDGE, tol=1e-28)
            change = max(change, np.max(np.abs(a.K_plus - b.K_plus)), np.max(np.abs(a.K_minus - b.K_minus)))
            sys_ = solve_system(alpha, d, P_WEDGE)
            slopes.append((_decay_slope(sys_.roots, np.abs(sys_.A_plus).max(axis=1), d, 2),
                           f"wedge alpha={alpha / np.pi:.2f}pi delta={d}"))
        a = solve_halfplane(d, 1.0, 1.0)
        b = solve_halfplane(d, 1.0, 1.0, tol=1e-28)
        change = max(change, abs(a.K_I_plus - b.K_I_plus), abs(a.K_I_minus - b.K_I_minus))
        sys_ = solve_halfplane_system(d)
        slopes.append((_decay_slope(sys_.roots, sys_.A_plus, d, 1), f"half-plane delta={d}"))
    worst, where = max(slopes, key=lambda sw: abs(sw[0] - 1))
    ok = change < 1e-8 and abs(worst - 1) <= 0.1
    detail = (f"max SIF change on doubling N {change:.1e}; decay slopes "
              f"{min(s for s, _ in slopes):.3f}..{max(s for s, _ in slopes):.3f}, worst {worst:.3f} ({where})")
    assert report(9, ok, detail), detail


def test_criterion_10_identities(report):
    closure = ident = 0.0
    exact = True
    cases = [(alpha, d) for alpha in WEDGE_ANGLES for d in (1e-4, 0.1, 0.5, 0.8)]
    for alpha, d in cases:
        r = solve_internal(alpha, d, 1.0, P_WEDGE)
        closure = max(closure, r.diagnostics["closure_defect"])
        ident = max(ident, r.diagnostics["transform_identity"])
        exact &= r.dU_minus == energy_release(r.K_minus) and r.dU_plus == energy_release(r.K_plus)
    for d in (1e-4, 0.1, 0.5, 0.8):
        r = solve_halfplane(d, 1.0, 1.0)
        closure = max(closure, r.diagnostics["closure_defect"])
        ident = max(ident, r.diagnostics["transform_identity"])
        exact &= r.dU_minus == energy_release([r.K_I_minus]) and r.dU_plus == energy_release([r.K_I_plus])

    d = 1e-4
    near = {}
    for alpha in WEDGE_ANGLES:
        K_edge, _ = sif_edge_constant(alpha, 1.0, P_WEDGE)
        r = solve_internal(alpha, d, 1.0, P_WEDGE)
        near[f"wedge {alpha / np.pi:.2f}pi near tip"] = abs(near_vertex_energy(K_edge, d) / r.dU_minus - 1)
        near[f"wedge {alpha / np.pi:.2f}pi far tip"] = abs(energy_release(K_edge) / r.dU_plus - 1)
    r = solve_halfplane(d, 1.0, 1.0)
    est_minus, est_plus = near_boundary_energy(1.0, 1.0, d)
    near["half-plane near tip"] = abs(est_minus / r.dU_minus - 1)
    near["half-plane far tip"] = abs(est_plus / r.dU_plus - 1)
    near_ok = max(near.values()) <= 0.1
    worst = max(near, key=near.get)
    ok = closure < 1e-8 and ident < 1e-10 and exact and near_ok
    detail = (f"closure {closure:.1e}, transform identity {ident:.1e}, energy identity exact: {exact}; "
              f"near-vertex estimates at delta=1e-4 off by {min(near.values()):.1%}..{near[worst]:.1%} "
              f"(need 10%, worst {worst})")
    assert report(10, ok, detail), detail
