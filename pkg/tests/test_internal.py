import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from wedgecrack.edge import sif_edge_constant
from wedgecrack.internal import (CrackConfig, NoCrackError, TruncationError, energy_release, internal_roots,
                                 near_vertex_energy, q_matrix, solve_internal, solve_system)
from wedgecrack.kernels import MaterialSpec

P = np.array([1.0, 1.0])


class TestConfig:
    def test_delta(self):
        assert CrackConfig(0.25, 1.0).delta == 0.25

    @pytest.mark.parametrize("a,b", [(1.0, 1.0), (2.0, 1.0)])
    def test_no_crack(self, a, b):
        with pytest.raises(NoCrackError):
            CrackConfig(a, b)

    @pytest.mark.parametrize("a,b", [(-0.1, 1.0), (0.0, 0.0)])
    def test_invalid(self, a, b):
        with pytest.raises(ValueError):
            CrackConfig(a, b)

    def test_edge_route(self):
        res = solve_internal(np.pi / 2, 0.0, 1.0, P)
        assert res.diagnostics["route"] == "edge"
        assert res.K_plus == approx(sif_edge_constant(np.pi / 2, 1.0, P)[0], rel=1e-14)


class TestRoots:
    def test_truncation_rule(self):
        roots = internal_roots(1.0, 0.3).roots
        assert roots[0] == 0 and roots[1] == 1
        assert 0.3 ** roots[-1].real < 1e-14 * 0.3 ** -1.5

    def test_conjugates_adjacent(self):
        roots = internal_roots(1.0, 0.3).roots
        for i, z in enumerate(roots):
            if z.imag > 0:
                assert roots[i + 1] == approx(np.conj(z))

    def test_cap(self):
        with pytest.raises(TruncationError):
            internal_roots(1.0, 0.9, max_roots=10)

    def test_bad_delta(self):
        with pytest.raises(ValueError):
            internal_roots(1.0, 1.0)


ANGLES = [np.pi / 4, np.pi / 2, 3 * np.pi / 4, 0.9 * np.pi]


class TestSystem:
    @pytest.mark.parametrize("alpha", ANGLES)
    @pytest.mark.parametrize("delta", [0.05, 0.3, 0.6])
    def test_closure_and_identity(self, alpha, delta):
        res = solve_internal(alpha, delta, 1.0, P)
        d = res.diagnostics
        assert d["closure_defect"] < 1e-8
        assert d["transform_identity"] < 1e-10
        assert d["imag_part"] < 1e-10
        assert d["residual"] < 1e-10

    @pytest.mark.parametrize("alpha", [np.pi / 4, 1.2, 3 * np.pi / 4])
    @pytest.mark.parametrize("delta", [0.1, 0.3, 0.5])
    def test_doubling_truncation(self, alpha, delta):
        coarse = solve_internal(alpha, delta, 1.0, P)
        fine = solve_internal(alpha, delta, 1.0, P, tol=1e-28)
        assert fine.diagnostics["roots"] >= 2 * coarse.diagnostics["roots"] - 2
        assert np.max(np.abs(fine.K_plus - coarse.K_plus)) < 1e-8
        assert np.max(np.abs(fine.K_minus - coarse.K_minus)) < 1e-8

    @pytest.mark.parametrize("alpha", [np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    def test_coefficient_decay_rate(self, alpha):
        delta = 0.3
        sys_ = solve_system(alpha, delta, P)
        x = sys_.roots[2:].real * np.log(delta)
        y = np.log(np.abs(sys_.A_plus[2:]).max(axis=1))
        keep = y > np.log(1e-13)
        slope = np.polyfit(x[keep], y[keep], 1)[0]
        assert slope == approx(1.0, abs=0.1)

    def test_vertex_coefficient_scale(self):
        # the leading residue decays like 1 / |log delta|
        ds = np.array([1e-2, 1e-3, 1e-4])
        a0 = [np.max(np.abs(solve_system(np.pi / 2, d, P).A_plus[0])) for d in ds]
        slope = np.polyfit(np.log(np.abs(np.log(ds))), np.log(a0), 1)[0]
        assert -1.3 < slope < -0.7


class TestScalingAndLinearity:
    def test_sqrt_scaling(self):
        r1 = solve_internal(1.0, 0.2, 1.0, P)
        r4 = solve_internal(1.0, 0.8, 4.0, P)
        assert r4.K_plus == approx(2 * r1.K_plus, rel=1e-10)
        assert r4.K_minus == approx(2 * r1.K_minus, rel=1e-10)

    @settings(max_examples=10, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_linearity(self, p1, p2):
        base = [solve_internal(1.3, 0.4, 1.0, e) for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0]))]
        res = solve_internal(1.3, 0.4, 1.0, (p1, p2))
        for attr in ("K_plus", "K_minus"):
            expect = p1 * getattr(base[0], attr) + p2 * getattr(base[1], attr)
            assert np.max(np.abs(getattr(res, attr) - expect)) < 1e-10 * max(1.0, abs(p1) + abs(p2))

    def test_zero_load(self):
        res = solve_internal(1.0, 0.3, 1.0, (0.0, 0.0))
        assert np.all(res.K_plus == 0) and np.all(res.K_minus == 0)


class TestSmallDelta:
    @pytest.mark.parametrize("alpha", [np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    def test_far_tip_approaches_edge(self, alpha):
        K_edge, _ = sif_edge_constant(alpha, 1.0, P)
        errs = [np.max(np.abs(solve_internal(alpha, d, 1.0, P).K_plus - K_edge)) for d in (1e-2, 1e-4, 1e-6)]
        assert errs[0] > errs[1] > errs[2]

    @pytest.mark.parametrize("alpha", [np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    def test_near_tip_extrapolates_to_rotated_edge(self, alpha):
        K_edge, _ = sif_edge_constant(alpha, 1.0, P)
        target = (q_matrix(alpha) @ K_edge).real
        ds = np.array([1e-3, 1e-4, 1e-5, 1e-6])
        scaled = np.array([-np.sqrt(d) * np.log(d) * solve_internal(alpha, d, 1.0, P).K_minus for d in ds])
        limit = np.polyfit(1 / np.abs(np.log(ds)), scaled, 2)[-1]
        assert limit == approx(target, rel=0.05)

    def test_q_is_rotation(self):
        Q = q_matrix(1.0)
        assert Q @ Q.T == approx(np.eye(2), abs=1e-12)
        assert np.linalg.det(Q) == approx(1.0, abs=1e-12)


class TestEnergy:
    def test_identity(self):
        res = solve_internal(1.0, 0.3, 1.0, P, h=0.5)
        assert res.dU_plus == 0.5 * np.sum(res.K_plus**2)
        assert res.dU_minus == 0.5 * np.sum(res.K_minus**2)

    def test_material_modulus(self):
        mat = MaterialSpec(young_modulus=2.0, poisson=0.3, strain_state="plane_strain")
        E_eff = mat.effective[0]
        assert E_eff == approx(2.0 / (1 - 0.3**2))
        assert energy_release([1.0, 1.0], mat) == approx(2.0 / E_eff)

    def test_bad_advance(self):
        with pytest.raises(ValueError):
            energy_release([1.0, 0.0], h=0.0)

    def test_near_vertex_form(self):
        assert near_vertex_energy([3.0, 4.0], np.e**-2) == approx(25 * np.e**2 / 4)
        assert near_vertex_energy([3.0, 4.0], np.e**-2, log_power=1) == approx(25 * np.e**2 / 2)
