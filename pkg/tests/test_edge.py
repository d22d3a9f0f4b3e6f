import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from wedgecrack.edge import (LoadSpec, NoSecondRootError, edge_d_matrix, eigen_solution, sif_edge_constant,
                             sif_edge_eigen, sif_from_weight, solve_edge_general, weight_matrix)
from wedgecrack.quadrature import SlowConvergenceWarning

pytestmark = pytest.mark.filterwarnings("ignore::wedgecrack.quadrature.SlowConvergenceWarning")


class TestConstantLoad:
    def test_right_angle_row(self):
        _, D = sif_edge_constant(np.pi / 2, 1.0, (1.0, 0.0))
        assert D.ravel() == approx([1.776778, -0.121477, -0.202058, 1.813571], rel=1e-5)

    def test_quarter_angle_diagonal(self):
        D = edge_d_matrix(np.pi / 4)
        assert D[0, 0] == approx(2.791583, rel=1e-6)
        assert D[1, 1] == approx(2.148703, rel=1e-6)

    def test_sqrt_scaling(self):
        k1, _ = sif_edge_constant(1.2, 1.0, (1.0, 0.4))
        k4, _ = sif_edge_constant(1.2, 4.0, (1.0, 0.4))
        assert k4 == approx(2 * k1, rel=1e-14)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
    def test_linearity(self, p1, p2, q1, q2):
        kp, _ = sif_edge_constant(2.0, 1.0, (p1, p2))
        kq, _ = sif_edge_constant(2.0, 1.0, (q1, q2))
        ks, _ = sif_edge_constant(2.0, 1.0, (p1 + q1, p2 + q2))
        assert np.max(np.abs(ks - kp - kq)) <= 1e-12 * max(1.0, np.max(np.abs(ks)))

    @pytest.mark.parametrize("kw", [{"alpha": 0.0, "b": 1.0}, {"alpha": 1.0, "b": 0.0}])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            sif_edge_constant(kw["alpha"], kw["b"], (1.0, 0.0))


class TestEigenSolutions:
    def test_right_angle_ratio(self):
        assert eigen_solution(np.pi / 2).k_star == approx(0.5430756, rel=1e-6)

    def test_quarter_angle(self):
        e = eigen_solution(np.pi / 4)
        assert e.mu == approx(0.673583, rel=1e-6)
        assert e.k_star == approx(1.340535, rel=1e-6)

    def test_second_root(self):
        assert eigen_solution(2 * np.pi / 3, "second").mu == approx(0.730901, rel=1e-6)

    def test_no_second_root(self):
        with pytest.raises(NoSecondRootError):
            eigen_solution(np.pi / 4, "second")

    @pytest.mark.parametrize("alpha", [np.pi / 8, np.pi / 3, np.pi / 2, 5 * np.pi / 6])
    @pytest.mark.parametrize("which", ["first", "second"])
    def test_traction_free_and_normalized(self, alpha, which):
        try:
            e = eigen_solution(alpha, which)
        except NoSecondRootError:
            pytest.skip("root absent below the threshold angle")
        assert e.boundary_residual() < 1e-10
        assert e.k_theta(0.0) == approx(1.0, abs=1e-12)
        assert e.k_rtheta(0.0) == approx(e.k_star, abs=1e-12)
        m = e.mu
        assert abs(np.sin(m * (np.pi + alpha)) ** 2 - (m * np.sin(alpha)) ** 2) < 1e-12


class TestEigenLoad:
    def test_right_angle_diagonal(self):
        _, D, _ = sif_edge_eigen(np.pi / 2)
        assert D[0, 0] == approx(2.764929, rel=1e-6)
        assert D[1, 1] == approx(2.848868, rel=1e-6)

    def test_second_solution(self):
        K, _, _ = sif_edge_eigen(7 * np.pi / 8, which="second")
        assert K == approx([2.326037, -7.455055], rel=1e-6)

    def test_limit_near_pi(self):
        K, _, _ = sif_edge_eigen(0.999 * np.pi)
        assert K[0] == approx(2.50663, abs=1e-2)
        assert abs(K[1]) < 1e-2

    def test_depends_on_angle_only(self):
        K1, _, e = sif_edge_eigen(1.0, b=1.0, k_theta0=1.0)
        K2, _, _ = sif_edge_eigen(1.0, b=3.0, k_theta0=2.5)
        assert K2 / (2.5 * 3.0 ** (e.mu - 0.5)) == approx(K1, rel=1e-13)


class TestGeneralPath:
    def test_constant_matches_closed_form(self):
        sol = solve_edge_general(np.pi / 3, 2.0, LoadSpec.constant(1.0, 0.5))
        K, _ = sif_edge_constant(np.pi / 3, 2.0, (1.0, 0.5))
        assert sol.K == approx(K, rel=1e-12)

    def test_eigen_matches_closed_form(self):
        sol = solve_edge_general(2.0, 1.5, LoadSpec.eigen("first", 1.3))
        K, _, _ = sif_edge_eigen(2.0, 1.5, 1.3)
        assert sol.K == approx(K, rel=1e-12)

    def test_power_load_of_eigen_shape(self):
        e = eigen_solution(2.0)
        load = LoadSpec.power([(e.mu, -np.array([1.0, e.k_star]))])
        assert solve_edge_general(2.0, 1.0, load).K == approx(sif_edge_eigen(2.0)[0], rel=1e-12)

    def test_zero_load(self):
        sol = solve_edge_general(1.0, 1.0, LoadSpec.constant(0.0, 0.0))
        assert np.all(sol.K == 0)
        assert np.all(sol.chi_minus(np.array([0.3 + 1j])) == 0)

    def test_tip_asymptote(self):
        b = 2.0
        sol = solve_edge_general(np.pi / 3, b, LoadSpec.constant(1.0, 0.5))
        errs = []
        for tau in (1e2, 1e4):
            s = -0.25 + 1j * tau
            errs.append(np.max(np.abs(sol.sigma_plus(s)[0] * np.sqrt(-s) * np.sqrt(2 * b) - sol.K)))
        # the correction is one half-power smaller than the leading term
        assert errs[1] < 0.03
        assert errs[1] / errs[0] == approx(0.1, rel=0.1)

    def test_transform_regular_at_minus_half(self):
        sol = solve_edge_general(1.0, 1.0, LoadSpec.constant(1.0, 0.0))
        assert np.all(np.isfinite(sol.chi_minus(np.array([-0.4 + 0.2j, 2.0]))))

    @pytest.mark.parametrize("kind", ["nope"])
    def test_bad_load_kind(self, kind):
        with pytest.raises(ValueError):
            LoadSpec(kind)


class TestWeightMatrix:
    def test_real_output(self):
        W = weight_matrix(np.pi / 3, 1.0, 0.5)
        assert W.dtype == float
        assert np.all(np.isfinite(W))

    def test_domain(self):
        with pytest.raises(ValueError):
            weight_matrix(1.0, 1.0, 1.0)

    def test_slow_convergence_warning(self):
        with pytest.warns(SlowConvergenceWarning):
            weight_matrix(1.0, 1.0, 0.9995)

    def test_constant_load_two_paths(self):
        alpha, b, P = np.pi / 3, 2.0, (1.0, 0.5)
        K = sif_from_weight(alpha, b, LoadSpec.constant(*P), nodes=16)
        assert K == approx(sif_edge_constant(alpha, b, P)[0], rel=1e-6)

    def test_sampled_load_path(self):
        alpha, P = np.pi / 3, np.array([1.0, 0.5])
        # pressure P is a traction of -P
        sampler = lambda r: np.broadcast_to(-P, np.shape(r) + (2,))
        sol = solve_edge_general(alpha, 1.0, LoadSpec.sampled(sampler))
        assert sol.K == approx(sif_edge_constant(alpha, 1.0, P)[0], rel=1e-6)
