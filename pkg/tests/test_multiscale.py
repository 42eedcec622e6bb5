import numpy as np
import pytest
from hypothesis import given, strategies as st

from trapstab.core import CurveMethod, ParameterError
from trapstab.multiscale import (
    MultiscaleCoeffs, coupled_boundaries, coupled_coeffs, decoupled_boundaries, decoupled_coeffs,
    decoupled_primary_region,
)

QS = np.linspace(0, 2, 41)


def by_label(curves):
    return {c.label: c for c in curves}


class TestCoupled:
    def test_labels_and_method(self):
        curves = coupled_boundaries(0.5, 10.0, QS)
        assert [c.label for c in curves] == ["a0_lower", "a0_upper", "a1_coupled", "a_neg_coupled"]
        assert all(c.method is CurveMethod.MULTISCALE for c in curves)

    def test_theta0_reduces_to_classical(self):
        k = coupled_coeffs(0.7, 0.0)["a1_coupled"]
        assert (k.a0, k.a1, k.a2) == (1.0, -1.0, -0.125)

    def test_theta45_value(self):
        k = coupled_coeffs(0.5, 45.0)["a1_coupled"]
        assert k.a1 == 0.0
        assert k.a2 == pytest.approx(-11 / 14.25, rel=1e-15)

    def test_a0_pair(self):
        c = coupled_coeffs(0.5, 0.0)
        np.testing.assert_allclose(c["a0_upper"](QS), QS ** 2)
        np.testing.assert_allclose(c["a0_lower"](QS), -QS ** 2 / 2)

    def test_negative_curve_structure(self):
        # -(1/alpha) [1 - |c| q - K(1/alpha) q^2]
        alpha, theta, q = 0.5, 20.0, 0.3
        c, s = np.cos(np.deg2rad(40)), np.sin(np.deg2rad(40))
        ia = 1 / alpha
        K = c ** 2 / 8 + 2 * s ** 2 * (5 + ia) / ((1 + ia) * (9 + ia))
        expected = -ia * (1 - c * q - K * q ** 2)
        assert coupled_coeffs(alpha, theta)["a_neg_coupled"](q) == pytest.approx(expected, rel=1e-14)

    @given(st.floats(0.05, 5), st.floats(0, 90))
    def test_complementary_angle_invariance(self, alpha, theta):
        c1 = coupled_coeffs(alpha, theta)
        c2 = coupled_coeffs(alpha, 90.0 - theta)
        for name in c1:
            np.testing.assert_allclose(c1[name](QS), c2[name](QS), rtol=1e-12, atol=1e-12)

    @given(st.floats(0.05, 5))
    def test_theta0_matches_decoupled_lower_branches(self, alpha):
        c = by_label(coupled_boundaries(alpha, 0.0, QS))
        d = by_label(decoupled_boundaries(alpha, QS))
        np.testing.assert_allclose(c["a1_coupled"].a, d["a1_minus"].a, rtol=1e-14)
        np.testing.assert_allclose(c["a_neg_coupled"].a, d["aneg_minus"].a, rtol=1e-14)

    def test_rejects_bad_alpha(self):
        with pytest.raises(ParameterError):
            coupled_coeffs(0.0, 0.0)

    def test_rejects_negative_q(self):
        with pytest.raises(ValueError):
            coupled_boundaries(0.5, 0.0, [-0.1, 0.2])

    def test_samples_sorted_and_unique(self):
        c = coupled_boundaries(0.5, 0.0, [0.3, 0.1, 0.3])[0]
        np.testing.assert_array_equal(c.q, [0.1, 0.3])


class TestDecoupled:
    def test_intercepts(self):
        vals = sorted(k(0.0) for k in decoupled_coeffs(1.0).values())
        assert vals == [-1, -1, 1, 1]

    def test_lower_branch_value(self):
        assert decoupled_coeffs(0.5)["a1_minus"](0.4) == pytest.approx(0.58, abs=1e-15)

    def test_negative_branch_value(self):
        assert decoupled_coeffs(0.5)["aneg_minus"](0.4) == pytest.approx(-1.16, abs=1e-15)

    def test_method(self):
        assert all(c.method is CurveMethod.DECOUPLED_MULTISCALE for c in decoupled_boundaries(0.5, QS))

    def test_primary_region_mask(self):
        m = decoupled_primary_region(0.5, [0.3, 0.3, 0.3], [0.05, 0.5, -0.1])
        assert list(m) == [True, False, False]


def test_coeffs_callable_vectorized():
    k = MultiscaleCoeffs(1.0, 2.0, 3.0)
    np.testing.assert_array_equal(k(np.array([0.0, 1.0])), [1.0, 6.0])
