"""Tests for the rotation group utilities."""
import pytest
import numpy as np


class TestHatVee:
    """Test the hat/vee isomorphism."""

    def test_hat_matches_cross_product(self, rng):
        """Test that hat(v) @ y equals v x y."""
        from src.so3 import hat

        v, y = rng.normal(size=3), rng.normal(size=3)
        np.testing.assert_allclose(hat(v) @ y, np.cross(v, y), atol=1e-15)

    def test_hat_is_skew(self):
        """Test that hat produces a skew-symmetric matrix."""
        from src.so3 import hat

        m = hat([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(m, -m.T)
        assert m[2, 1] == 1.0 and m[0, 2] == 2.0 and m[1, 0] == 3.0

    def test_vee_inverts_hat(self, rng):
        """Test vee(hat(v)) == v."""
        from src.so3 import hat, vee

        v = rng.normal(size=3)
        np.testing.assert_allclose(vee(hat(v)), v, atol=1e-15)

    def test_vee_rejects_symmetric_part(self):
        """Test that a non-skew matrix raises NonSkewInput."""
        from src.errors import NonSkewInput
        from src.so3 import vee

        with pytest.raises(NonSkewInput):
            vee(np.eye(3))


class TestExpLog:
    """Test the exponential and logarithm maps."""

    def test_exp_zero_is_identity(self):
        """Test exp(0) = I."""
        from src.so3 import exp_so3

        np.testing.assert_array_equal(exp_so3(np.zeros(3)), np.eye(3))

    def test_exp_quarter_turn_about_e3(self):
        """Test exp(pi/2 e3) is the 90 degree yaw."""
        from src.cases import YAW_90
        from src.so3 import exp_so3

        np.testing.assert_allclose(exp_so3([0, 0, np.pi / 2]), YAW_90, atol=1e-15)

    def test_exp_is_orthogonal(self, rng):
        """Test that exp lands in SO(3)."""
        from src.so3 import exp_so3, orthogonality_error

        for _ in range(20):
            R = exp_so3(rng.normal(size=3) * 2.0)
            assert orthogonality_error(R) < 1e-14
            assert abs(np.linalg.det(R) - 1.0) < 1e-14

    def test_log_inverts_exp(self, rng):
        """Test log(exp(v)) = v for angles below pi."""
        from src.so3 import exp_so3, log_so3

        for _ in range(50):
            v = rng.normal(size=3)
            v *= rng.uniform(0.0, 3.1) / np.linalg.norm(v)
            np.testing.assert_allclose(log_so3(exp_so3(v)), v, atol=1e-12)

    def test_log_small_angle_series(self):
        """Test the series branch near the identity."""
        from src.so3 import exp_so3, log_so3

        v = np.array([1e-9, -2e-9, 3e-9])
        np.testing.assert_allclose(log_so3(exp_so3(v)), v, rtol=1e-9, atol=1e-20)

    def test_log_half_turn_about_e3(self):
        """Test log(diag(-1,-1,1)) = pi e3."""
        from src.so3 import log_so3

        np.testing.assert_allclose(log_so3(np.diag([-1.0, -1.0, 1.0])), [0, 0, np.pi], atol=1e-15)

    def test_log_half_turn_sign_tie_break(self):
        """Test that at exactly pi the axis with positive first nonzero component is returned."""
        from src.so3 import exp_so3, log_so3

        axis = np.array([-1.0, 2.0, 2.0]) / 3.0
        v = log_so3(exp_so3(np.pi * axis))
        assert np.linalg.norm(v) == pytest.approx(np.pi, abs=1e-7)
        assert v[0] > 0
        np.testing.assert_allclose(np.abs(v) / np.pi, np.abs(axis), atol=1e-7)

    def test_log_near_half_turn(self):
        """Test log accuracy just below pi where sin is tiny."""
        from src.so3 import exp_so3, log_so3

        v = (np.pi - 1e-7) * np.array([0.0, 0.6, 0.8])
        np.testing.assert_allclose(log_so3(exp_so3(v)), v, atol=1e-8)


class TestRightJacobian:
    """Test the right Jacobian of exp."""

    def test_matches_finite_difference(self, rng):
        """Test exp(v + e) ~ exp(v) exp(Jr(v) e)."""
        from src.so3 import exp_so3, log_so3, right_jacobian

        v = rng.normal(size=3)
        e = 1e-7 * rng.normal(size=3)
        lhs = log_so3(exp_so3(v).T @ exp_so3(v + e))
        np.testing.assert_allclose(lhs, right_jacobian(v) @ e, atol=1e-12)

    def test_identity_at_zero(self):
        """Test Jr(0) = I."""
        from src.so3 import right_jacobian

        np.testing.assert_array_equal(right_jacobian(np.zeros(3)), np.eye(3))


class TestValidateRotation:
    """Test SO(3) membership checks."""

    def test_accepts_rotation(self, random_rotation):
        """Test a valid rotation passes through unchanged."""
        from src.so3 import validate_rotation

        R = random_rotation()
        np.testing.assert_array_equal(validate_rotation(R), R)

    def test_rejects_reflection(self):
        """Test a reflection raises InvalidRotation."""
        from src.errors import InvalidRotation
        from src.so3 import validate_rotation

        with pytest.raises(InvalidRotation):
            validate_rotation(np.diag([1.0, 1.0, -1.0]))

    def test_rejects_non_orthogonal(self):
        """Test a slightly scaled matrix raises InvalidRotation."""
        from src.errors import InvalidRotation
        from src.so3 import validate_rotation

        with pytest.raises(InvalidRotation) as exc:
            validate_rotation(1.001 * np.eye(3))
        assert exc.value.orthogonality > 1e-3
