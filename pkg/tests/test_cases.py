"""Tests for the built-in bodies and cases."""
import pytest
import numpy as np


class TestCases:
    """Test the case library."""

    def test_four_cases(self):
        """Test the case ids and their bodies."""
        from src.cases import CASES, case_ids

        assert case_ids() == ["i", "ii", "iii", "iv"]
        assert [CASES[c].body for c in case_ids()] == ["A", "A", "B", "B"]

    def test_targets_are_rotations_about_e3(self):
        """Test every target keeps e3 fixed."""
        from src.cases import CASES
        from src.so3 import validate_rotation

        for case in CASES.values():
            validate_rotation(case.RNd)
            np.testing.assert_array_equal(case.RNd[2], [0.0, 0.0, 1.0])

    def test_unknown_case(self):
        """Test KeyError names the available cases."""
        from src.cases import get_case

        with pytest.raises(KeyError, match="Available"):
            get_case("v")

    def test_boundary_conditions_are_json_friendly(self):
        """Test case boundary values are plain lists."""
        import json
        from src.cases import case_boundary_conditions

        bc = case_boundary_conditions("ii")
        assert bc["RNd"] == [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]
        assert json.loads(json.dumps(bc)) == bc

    def test_make_body_uses_gravity(self):
        """Test the gravity argument reaches the body."""
        from src.cases import make_body

        body = make_body("B", 1.62)
        assert body.g == 1.62
        np.testing.assert_allclose(body.mgrho, [0.0, 0.0, 1.62 * 0.4])
