import numpy as np
import pytest

from algoinsure.interpret import (
    CURVE_SHAPES,
    InterpretabilityCurve,
    adjust_pricing,
    risk_at,
    xi,
)


def curve(shape="linear", c_ml=500_000.0, c_h=1_000_000.0):
    return InterpretabilityCurve(shape=shape, c_ml=c_ml, c_h=c_h)


class TestXi:
    def test_substitution(self):
        assert xi(curve()) == pytest.approx(0.5)

    def test_limits(self):
        assert xi(curve(c_ml=1.0, c_h=1_000_000.0)) == pytest.approx(1.0, abs=1e-5)
        assert xi(curve(c_ml=999_999.0)) == pytest.approx(0.0, abs=1e-5)

    def test_invalid_ordering_rejected(self):
        with pytest.raises(ValueError):
            curve(c_ml=2_000_000.0)
        with pytest.raises(ValueError):
            curve(c_ml=0.0)


class TestRiskAt:
    @pytest.mark.parametrize("shape", CURVE_SHAPES)
    def test_endpoints_exact(self, shape):
        c = curve(shape)
        assert risk_at(c, 0.0) == c.c_ml
        expected_end = c.c_ml * (1.0 - c.c_ml / c.c_h)
        assert abs(risk_at(c, 1.0) - expected_end) < 1e-12 * c.c_ml

    def test_linear_midpoint(self):
        assert risk_at(curve("linear"), 0.5) == pytest.approx(375_000.0)

    @pytest.mark.parametrize("shape", CURVE_SHAPES)
    def test_strictly_decreasing(self, shape):
        c = curve(shape)
        thetas = np.linspace(0.0, 1.0, 51)
        values = [risk_at(c, t) for t in thetas]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("shape", CURVE_SHAPES)
    def test_floor_above_full_synergy_value(self, shape):
        c = curve(shape)
        floor = c.c_ml * (1.0 - c.c_ml / c.c_h)
        for t in np.linspace(0.0, 1.0, 21):
            assert risk_at(c, t) >= floor - 1e-9

    def test_theta_out_of_range(self):
        with pytest.raises(ValueError):
            risk_at(curve(), 1.5)
        with pytest.raises(ValueError):
            risk_at(curve(), -0.1)

    def test_unknown_shape(self):
        with pytest.raises(ValueError):
            InterpretabilityCurve(shape="cubic", c_ml=1.0, c_h=2.0)

    def test_curvature_signs(self):
        # second differences of g: positive (convex g) for tan/square,
        # negative (concave g) for sin/sqrt, zero for linear
        thetas = np.linspace(0.05, 0.95, 19)
        expected = {"tan": 1, "square": 1, "sin": -1, "sqrt": -1, "linear": 0}
        for shape, sign in expected.items():
            c = curve(shape)
            # risk_at = -k * g + c_ml, so g's curvature is the negated risk curvature
            g = [-(risk_at(c, t) - c.c_ml) for t in thetas]
            second = np.diff(g, 2)
            if sign == 0:
                assert np.allclose(second, 0.0, atol=1e-9)
            elif sign > 0:
                assert np.all(second > 0.0)
            else:
                assert np.all(second < 0.0)


class TestAdjustPricing:
    def test_theta_zero_unchanged(self):
        assert adjust_pricing(250_000.0, 1_000_000.0, 0.0) == pytest.approx(250_000.0)

    def test_theta_one_endpoint(self):
        cvar = 250_000.0
        out = adjust_pricing(cvar, 1_000_000.0, 1.0)
        assert out == pytest.approx(cvar * (1.0 - cvar / 1_000_000.0))

    def test_quarter_human_exposure(self):
        cvar = 250_000.0
        out = adjust_pricing(cvar, 4.0 * cvar, 1.0, shape="linear")
        assert out == pytest.approx(0.75 * cvar)

    def test_non_positive_cvar_rejected(self):
        with pytest.raises(ValueError):
            adjust_pricing(0.0, 1_000_000.0, 0.5)
