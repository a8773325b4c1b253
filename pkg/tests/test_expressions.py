"""Tests for profile expression parsing and evaluation."""
import math

import pytest

from shell_gsm import presets
from shell_gsm.errors import ConfigError, ExpressionError
from shell_gsm.expressions import Expression, expression_eval, profile_from_expressions, tokenize


class TestEvaluation:

    def test_reciprocal(self):
        assert expression_eval("1/r", 0.16) == pytest.approx(6.25)

    def test_nested_functions(self):
        assert expression_eval("1+exp(2*sin(4/r))", 0.16).real == pytest.approx(1.7675, abs=1e-4)

    def test_precedence(self):
        assert expression_eval("2+3*4^2", 1.0) == 50
        assert expression_eval("-2^2", 1.0) == -4
        assert expression_eval("(2+3)*4", 1.0) == 20
        assert expression_eval("2^-1", 1.0) == 0.5

    def test_right_associative_power(self):
        assert expression_eval("2^3^2", 1.0) == 512

    def test_complex_literals(self):
        assert expression_eval("5-0.5j", 1.0) == 5 - 0.5j
        assert expression_eval("4 - 2*j", 1.0) == 4 - 2j

    def test_constants_and_functions(self):
        assert expression_eval("pi", 0.1) == pytest.approx(math.pi)
        assert expression_eval("sqrt(4*r)", 1.0) == pytest.approx(2.0)
        assert expression_eval("ln(r)", math.e) == pytest.approx(1.0)
        assert expression_eval("tan(pi/4)", 1.0) == pytest.approx(1.0)
        assert expression_eval("cos(0)", 1.0) == 1

    def test_whitespace_ignored(self):
        assert expression_eval("  2 *  r ", 3.0) == 6

    def test_graded_profiles(self):
        """Expressions agree with the hand-written graded layers."""
        eps1 = Expression.parse("5*tan(pi/(5*r))")
        eps2 = Expression.parse("2+ln(2/r-5)")
        for r in (0.152, 0.16):
            assert eps1(r).real == pytest.approx(presets.GRADED_LAYER_1.eps_perp(r), rel=1e-14)
        assert eps2(0.17).real == pytest.approx(presets.GRADED_LAYER_2.eps_perp(0.17), rel=1e-14)


class TestDerivatives:

    @pytest.mark.parametrize(
        "text",
        ["5*tan(pi/(5*r))", "2+ln(2/r-5)", "1+exp(2*sin(4/r))", "r^3-2*r", "sqrt(r)*cos(r)", "r^r", "(3-j)/r"],
    )
    def test_matches_central_difference(self, text):
        expr = Expression.parse(text)
        r, h = 0.17, 1e-6
        numeric = (expr(r + h) - expr(r - h)) / (2 * h)
        assert expr.derivative(r) == pytest.approx(numeric, rel=1e-6, abs=1e-8)

    def test_constant_has_zero_derivative(self):
        assert Expression.parse("4.4-0.604j").derivative(0.2) == 0

    def test_profile_uses_analytic_derivative(self):
        profile = profile_from_expressions("1/r", "2", "r", "1")
        assert profile.has_analytic_derivatives
        d_mu, d_eps = profile.transverse_derivatives(0.2, 1.0)
        assert d_eps == pytest.approx(-25.0)
        assert d_mu == pytest.approx(1.0)
        assert profile.at(0.2).eps_perp == pytest.approx(5.0)


class TestErrors:

    def test_dangling_operator(self):
        with pytest.raises(ExpressionError) as exc:
            Expression.parse("2+*r")
        assert exc.value.column == 3

    def test_is_config_error(self):
        with pytest.raises(ConfigError):
            Expression.parse("r+")

    def test_unknown_name(self):
        with pytest.raises(ExpressionError, match="unknown name 'x'") as exc:
            Expression.parse("1 + x")
        assert exc.value.column == 5

    def test_bad_character(self):
        with pytest.raises(ExpressionError) as exc:
            Expression.parse("2 $ r")
        assert exc.value.column == 3

    def test_unbalanced(self):
        with pytest.raises(ExpressionError, match="expected"):
            Expression.parse("sin(r")

    def test_empty(self):
        with pytest.raises(ExpressionError):
            Expression.parse("   ")

    def test_singular_evaluation_reports_radius(self):
        expr = Expression.parse("1/(r-0.2)")
        with pytest.raises(ExpressionError) as exc:
            expr(0.2)
        assert exc.value.r == 0.2

    def test_log_of_negative(self):
        with pytest.raises(ExpressionError):
            expression_eval("ln(r-1)", 0.5)


def test_tokenize_columns():
    tokens = tokenize("12.5e-1 *r")
    assert [(t.kind, t.column) for t in tokens] == [("number", 1), ("op", 9), ("name", 10), ("end", 11)]
