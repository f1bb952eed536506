"""Expression-tree construction, simplification, differentiation,
evaluation, zero-testing and polynomial matching."""

import math
from fractions import Fraction

import pytest

from parasym import expr as E
from parasym.parser import parse_expression as P


def ev(e, **env):
    return E.evaluate(e, env)


class TestConstruction:
    def test_numbers_are_exact_rationals(self):
        e = P("1/3 + 1/6")
        assert E.is_num(e)
        assert e.value == Fraction(1, 2)

    def test_float_literals_stay_float(self):
        e = P("0.5")
        assert isinstance(e.value, float)

    def test_known_functions_only(self):
        for name in E.FUNCTIONS:
            E.fn(name, E.sym("x"))
        with pytest.raises(Exception):
            E.fn("nosuchfn", E.sym("x"))


class TestSimplify:
    def test_collects_like_terms(self):
        assert E.is_num(E.simplify(P("x + x - 2*x")), 0)

    def test_power_collapse(self):
        e = E.simplify(P("x^2 * x^3"))
        assert E.to_text(e) == "x^5"

    def test_idempotent_on_examples(self):
        for src in ["(1 + x)^2/(1 + x)", "exp(x)*exp(-x)", "sin(x)^2*0",
                    "x/x", "sqrt(x^2 + 2*x + 1)"]:
            e = E.simplify(P(src))
            assert E.simplify(e) == e

    def test_structural_equality_after_roundtrip(self):
        e = E.simplify(P("(1 + k^2*x^2)^2"))
        assert E.simplify(P(E.to_text(e))) == e


class TestDifferentiate:
    def test_power_rule(self):
        assert E.to_text(E.differentiate(P("x^2"))) == "2*x"

    def test_arctan_chain(self):
        d = E.differentiate(P("arctan(k*x)"))
        for x in (0.3, 1.0, 2.1):
            want = 1.0 / (1 + (0.7 * x) ** 2) * 0.7
            assert ev(d, x=x, k=0.7) == pytest.approx(want, rel=1e-12)

    def test_sqrt_value_at_point(self):
        # d/dx (1 + k^2 x^2)^(1/2) at x = k = 1 is 1/sqrt(2)
        d = E.differentiate(P("sqrt(1 + k^2*x^2)"))
        assert ev(d, x=1.0, k=1.0) == pytest.approx(1 / math.sqrt(2), abs=1e-8)

    def test_higher_order(self):
        d3 = E.differentiate(P("x^5"), order=3)
        assert ev(d3, x=2.0) == pytest.approx(60 * 4.0)

    def test_bessel_recurrence(self):
        z = P("x")
        e = E.besseli(E.num(1), z)
        d = E.differentiate(e)
        h = 1e-6
        for x in (0.5, 2.0, 5.0):
            fd = (E.evaluate(e, {"x": x + h}) - E.evaluate(e, {"x": x - h})) / (2 * h)
            assert E.evaluate(d, {"x": x}) == pytest.approx(fd, rel=1e-8)


class TestEvaluate:
    def test_square(self):
        assert ev(P("x^2"), x=3.0) == 9.0

    def test_division_by_zero_is_domain_error(self):
        with pytest.raises(E.DomainError):
            ev(P("1/x"), x=0.0)

    def test_log_of_nonpositive_is_domain_error(self):
        with pytest.raises(E.DomainError):
            ev(P("log(x)"), x=-1.0)

    def test_gaussian_value(self):
        assert ev(P("exp(-(x^2/4))"), x=2.0) == pytest.approx(math.exp(-1.0))

    def test_unbound_symbol_rejected(self):
        with pytest.raises(E.ExprError):
            ev(P("x + y"), x=1.0)


class TestMatchPolynomial:
    def test_constant_matches_degree_zero(self):
        coeffs = E.match_polynomial(P("k^2"), P("x"), 2,
                                    bindings={"k": 1.3})
        assert coeffs is not None
        c0, c1, c2 = (E.evaluate(c, {"k": 1.3}) for c in coeffs)
        assert (c0, c1, c2) == pytest.approx((1.69, 0.0, 0.0))

    def test_quadratic(self):
        coeffs = E.match_polynomial(P("x^2 + 2*x"), P("x"), 2)
        vals = [E.evaluate(c, {}) for c in coeffs]
        assert vals == pytest.approx([0.0, 2.0, 1.0])

    def test_sine_is_rejected(self):
        assert E.match_polynomial(P("sin(x)"), P("x"), 2) is None

    def test_no_false_positive_on_close_impostor(self):
        # tanh(x/10) is close to linear near 0 but not a polynomial
        assert E.match_polynomial(P("tanh(x/10)"), P("x"), 2,
                                  interval=(-3.0, 3.0)) is None


class TestZeroTesting:
    def test_pythagorean_identity(self):
        assert E.is_zero(P("sin(x)^2 + cos(x)^2 - 1"))

    def test_nonzero(self):
        assert not E.is_zero(P("sin(x)^2 - 1/2"))


class TestSerialization:
    def test_sexpr_shape(self):
        s = E.to_sexpr(E.simplify(P("(1 + k^2*x^2)^2")))
        assert s.startswith("(^ (+ 1")

    def test_text_parses_back(self):
        e = E.simplify(P("exp(-(x^2/(4*t)))/sqrt(4*pi*t)"))
        e2 = E.simplify(P(E.to_text(e)))
        for x, t in [(0.3, 0.2), (1.5, 0.9)]:
            assert E.evaluate(e, {"x": x, "t": t}) == pytest.approx(
                E.evaluate(e2, {"x": x, "t": t}), rel=1e-14)
