"""Heat-equation reductions: Schwarzian time maps, multiplier assembly,
and pullback of reference heat solutions."""

import math

import pytest

from parasym import expr as E
from parasym.classify import classify
from parasym.invariants import ParabolicEquation, compute_invariants
from parasym.parser import parse_expression as P
from parasym.transform import (HEAT_SOLUTIONS, NotReducible,
                               build_heat_transform, map_solution,
                               pde_residual, solve_schwarzian,
                               verify_pullback)


def eq(a, b="0", c="0", domain=(-math.inf, math.inf)):
    return ParabolicEquation(P(a), P(b), P(c), domain=domain)


def transform_for(e, mode="default", **kw):
    inv = compute_invariants(e)
    cls = classify(inv)
    return build_heat_transform(cls, inv, mode=mode, **kw), inv, cls


class TestSchwarzian:
    @pytest.mark.parametrize("q2", [0.0, 0.3, 1.0, -0.5, -2.0])
    def test_schwarzian_value_and_orientation(self, q2):
        mob = solve_schwarzian(q2)
        worst, tp_min = mob.check()
        assert worst <= 1e-9
        assert tp_min > 0.0

    def test_rational_branch_is_identity_like(self):
        mob = solve_schwarzian(0.0)
        assert mob.branch == "rational"
        assert mob(0.3) == pytest.approx(0.3)

    def test_kernel_mode_q2_zero_is_appell_inversion(self):
        mob = solve_schwarzian(0.0, mode="kernel")
        assert mob(0.5) == pytest.approx(-2.0)

    def test_kernel_mode_positive_q2_is_coth(self):
        q2 = 1.0
        mob = solve_schwarzian(q2, mode="kernel")
        k = math.sqrt(q2)
        for t in (0.2, 0.7):
            want = -1.0 / (math.tanh(2 * k * t) * 2 * k)
            assert mob(t) == pytest.approx(want, rel=1e-12)

    def test_trigonometric_branch_for_negative_q2(self):
        mob = solve_schwarzian(-1.0)
        assert mob.branch == "trigonometric"


class TestPullback:
    @pytest.mark.parametrize("coeffs", [
        ("1", "0", "0"),
        ("(1 + x^2)^2", "0", "0"),
        ("1", "tanh(x/2)", "0"),
        ("1", "x", "0"),
        ("1", "0", "-(x^2)"),
    ])
    def test_residual_small(self, coeffs):
        a, b, c = coeffs
        res = verify_pullback(eq(a, b, c))
        assert max(res.values()) <= 1e-6

    def test_half_line_example(self):
        res = verify_pullback(eq("x^4", domain=(0.0, math.inf)))
        assert max(res.values()) <= 1e-6

    def test_nonsolution_rejected(self):
        # x^2 (without the +2t partner) is not a heat solution
        bad = pde_residual(eq("1"), lambda x, t: x * x)
        assert bad >= 1e-3


class TestKnownClosedForms:
    def test_tanh_drift_multiplier(self):
        # mapping the constant heat solution yields a multiple of
        # e^{-t/4} sech(x/2)
        ht, inv, _ = transform_for(eq("1", "tanh(x/2)"))
        u = map_solution(ht, lambda x, t: 1.0)
        vals = []
        for x in (-1.0, 0.0, 0.8, 2.0):
            for t in (-0.2, 0.0, 0.3):
                ref = math.exp(-t / 4) / math.cosh(x / 2)
                vals.append(u(x, t) / ref)
        spread = max(vals) - min(vals)
        assert spread <= 1e-9 * max(abs(v) for v in vals)

    def test_brownian_x_map_is_arctan(self):
        ht, _, _ = transform_for(eq("(1 + x^2)^2"))
        offset = ht.x_tilde(0.0, 0.0)
        for x in (-1.5, 0.4, 2.0):
            assert ht.x_tilde(x, 0.0) - offset == pytest.approx(
                math.atan(x), rel=1e-9)

    def test_heat_is_identity_transform(self):
        ht, _, _ = transform_for(eq("1"))
        for x, t in [(0.3, 0.1), (-1.0, 0.4)]:
            assert ht.t_tilde(t) == pytest.approx(t)
            assert ht.x_tilde(x, t) == pytest.approx(x)
            assert ht.theta(x, t) == pytest.approx(ht.theta(0.0, 0.0))

    def test_black_scholes_x_map_is_log(self):
        sigma = 0.4
        ht, _, _ = transform_for(
            eq("1/2*(2/5)^2*x^2", "3/50*x", "-3/50", domain=(0.0, math.inf)))
        base = ht.x_tilde(1.0, 0.0)
        for x in (0.5, 2.0, 4.0):
            assert ht.x_tilde(x, 0.0) - base == pytest.approx(
                math.sqrt(2.0) / sigma * math.log(x), rel=1e-9)


class TestKernelMode:
    def test_source_seeded_transform_still_maps_solutions(self):
        e = eq("1", "0", "-(x^2)")
        inv = compute_invariants(e)
        cls = classify(inv)
        ht = build_heat_transform(cls, inv, mode="kernel", source_point=0.5)
        lo, hi = ht.t_interval
        t_int = (lo + 0.3 * (hi - lo), hi - 0.3 * (hi - lo))
        u = map_solution(ht, lambda x, t: x)
        assert pde_residual(e, u, t_interval=t_int) <= 1e-6


class TestErrors:
    def test_dim4_not_reducible(self):
        inv = compute_invariants(eq("1", "5/x", domain=(0.0, math.inf)))
        cls = classify(inv)
        with pytest.raises(NotReducible):
            build_heat_transform(cls, inv)

    def test_describe_fields(self):
        ht, _, _ = transform_for(eq("(1 + x^2)^2"))
        d = ht.describe()
        assert {"T", "omega", "branch", "q2", "q1", "q0"} <= set(d)
        assert d["q0"] == pytest.approx(-1.0)
