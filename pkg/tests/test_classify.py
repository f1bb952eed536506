"""Symmetry-dimension classification: golden verdicts, gauge robustness,
and the log-diffusion Fokker-Planck family."""

import math

import pytest

from parasym.classify import (ClassifyConfig, IllConditionedFit,
                              SymmetryClassification, check_fp_logdiffusion,
                              classify)
from parasym.invariants import ParabolicEquation, compute_invariants
from parasym.parser import parse_expression as P


def eq(a, b="0", c="0", domain=(-math.inf, math.inf)):
    return ParabolicEquation(P(a), P(b), P(c), domain=domain)


class TestDimensionSix:
    def test_heat(self):
        cls = classify(eq("1"))
        assert cls.dim == 6
        assert cls.constants == {"c2": 0.0, "c1": 0.0, "c0": 0.0}

    def test_brownian(self):
        cls = classify(eq("(1 + x^2)^2"))
        assert cls.dim == 6
        assert cls.constants["c0"] == pytest.approx(1.0, abs=1e-9)

    def test_tanh_drift_constants(self):
        cls = classify(eq("1", "tanh(x/2)"))
        assert cls.dim == 6
        assert cls.constants["c2"] == pytest.approx(0.0, abs=1e-8)
        assert cls.constants["c1"] == pytest.approx(0.0, abs=1e-8)
        assert cls.constants["c0"] == pytest.approx(-0.25, abs=1e-8)

    def test_black_scholes_constant(self):
        sigma, r = 0.4, 0.06
        cls = classify(eq("1/2*(2/5)^2*x^2", "3/50*x", "-3/50",
                          domain=(0.0, math.inf)))
        ell = r - sigma ** 2 / 2
        assert cls.dim == 6
        assert cls.constants["c0"] == pytest.approx(
            -ell ** 2 / (2 * sigma ** 2) - r, abs=1e-9)

    def test_cir_reducible_branch(self):
        # sigma = 2, f = 1 - x: 3 sigma^2 - 8 a0 sigma + 4 a0^2 = 0 at a0 = 1
        cls = classify(eq("2*x", "1 - x", domain=(0.0, math.inf)))
        assert cls.dim == 6


class TestDimensionFour:
    def test_power_gamma3(self):
        cls = classify(eq("x^6", domain=(0.0, math.inf)))
        assert cls.dim == 4
        assert cls.constants["mu"] == pytest.approx(3.0 / 16.0, abs=1e-9)

    def test_radial_drift_k5(self):
        cls = classify(eq("1", "5/x", domain=(0.0, math.inf)))
        assert cls.dim == 4
        assert cls.constants["mu"] == pytest.approx(-15.0 / 4.0, abs=1e-9)

    def test_cir_generic(self):
        cls = classify(eq("x", "1 - x", domain=(0.0, math.inf)))
        assert cls.dim == 4

    def test_mu_floor_keeps_verdicts_disjoint(self):
        # the dim-6 heat equation must not be reported as dim 4 with mu ~ 0
        cls = classify(eq("1"), ClassifyConfig())
        assert cls.dim == 6


class TestDimensionTwo:
    def test_exponential_potential(self):
        cls = classify(eq("1", "0", "exp(x)"))
        assert cls.dim == 2

    def test_sine_potential(self):
        cls = classify(eq("1", "0", "sin(x)"))
        assert cls.dim == 2


class TestGaugeRobustness:
    @pytest.mark.parametrize("shift", [-2.0, -0.5, 0.0, 1.0, 3.0])
    def test_verdict_invariant_under_i_shift(self, shift):
        for e, want in [(eq("1", "tanh(x/2)"), 6),
                        (eq("1", "5/x", domain=(0.0, math.inf)), 4),
                        (eq("1", "0", "exp(x)"), 2)]:
            cls = classify(compute_invariants(e), i_offset=shift)
            assert cls.dim == want

    def test_dim4_mu_invariant_under_i_shift(self):
        inv = compute_invariants(eq("1", "5/x", domain=(0.0, math.inf)))
        for s in (-1.0, 0.0, 2.0):
            cls = classify(inv, i_offset=s)
            assert cls.constants["mu"] == pytest.approx(-3.75, abs=1e-8)


class TestDegenerateInput:
    def test_nearly_constant_I_raises(self):
        inv = compute_invariants(eq("1"))

        class Flat:
            def __call__(self, x):
                return 0.0

        inv2 = type(inv)(I=Flat(), J=inv.J, K=inv.K, symbolic_I=False,
                         sqrt_a=inv.sqrt_a, a=inv.a, b=inv.b, c=inv.c,
                         domain=inv.domain, flipped=False)
        with pytest.raises(IllConditionedFit):
            classify(inv2)


class TestLogDiffusionFamily:
    def test_a0_is_dim4_with_pinned_constants(self):
        cls = check_fp_logdiffusion(0.0, 0.0)
        assert cls.dim == 4
        assert cls.constants["c2"] == pytest.approx(-1.0, abs=1e-7)
        assert cls.constants["c0"] == pytest.approx(-2.0, abs=1e-7)

    @pytest.mark.parametrize("A", [2.0, -2.0])
    def test_a_pm2_is_dim6(self, A):
        assert check_fp_logdiffusion(A, 1.0).dim == 6

    def test_generic_a_is_dim4(self):
        assert check_fp_logdiffusion(1.0, 3.0).dim == 4


class TestReportShape:
    def test_as_dict_roundtrip(self):
        d = classify(eq("(1 + x^2)^2")).as_dict()
        assert d["dim"] == 6
        assert set(d) >= {"dim", "fit_mode", "residual", "c0", "c1", "c2"}
