"""Generator bases, determining equations, commutator tables, and
boundary-condition subalgebras."""

import dataclasses
import math
import random

import pytest

from parasym import expr as E
from parasym import symmetry as S
from parasym.classify import classify
from parasym.invariants import ParabolicEquation, compute_invariants
from parasym.parser import parse_expression as P


def setup_case(a, b="0", c="0", domain=(-math.inf, math.inf)):
    e = ParabolicEquation(P(a), P(b), P(c), domain=domain)
    inv = compute_invariants(e)
    cls = classify(inv)
    basis = S.emit_basis(cls, inv)
    return e, inv, cls, basis


class TestDeterminingEquations:
    @pytest.mark.parametrize("coeffs,want_dim", [
        (("1", "0", "0"), 6),
        (("(1 + x^2)^2", "0", "0"), 6),
        (("1", "0", "-(x^2)"), 6),
        (("1", "0", "x^2"), 6),
        (("1", "0", "-x"), 6),
    ])
    def test_basis_satisfies_determining_equations(self, coeffs, want_dim):
        a, b, c = coeffs
        _, inv, cls, basis = setup_case(a, b, c)
        assert cls.dim == want_dim
        assert len(basis) == want_dim
        for vf in basis:
            assert S.check_determining(inv, vf)["max"] <= 1e-8

    @pytest.mark.parametrize("coeffs", [
        ("x^6", "0", "0"), ("1", "5/x", "0"), ("x", "1 - x", "0"),
    ])
    def test_dim4_bases(self, coeffs):
        a, b, c = coeffs
        _, inv, cls, basis = setup_case(a, b, c, domain=(0.0, math.inf))
        assert cls.dim == 4
        assert len(basis) == 4
        for vf in basis:
            assert S.check_determining(inv, vf)["max"] <= 1e-8

    def test_non_symmetry_rejected(self):
        _, inv, _, basis = setup_case("1")
        fake = dataclasses.replace(basis[0], tau=P("t^2"), label="fake")
        assert S.check_determining(inv, fake)["max"] >= 1e-3

    def test_perturbed_generator_rejected(self):
        _, inv, _, basis = setup_case("(1 + x^2)^2")
        v = basis[2]
        fake = dataclasses.replace(
            v, phi=E.simplify(E.add(v.phi, P("x/100"))))
        assert S.check_determining(inv, fake)["max"] >= 1e-3


class TestBrackets:
    def test_heat_table_closes(self):
        _, inv, cls, basis = setup_case("1")
        table = S.commutator_table(basis)
        assert table.residual <= 1e-10
        assert S.jacobi_residual(table, 6) <= 1e-10

    def test_bracket_antisymmetry_accessor(self):
        _, _, _, basis = setup_case("1")
        table = S.commutator_table(basis)
        for i in range(1, 7):
            for j in range(1, 7):
                for k in range(1, 7):
                    assert table.coeff(i, j, k) == -table.coeff(j, i, k)

    def test_bracket_of_commuting_pair(self):
        # time translation and the u-scaling M commute
        _, inv, _, basis = setup_case("1")
        br = S.lie_bracket(basis[0], basis[-1])
        for x in (-1.0, 0.5):
            for t in (0.1, 0.4):
                assert max(abs(v) for v in br.components(x, t)) <= 1e-12


class TestPublishedTables:
    def test_heat_family_matches(self):
        _, _, cls, basis = setup_case("1")
        expected = S.published_table(6, 0.0, 0.0, 0.0)
        rep = S.verify_table(basis, expected)
        assert rep.ok
        assert len(rep.matched) == 15

    def test_exponential_family_matches(self):
        _, _, cls, basis = setup_case("1", "0", "-(x^2)")
        c = cls.constants
        rep = S.verify_table(basis, S.published_table(6, c["c2"], c["c1"],
                                                      c["c0"]))
        assert rep.ok

    def test_linear_potential_flags_known_line(self):
        # c1 != 0 exposes the published [v1, v5] coefficient 2 c1 where the
        # symbolic bracket gives c1
        _, _, cls, basis = setup_case("1", "0", "-x")
        c = cls.constants
        rep = S.verify_table(basis, S.published_table(6, c["c2"], c["c1"],
                                                      c["c0"]))
        flagged_pairs = {(i, j) for (i, j, *_rest) in rep.flagged}
        assert flagged_pairs == {(1, 5)}

    def test_trigonometric_family_flags_sign_lines(self):
        _, _, cls, basis = setup_case("1", "0", "x^2")
        c = cls.constants
        rep = S.verify_table(basis, S.published_table(6, c["c2"], c["c1"],
                                                      c["c0"]))
        flagged_pairs = {(i, j) for (i, j, *_rest) in rep.flagged}
        assert flagged_pairs == {(1, 4), (1, 5), (3, 4), (3, 5), (4, 5)}

    def test_dim4_families_match(self):
        for coeffs in [("x^6", "0", "0"), ("1", "5/x", "0")]:
            a, b, c = coeffs
            _, _, cls, basis = setup_case(a, b, c, domain=(0.0, math.inf))
            cc = cls.constants
            rep = S.verify_table(basis, S.published_table(
                4, cc.get("c2", 0.0), 0.0, cc.get("c0", 0.0)))
            assert rep.ok

    def test_flagging_never_raises(self):
        # a deliberately wrong expected table must flag, not crash
        _, _, _, basis = setup_case("1")
        wrong = S.published_table(6, 0.0, 0.0, 0.0)
        wrong.structure[(1, 2)] = {1: 5.0}
        rep = S.verify_table(basis, wrong)
        assert not rep.ok


class TestRandomBindings:
    def test_scalar_families_reproduce_tables_over_bindings(self):
        rng = random.Random(20250823)
        checked = 0
        for _ in range(20):
            c1 = rng.uniform(-2.0, 2.0)
            c0 = rng.uniform(-2.0, 2.0)
            c2 = rng.choice([0.0, 1.0, -1.0]) * rng.uniform(0.25, 2.0)
            pot = "-(%r)*x^2 - (%r)*x - (%r)" % (c2, c1, c0)
            _, inv, cls, basis = setup_case("1", "0", pot)
            assert cls.dim == 6
            rep = S.verify_table(basis, S.published_table(
                6, cls.constants["c2"], cls.constants["c1"],
                cls.constants["c0"]))
            assert rep.bracket_residual <= 1e-7
            checked += 1
        assert checked == 20


class TestBoundarySubalgebra:
    def test_heat_dim3(self):
        _, _, _, basis = setup_case("1")
        sub = S.boundary_subalgebra(basis, x0=0.5)
        assert len(sub) == 3

    def test_dim4_dim1(self):
        _, _, _, basis = setup_case("1", "5/x", domain=(0.0, math.inf))
        sub = S.boundary_subalgebra(basis, x0=1.0)
        assert len(sub) == 1

    def test_rank_deficiency_detected(self):
        _, _, _, basis = setup_case("1")
        # a 7-element spanning set cannot have the expected 3-dim subalgebra
        with pytest.raises(S.RankDeficiency):
            S.boundary_subalgebra(basis + [basis[5]], x0=0.0)

    def test_subalgebra_members_are_symmetries(self):
        _, inv, _, basis = setup_case("1")
        for vf in S.boundary_subalgebra(basis, x0=0.5):
            assert S.check_determining(inv, vf)["max"] <= 1e-8
