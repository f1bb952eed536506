"""CLI subcommands, JSON report schema, determinism, and exit codes."""

import json
import os

import pytest

from parasym import cli

EQDIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
                     "equations")


def eqpath(stem):
    return os.path.join(EQDIR, stem + ".eq")


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


class TestAnalyze:
    def test_brownian_report(self, capsys):
        rc, out, _ = run(capsys, "--json", "analyze", eqpath("brownian"))
        assert rc == 0
        rep = json.loads(out)
        assert rep["schema_version"] == "1"
        assert rep["classification"]["dim"] == 6
        assert rep["classification"]["constants"]["c0"] == pytest.approx(1.0)
        assert rep["transform"]["branch"] == "rational"
        assert len(rep["generators"]["basis"]) == 6
        # x~ = arctan x up to gauge: the invariant I is printed symbolically
        assert "arctan" in rep["invariants"]["I"]["text"]

    def test_heat_identity_transform(self, capsys):
        rc, out, _ = run(capsys, "--json", "analyze", eqpath("heat"))
        rep = json.loads(out)
        assert rc == 0
        assert rep["transform"]["T"] == "t"
        assert rep["generators"]["published_table"]["flagged"] == []

    def test_radial_dim4(self, capsys):
        rc, out, _ = run(capsys, "--json", "analyze", eqpath("radial"))
        rep = json.loads(out)
        assert rc == 0
        assert rep["classification"]["dim"] == 4
        assert rep["classification"]["constants"]["mu"] == pytest.approx(-3.75)
        assert rep["transform"] is None

    def test_deterministic_output(self, capsys):
        _, out1, _ = run(capsys, "--json", "analyze", eqpath("tanh_drift"))
        _, out2, _ = run(capsys, "--json", "analyze", eqpath("tanh_drift"))
        assert out1 == out2

    def test_seed_recorded(self, capsys):
        _, out, _ = run(capsys, "--json", "--seed", "7", "analyze",
                        eqpath("heat"))
        rep = json.loads(out)
        assert rep["seed"] == 7
        assert rep["config"]["hash"]

    def test_require_nontrivial_exit_2(self, capsys):
        rc, _, _ = run(capsys, "analyze", eqpath("generic_dim2"),
                       "--require-nontrivial")
        assert rc == 2

    def test_dim2_without_flag_is_success(self, capsys):
        rc, _, _ = run(capsys, "analyze", eqpath("generic_dim2"))
        assert rc == 0

    def test_missing_file_exit_1(self, capsys):
        rc, _, err = run(capsys, "analyze", "/nonexistent.eq")
        assert rc == 1
        assert "error" in err

    def test_syntax_error_reported_with_position(self, capsys, tmp_path):
        bad = tmp_path / "bad.eq"
        bad.write_text("var x\na = (1 +\nb = 0\nc = 0\n")
        rc, _, err = run(capsys, "analyze", str(bad))
        assert rc == 1
        assert "line" in err

    def test_human_summary(self, capsys):
        rc, out, _ = run(capsys, "analyze", eqpath("brownian"))
        assert rc == 0
        assert "dimension 6" in out


class TestKernels:
    def test_list(self, capsys):
        rc, out, _ = run(capsys, "--json", "kernels", "list")
        assert rc == 0
        rep = json.loads(out)
        assert len(rep["kernels"]) == 12

    def test_verify_heat(self, capsys):
        rc, out, _ = run(capsys, "--json", "kernels", "verify", "heat_1d")
        assert rc == 0
        rep = json.loads(out)
        assert rep["pass"] is True
        assert rep["residual"] <= 1e-9

    def test_verify_black_scholes_with_constants(self, capsys):
        rc, out, _ = run(capsys, "--json", "kernels", "verify",
                         "black_scholes", "--sigma", "0.4", "--r", "0.06")
        assert rc == 0
        assert json.loads(out)["pass"] is True

    def test_unknown_kernel_exit_1(self, capsys):
        rc, _, err = run(capsys, "kernels", "verify", "nosuch")
        assert rc == 1
        assert "UnknownKernel" in err

    def test_bad_constant_value(self, capsys):
        rc, _, err = run(capsys, "kernels", "verify", "heat_1d",
                         "--y", "zero")
        assert rc == 1

    def test_verify_without_name(self, capsys):
        rc, _, err = run(capsys, "kernels", "verify")
        assert rc == 1


class TestReportCompleteness:
    def test_every_field_computed_or_null(self, capsys):
        _, out, _ = run(capsys, "--json", "analyze", eqpath("generic_dim2"))
        rep = json.loads(out)
        for key in ("schema_version", "tool", "seed", "config", "input",
                    "invariants", "classification", "transform",
                    "generators", "verification", "warnings"):
            assert key in rep
        assert rep["transform"] is None
        assert rep["generators"] is None

    def test_expressions_have_both_forms(self, capsys):
        _, out, _ = run(capsys, "--json", "analyze", eqpath("heat"))
        rep = json.loads(out)
        for coeff in ("a", "b", "c"):
            assert set(rep["input"][coeff]) == {"text", "sexpr"}
