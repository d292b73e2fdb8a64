"""Tests for the command-line entry point and report assembly."""

import json

import pytest

from cga_invariants.cli import EXIT_OK, EXIT_USAGE, main
from cga_invariants.schemas.common import CheckStatus
from cga_invariants.schemas.run import EmitTarget, OutputFormat, RunConfig
from cga_invariants.services.reports import (
    bracket_report,
    check_expression,
    coeff_table_model,
    emit_document,
    format_bracket_report,
    named_expressions,
)


class TestRunConfig:
    def test_normalises_ell(self):
        """Test decimal ell is normalised to p/q."""
        assert RunConfig(ell="2.5").ell == "5/2"

    def test_rejects_bad_values(self):
        """Test out-of-range ell is rejected."""
        with pytest.raises(ValueError):
            RunConfig(ell="1/2")
        with pytest.raises(ValueError):
            RunConfig(ell="5/2", parallelism=-1)


class TestReports:
    """Test report assembly without the CLI."""

    def test_bracket_report_records_sign(self, ell_32):
        """Test bracket report records sign."""
        report = bracket_report(ell_32)
        assert report.status == CheckStatus.WARN
        assert report.central_sign == -1
        assert [d.key for d in report.discrepancies] == ["central_sign"]
        assert "WARN  central_sign" in format_bracket_report(report)

    def test_bracket_report_example_translation(self, ell_52):
        """Test bracket report example translation."""
        keys = [d.key for d in bracket_report(ell_52).discrepancies]
        assert keys == ["central_sign", "example_p5"]

    def test_coeff_model(self, ell_52):
        """Test the coefficient table model carries c and gamma values."""
        model = coeff_table_model(ell_52)
        values = {(e.k, e.m, e.a, e.b): e.value for e in model.c}
        assert values[(1, 1, 0, 1)] == "5/18"
        assert {(g.k, g.m): g.value for g in model.gamma}[(2, 2)] == "2/81"

    def test_check_u(self, ell_32):
        """Test which generators annihilate U."""
        report = check_expression("u", ell_32)
        annihilators = [v.generator for v in report.verdicts if v.annihilated]
        assert annihilators == ["D", "H", "P1", "P2", "C~"]

    def test_check_phi_1(self, ell_32):
        """Test the generator verdicts on phi_1."""
        report = check_expression("u_11/u - u_1^2/u^2", ell_32)
        verdicts = {v.generator: v.annihilated for v in report.verdicts}
        assert verdicts == {
            "M": True,
            "D": False,
            "H": True,
            "C": False,
            "P1": True,
            "P2": True,
            "P3": True,
            "P4": True,
            "C~": False,
        }

    def test_wkm_needs_five_halves(self, ell_32):
        """Test wkm needs five halves."""
        with pytest.raises(ValueError):
            named_expressions(ell_32, EmitTarget.WKM)

    def test_final_latex(self, ell_52):
        """Test final latex."""
        lines = emit_document(ell_52, EmitTarget.FINAL, OutputFormat.LATEX).splitlines()
        assert lines[0] == "\\frac{w_{11}}{w^{5}}"
        assert len(lines) == 5

    def test_wkm_json_count(self, ell_52):
        """Test wkm json count."""
        document = json.loads(emit_document(ell_52, EmitTarget.WKM, OutputFormat.JSON))
        assert [entry["name"] for entry in document["entries"]] == ["w_11", "w_12", "w_13", "w_22", "w_23"]
        assert document["schema_version"] == "1.0"


class TestMain:
    """Test commands and exit status."""

    def test_emit_generators(self, capsys, golden_dir):
        """Test emit generators."""
        assert main(["emit", "--ell", "3/2", "--what", "generators"]) == EXIT_OK
        expected = (golden_dir / "generators_ell_3_2.txt").read_text(encoding="utf-8")
        assert capsys.readouterr().out == expected

    def test_out_of_scope_ell(self, capsys):
        """Test out of scope ell."""
        assert main(["verify-algebra", "--ell", "1/2"]) == EXIT_USAGE
        assert "invalid arguments" in capsys.readouterr().err

    def test_missing_command(self):
        """Test missing command."""
        assert main([]) == EXIT_USAGE

    def test_help(self):
        """Test --help exits cleanly."""
        assert main(["--help"]) == EXIT_OK

    def test_version(self, capsys):
        """Test --version prints the application version."""
        assert main(["--version"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("cga-invariants ")

    def test_verify_algebra_json(self, capsys):
        """Test verify algebra json."""
        assert main(["verify-algebra", "--ell", "5/2", "--format", "json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["status"] == "WARN"
        assert report["central_sign"] == -1
        assert len(report["entries"]) == 45

    def test_verify_invariants(self, capsys):
        """Test verify invariants."""
        assert main(["verify-invariants", "--ell", "3/2"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "PASS  annihilation 40/40" in out
        assert out.rstrip().endswith("status: WARN")

    def test_wkm_at_three_halves(self, capsys):
        """Test wkm at three halves."""
        assert main(["emit", "--ell", "3/2", "--what", "wkm"]) == EXIT_USAGE
        assert "ell >= 5/2" in capsys.readouterr().err

    def test_check_file(self, tmp_path, capsys):
        """Test checking an expression read from a file."""
        candidate = tmp_path / "candidate.txt"
        candidate.write_text("u\n", encoding="utf-8")
        assert main(["check", str(candidate), "--ell", "3/2", "--format", "json"]) == EXIT_OK
        verdicts = {v["generator"]: v["annihilated"] for v in json.loads(capsys.readouterr().out)["verdicts"]}
        assert verdicts["H"] is True
        assert verdicts["M"] is False

    def test_check_parse_error(self, tmp_path, capsys):
        """Test check parse error."""
        candidate = tmp_path / "candidate.txt"
        candidate.write_text("u_11 +\n  * u", encoding="utf-8")
        assert main(["check", str(candidate), "--ell", "3/2"]) == EXIT_USAGE
        assert "line 2, column 3" in capsys.readouterr().err

    def test_check_missing_file(self, tmp_path):
        """Test check missing file."""
        assert main(["check", str(tmp_path / "absent.txt"), "--ell", "3/2"]) == EXIT_USAGE

    def test_coeff_to_file(self, tmp_path):
        """Test coeff to file."""
        target = tmp_path / "coeff.json"
        assert main(["coeff", "--ell", "5/2", "--format", "json", "--output", str(target)]) == EXIT_OK
        model = json.loads(target.read_text(encoding="utf-8"))
        assert model["ell"] == "5/2"
        assert len(model["gamma"]) == 5

    def test_bench(self, capsys):
        """Test the bench command reports every timed stage."""
        assert main(["bench", "--ell", "3/2", "--format", "json"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["invariant_count"] == 5
        assert report["status"] == "PASS"
        assert set(report["timings"]) == {"generators", "coefficients", "tower", "annihilation"}
