"""Tests for the generators and the commutation table."""

from fractions import Fraction

import pytest

from cga_invariants.schemas.run import EmitTarget, OutputFormat
from cga_invariants.services.arith import HalfInt, structure_constant_I
from cga_invariants.services.cga import (
    build_generators,
    build_translation,
    decompose,
    expected_bracket,
    infer_central_sign,
    p_index,
    p_name,
    verify_commutation_table,
)
from cga_invariants.services.discrepancies import printed_example_translations
from cga_invariants.services.jet import JetCoord, LaurentPoly
from cga_invariants.services.prolong import VectorField, bracket
from cga_invariants.services.reports import emit_document


class TestGenerators:
    """Test the realization on (t, x, U)."""

    def test_generator_list_three_halves(self, ell_32, golden_dir):
        """Test generator list three halves."""
        expected = (golden_dir / "generators_ell_3_2.txt").read_text(encoding="utf-8")
        assert emit_document(ell_32, EmitTarget.GENERATORS, OutputFormat.TEXT) == expected

    @pytest.mark.parametrize("twice", [3, 5, 7, 9])
    def test_generator_count(self, twice):
        """Test generator count."""
        gens = build_generators(HalfInt(twice))
        assert len(gens.names()) == twice + 5

    def test_translations_from_example_list(self, ell_52):
        """Test translations from example list."""
        gens = build_generators(ell_52)
        printed = printed_example_translations()
        assert (printed[4] - gens.P[4]).is_zero
        assert (printed[6] - gens.P[6]).is_zero
        assert not (printed[5] - gens.P[5]).is_zero

    def test_translation_out_of_range(self, ell_32):
        """Test translation out of range."""
        with pytest.raises(ValueError):
            build_translation(5, ell_32)

    def test_names(self, ell_32):
        """Test generator naming and lookup failures."""
        assert p_name(3) == "P3"
        assert p_index("P12") == 12
        assert p_index("M") is None
        with pytest.raises(KeyError):
            build_generators(ell_32).by_name("P5")
        with pytest.raises(KeyError):
            build_generators(ell_32).by_name("Q")


class TestRelations:
    """Test the defining relations."""

    def test_listed_and_swapped(self, ell_32):
        """Test listed and swapped."""
        assert expected_bracket("D", "H", ell_32) == {"H": -2}
        assert expected_bracket("H", "D", ell_32) == {"H": 2}
        assert expected_bracket("H", "C", ell_32) == {"D": 1}
        assert expected_bracket("M", "C", ell_32) == {}

    def test_translation_relations(self, ell_52):
        """Test translation relations."""
        assert expected_bracket("H", "P3", ell_52) == {"P2": 2}
        assert expected_bracket("D", "P1", ell_52) == {"P1": -5}
        assert expected_bracket("C", "P6", ell_52) == {}
        assert expected_bracket("C", "P2", ell_52) == {"P3": -4}

    def test_unknown_generator(self, ell_32):
        """Test unknown generator."""
        with pytest.raises(KeyError):
            expected_bracket("D", "P9", ell_32)


class TestCommutationTable:
    """Test closure of the realization."""

    @pytest.mark.parametrize("twice", [3, 5, 7, 9])
    def test_every_bracket_closes(self, twice):
        """Test every bracket closes."""
        ell = HalfInt(twice)
        table = verify_commutation_table(ell)
        n = ell.generator_count
        assert len(table.checks) == n * (n - 1) // 2
        assert table.all_match
        assert table.central_sign == -1

    @pytest.mark.parametrize("twice", [3, 5, 7])
    def test_central_term_magnitude(self, twice):
        """Test central term magnitude."""
        ell = HalfInt(twice)
        for check in verify_commutation_table(ell).checks:
            if check.central:
                m = p_index(check.first)
                assert check.computed == build_generators(ell).M.scale(structure_constant_I(m - 1, ell))

    def test_printed_sign_fails(self, ell_32):
        """Test forcing the printed sign breaks exactly the central brackets."""
        table = verify_commutation_table(ell_32, central_sign=1)
        assert not table.all_match
        assert all(not check.match for check in table.checks if check.central)
        assert all(check.match for check in table.checks if not check.central)

    def test_central_bracket_by_hand(self, ell_32):
        """Test [P1, P4] and [P2, P3] at 3/2 against hand values."""
        gens = build_generators(ell_32)
        assert bracket(gens.P[1], gens.P[4]) == gens.M.scale(6)
        assert bracket(gens.P[2], gens.P[3]) == gens.M.scale(-2)

    def test_infer_central_sign(self, ell_52):
        """Test the inferred central sign at 5/2."""
        assert infer_central_sign(ell_52) == -1

    @pytest.mark.parametrize("twice", [3, 5, 7])
    def test_sign_read_from_first_central_pair(self, twice):
        """Test [P1, P^(2ell+1)] carries +I_0 M and the inferred sign is -1."""
        ell = HalfInt(twice)
        gens = build_generators(ell)
        computed = bracket(gens.by_name("P1"), gens.by_name(p_name(twice + 1)))
        assert decompose(computed, gens) == {"M": structure_constant_I(0, ell)}
        assert infer_central_sign(ell) == -1


class TestDecompose:
    """Test exact decomposition in the generator basis."""

    def test_combination(self, ell_32):
        """Test a known combination decomposes to its coefficients."""
        gens = build_generators(ell_32)
        field = gens.D.scale(2) - gens.P[3] + gens.M.scale(Fraction(1, 3))
        assert decompose(field, gens) == {"M": Fraction(1, 3), "D": 2, "P3": -1}

    def test_outside_span(self, ell_32):
        """Test a field outside the generator span has no decomposition."""
        gens = build_generators(ell_32)
        outside = VectorField(2, {1: LaurentPoly.var(JetCoord.x(1))})
        assert decompose(outside, gens) is None

    def test_zero(self, ell_32):
        """Test the zero field decomposes to the empty combination."""
        assert decompose(VectorField(2), build_generators(ell_32)) == {}
