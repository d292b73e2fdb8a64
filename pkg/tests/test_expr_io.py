"""Tests for rendering, JSON and the expression parser."""

from fractions import Fraction

import pytest

from cga_invariants.exceptions import ParseError
from cga_invariants.schemas.run import EmitTarget, OutputFormat
from cga_invariants.services.arith import HalfInt
from cga_invariants.services.cga import build_generators
from cga_invariants.services.expr_io import (
    TokenKind,
    parse,
    parse_expression,
    poly_from_json,
    poly_to_json,
    rat_to_json,
    render,
    render_field,
    render_poly,
    symbol_from_name,
    tokenize,
)
from cga_invariants.services.invariants import final_invariants
from cga_invariants.services.jet import JetCoord, LaurentPoly, PhiSymbol, RatExpr
from cga_invariants.services.reports import emit_document

x1 = LaurentPoly.var(JetCoord.x(1))
u = LaurentPoly.var(JetCoord.u())
u1 = LaurentPoly.var(JetCoord.du(1))
u11 = LaurentPoly.var(JetCoord.ddu(1, 1))

COORDS = [
    JetCoord.t(),
    JetCoord.x(1),
    JetCoord.x(2),
    JetCoord.u(),
    JetCoord.du(0),
    JetCoord.du(2),
    JetCoord.ddu(1, 2),
    JetCoord.ddu(0, 0),
    JetCoord.du(10),
    JetCoord.ddu(3, 11),
]


def random_poly(rng):
    out = LaurentPoly.zero()
    for _ in range(rng.randint(0, 4)):
        exponents = {c: rng.randint(-2, 3) for c in rng.sample(COORDS, rng.randint(0, 3))}
        coef = Fraction(rng.randint(-9, 9), rng.randint(1, 6))
        out = out + LaurentPoly.from_exponents(coef, exponents)
    return out


class TestRender:
    """Test text and LaTeX rendering."""

    def test_zero(self):
        """Test zero."""
        assert render_poly(LaurentPoly.zero()) == "0"

    def test_negative_powers_go_below(self):
        """Test negative powers go below."""
        assert render_poly(u11 * u**-1 - u1**2 * u**-2) == "u_11/u - u_1^2/u^2"

    def test_rational_coefficient(self):
        """Test rational coefficient."""
        assert render_poly(x1 * Fraction(2, 3) * u**-2) == "2*x1/(3*u^2)"
        assert render_poly(x1 * Fraction(-1, 3)) == "-x1/3"

    def test_latex(self):
        """Test LaTeX rendering puts negative powers in fractions."""
        poly = u11 * u**-1 - u1**2 * u**-2 * Fraction(1, 2)
        assert render_poly(poly, OutputFormat.LATEX) == "\\frac{U_{11}}{U} - \\frac{U_{1}^{2}}{2 U^{2}}"

    def test_quotient(self):
        """Test a non-polynomial quotient renders in both formats."""
        expr = RatExpr(x1, x1 + u)
        assert render(expr) == "(x1)/(x1 + u)"
        assert render(expr, OutputFormat.LATEX) == "\\frac{x_{1}}{x_{1} + U}"

    def test_field(self, ell_32):
        """Test vector field rendering."""
        C = build_generators(ell_32).C
        assert render_field(C) == "t^2*d_t + 3*t*x1*d_x1 + (3*x1 + t*x2)*d_x2 - 2*x2^2*u*d_u"
        assert render_field(build_generators(ell_32).P[1], OutputFormat.LATEX) == "\\partial_{x_{1}}"

    def test_wkm_golden(self, ell_52, golden_dir):
        """Test wkm golden."""
        expected = (golden_dir / "wkm_ell_5_2.tex").read_text(encoding="utf-8")
        assert emit_document(ell_52, EmitTarget.WKM, OutputFormat.LATEX) == expected

    def test_deterministic(self, ell_52):
        """Test repeated emission is byte-identical."""
        first = emit_document(ell_52, EmitTarget.W, OutputFormat.TEXT)
        assert emit_document(ell_52, EmitTarget.W, OutputFormat.TEXT) == first


class TestJson:
    def test_poly_payload(self):
        """Test poly payload."""
        poly = u11 * u**-1 - u1**2 * u**-2 * Fraction(1, 2)
        payload = poly_to_json(poly)
        assert payload[0] == {"coef": "1", "exps": {"u": -1, "u_11": 1}}
        assert poly_from_json(payload) == poly

    def test_placeholders(self):
        """Test placeholders."""
        poly = LaurentPoly.var(PhiSymbol(10, 11)) + LaurentPoly.var(PhiSymbol(1, 2), 3)
        assert poly_from_json(poly_to_json(poly)) == poly

    def test_quotient_payload(self):
        """Test quotient payload."""
        payload = rat_to_json(RatExpr(x1, x1 + u))
        assert payload["num"] == [{"coef": "1", "exps": {"x1": 1}}]
        assert len(payload["den"]) == 2


class TestSymbols:
    """Test identifier resolution."""

    def test_aliases(self):
        """Test x0 and alternative index spellings resolve to canonical symbols."""
        assert symbol_from_name("x0") == JetCoord.t()
        assert symbol_from_name("u_21") == JetCoord.ddu(1, 2)
        assert symbol_from_name("u_{1,10}") == JetCoord.ddu(1, 10)
        assert symbol_from_name("u_{12}") == JetCoord.du(12)
        assert symbol_from_name("phi_{10_11}") == PhiSymbol(10, 11)

    def test_index_bound(self, ell_32):
        """Test index bound."""
        with pytest.raises(ValueError):
            symbol_from_name("x3", ell_32)
        with pytest.raises(ValueError):
            symbol_from_name("u_03", ell_32)

    def test_unknown(self):
        """Test an unknown identifier is rejected."""
        with pytest.raises(ValueError):
            symbol_from_name("y")


class TestParser:
    """Test tokenizing, parsing and error positions."""

    def test_tokens(self):
        """Test token kinds for a braced two-index name."""
        kinds = [token.kind for token in tokenize("2*u_{1,10}^-1")]
        assert kinds == [
            TokenKind.NUMBER,
            TokenKind.OP,
            TokenKind.IDENT,
            TokenKind.OP,
            TokenKind.OP,
            TokenKind.NUMBER,
            TokenKind.EOF,
        ]

    def test_phi_1(self, ell_32):
        """Test parsing phi_1 from its text form."""
        expr = parse_expression("u_11/u - u_1^2/u^2", ell_32)
        assert expr.equals(u11 * u**-1 - u1**2 * u**-2)

    def test_precedence(self):
        """Test precedence."""
        expr = parse_expression("-x1^2 + 3/4*x1*(u - 1)")
        assert expr.equals(-(x1**2) + x1 * (u - 1) * Fraction(3, 4))

    def test_parenthesised_exponent(self):
        """Test parenthesised exponent."""
        assert parse_expression("u^(-2)").equals(u**-2)

    def test_rational_result(self):
        """Test rational result."""
        expr = parse_expression("1/(x1 + u)")
        assert not expr.is_polynomial
        assert (expr * (x1 + u)).equals(1)

    @pytest.mark.parametrize(
        ("text", "line", "column"),
        [
            ("x1 + $", 1, 6),
            ("2*(x1", 1, 6),
            ("1/0", 1, 2),
            ("x1 +\n  * u", 2, 3),
            ("u^x1", 1, 3),
            ("", 1, 1),
        ],
    )
    def test_error_position(self, text, line, column):
        """Test error position."""
        with pytest.raises(ParseError) as excinfo:
            parse(text)
        assert (excinfo.value.line, excinfo.value.column) == (line, column)

    def test_index_beyond_ell(self, ell_32):
        """Test index beyond ell."""
        with pytest.raises(ParseError):
            parse("u_13", ell_32)

    def test_round_trip(self, rng):
        """Test rendered polynomials parse back to equal values."""
        for _ in range(1000):
            poly = random_poly(rng)
            assert parse_expression(render_poly(poly)).equals(poly)

    def test_fuzz_only_parse_errors(self, rng):
        """Test random text raises nothing but ParseError."""
        alphabet = "tuxphi_0123456789+-*/^(){},. \n"
        for _ in range(2000):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
            try:
                parse(text, HalfInt(5))
            except ParseError:
                pass

    def test_zero_exponent(self):
        """Test a zero exponent lowers to one in both spellings."""
        assert parse_expression("(u)^(0)").equals(1)
        assert parse_expression("x1*u^0").equals(x1)

    def test_x0_reads_and_renders_as_time(self):
        """Test x0 is read as t and rendered back as t."""
        assert render(parse_expression("x0^2*u")) == "t^2*u"

    def test_quotient_round_trip(self, rng):
        """Test rendered quotients with non-monomial denominators parse back to equal values."""
        for _ in range(1000):
            num, den = random_poly(rng), random_poly(rng) + random_poly(rng)
            if num.is_zero or den.is_zero:
                continue
            expr = RatExpr(num, den)
            text = render(expr)
            parsed = parse_expression(text)
            assert parsed.equals(expr)
            assert render(parsed) == text

    @pytest.mark.parametrize("twice", [3, 5])
    def test_final_invariants_round_trip(self, twice):
        """Test every final invariant survives render then parse unchanged."""
        ell = HalfInt(twice)
        for expr in final_invariants(ell).values():
            text = render(expr)
            parsed = parse_expression(text, ell)
            assert parsed.equals(expr)
            assert render(parsed) == text
