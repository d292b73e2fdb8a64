"""Rendering, JSON serialisation and parsing of polynomials, rational expressions and fields.

Text form::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | "+" unary | power
    power  := atom ("^" exponent)?
    atom   := NUMBER | IDENT | "(" expr ")"
    exponent := ["-"] NUMBER | "(" ["-"] NUMBER ")"

Identifiers are ``t``, ``x0`` (same as t), ``x1``, ``x2``, ..., ``u``,
``u_N``, ``u_MN`` and the braced ``u_{N}``, ``u_{M,N}`` for indices of 10
and above. ``x0`` is read as ``t`` and always rendered as ``t``.

An exponent is any integer literal, zero included: ``(u)^(0)`` and ``u^0``
lower to 1. A negative exponent inverts its base.
"""

import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any

from cga_invariants.exceptions import ParseError
from cga_invariants.schemas.run import OutputFormat
from cga_invariants.services.arith import HalfInt, format_rat, parse_rat
from cga_invariants.services.jet import (
    AnySymbol,
    JetCoord,
    LaurentPoly,
    Monomial,
    PhiSymbol,
    RatExpr,
)
from cga_invariants.services.prolong import ProlongedField, VectorField

# Rendering


def _factor_text(symbol: AnySymbol, exponent: int) -> str:
    return symbol.name if exponent == 1 else f"{symbol.name}^{exponent}"


def _factor_latex(symbol: AnySymbol, exponent: int) -> str:
    return symbol.latex if exponent == 1 else f"{symbol.latex}^{{{exponent}}}"


def _term_text(mono: Monomial, magnitude: Fraction) -> str:
    positive = [_factor_text(s, e) for s, e in mono if e > 0]
    negative = [_factor_text(s, -e) for s, e in mono if e < 0]
    top = positive
    if magnitude.numerator != 1 or not positive:
        top = [str(magnitude.numerator)] + positive
    bottom = ([str(magnitude.denominator)] if magnitude.denominator != 1 else []) + negative
    body = "*".join(top)
    if not bottom:
        return body
    if len(bottom) == 1:
        return f"{body}/{bottom[0]}"
    return f"{body}/({'*'.join(bottom)})"


def _latex_product(coef: int, factors: list[str]) -> str:
    if coef != 1 or not factors:
        return " ".join([str(coef)] + factors)
    return " ".join(factors)


def _term_latex(mono: Monomial, magnitude: Fraction) -> str:
    positive = [_factor_latex(s, e) for s, e in mono if e > 0]
    negative = [_factor_latex(s, -e) for s, e in mono if e < 0]
    if not negative:
        if magnitude.denominator == 1:
            return _latex_product(magnitude.numerator, positive)
        frac = f"\\frac{{{magnitude.numerator}}}{{{magnitude.denominator}}}"
        return " ".join([frac] + positive)
    top = _latex_product(magnitude.numerator, positive)
    bottom = _latex_product(magnitude.denominator, negative)
    return f"\\frac{{{top}}}{{{bottom}}}"


def _signed_terms(poly: LaurentPoly, fmt: OutputFormat) -> Iterator[tuple[bool, str]]:
    term = _term_latex if fmt == OutputFormat.LATEX else _term_text
    for mono, coef in poly.sorted_terms():
        yield coef < 0, term(mono, abs(coef))


def _join(pieces: list[tuple[bool, str]]) -> str:
    if not pieces:
        return "0"
    negative, body = pieces[0]
    out = [f"-{body}" if negative else body]
    for negative, body in pieces[1:]:
        out.append(f" - {body}" if negative else f" + {body}")
    return "".join(out)


def render_poly(poly: LaurentPoly, fmt: OutputFormat = OutputFormat.TEXT) -> str:
    """Terms in canonical order; the zero polynomial renders as 0."""
    return _join(list(_signed_terms(poly, fmt)))


def render(expr: RatExpr | LaurentPoly, fmt: OutputFormat = OutputFormat.TEXT) -> str:
    if isinstance(expr, LaurentPoly):
        return render_poly(expr, fmt)
    if expr.is_polynomial:
        return render_poly(expr.num, fmt)
    num, den = render_poly(expr.num, fmt), render_poly(expr.den, fmt)
    if fmt == OutputFormat.LATEX:
        return f"\\frac{{{num}}}{{{den}}}"
    return f"({num})/({den})"


def _field_piece(coord: JetCoord, coef: LaurentPoly, fmt: OutputFormat) -> tuple[bool, str]:
    if fmt == OutputFormat.LATEX:
        derivative = f"\\partial_{{{coord.latex}}}"
        if coef.is_monomial:
            ((negative, body),) = _signed_terms(coef, fmt)
            return negative, derivative if body == "1" else f"{body} {derivative}"
        return False, f"\\left({render_poly(coef, fmt)}\\right) {derivative}"
    derivative = f"d_{coord.name}"
    if coef.is_monomial:
        ((negative, body),) = _signed_terms(coef, fmt)
        return negative, derivative if body == "1" else f"{body}*{derivative}"
    return False, f"({render_poly(coef, fmt)})*{derivative}"


def field_components(field: VectorField | ProlongedField) -> list[tuple[JetCoord, LaurentPoly]]:
    if isinstance(field, VectorField):
        return list(field.components())
    return list(field.coefficients.items())


def render_field(field: VectorField | ProlongedField, fmt: OutputFormat = OutputFormat.TEXT) -> str:
    """Components in coordinate order, e.g. ``t*d_x1 + d_x2``."""
    pieces = [_field_piece(coord, coef, fmt) for coord, coef in field_components(field)]
    return _join(pieces)


# JSON


def poly_to_json(poly: LaurentPoly) -> list[dict[str, Any]]:
    """[{"coef": "p/q", "exps": {name: exponent}}] in canonical order."""
    return [
        {"coef": format_rat(coef), "exps": {s.name: e for s, e in mono}}
        for mono, coef in poly.sorted_terms()
    ]


def poly_from_json(data: list[Mapping[str, Any]], ell: HalfInt | None = None) -> LaurentPoly:
    out = LaurentPoly.zero()
    for term in data:
        exponents = {symbol_from_name(name, ell): int(e) for name, e in term["exps"].items()}
        out = out + LaurentPoly.from_exponents(parse_rat(str(term["coef"])), exponents)
    return out


def rat_to_json(expr: RatExpr | LaurentPoly) -> dict[str, Any]:
    if isinstance(expr, LaurentPoly):
        expr = RatExpr(expr)
    return {"num": poly_to_json(expr.num), "den": poly_to_json(expr.den)}


def field_to_json(field: VectorField | ProlongedField) -> dict[str, Any]:
    """{coordinate name: polynomial} in coordinate order."""
    return {coord.name: poly_to_json(coef) for coord, coef in field_components(field)}


# Parsing

_PAIR_DIGITS = re.compile(r"u_(\d)(\d)")
_SINGLE_DIGIT = re.compile(r"u_(\d)")
_BRACED_SINGLE = re.compile(r"u_\{(\d+)\}")
_BRACED_PAIR = re.compile(r"u_\{(\d+),(\d+)\}")
_X_INDEX = re.compile(r"x(\d+)")
_PHI_NAME = re.compile(r"phi_(?:(\d)(\d)|\{(\d+)_(\d+)\})")

_DIGITS = "0123456789"
_OPERATORS = "+-*/^"


def _is_ident_char(c: str) -> bool:
    return c in _DIGITS or c == "_" or (c.isascii() and c.isalpha())


def _check_index(index: int, ell: HalfInt | None, name: str) -> None:
    if ell is not None and index > ell.K:
        raise ValueError(f"{name} needs an index <= {ell.K} for ell={ell}")


def symbol_from_name(name: str, ell: HalfInt | None = None) -> AnySymbol:
    """
    Inverse of ``symbol.name``.

    Args:
        name: Coordinate or placeholder name, e.g. ``x2``, ``u_12``, ``phi_13``
        ell: When given, indices beyond ell + 1/2 are rejected

    Returns:
        The jet coordinate or phi placeholder

    Raises:
        ValueError: On unknown names or out-of-range indices
    """
    if name in ("t", "x0"):
        return JetCoord.t()
    if name == "u":
        return JetCoord.u()
    if match := _X_INDEX.fullmatch(name):
        index = int(match.group(1))
        _check_index(index, ell, name)
        return JetCoord.x(index)
    if match := (_PAIR_DIGITS.fullmatch(name) or _BRACED_PAIR.fullmatch(name)):
        first, second = int(match.group(1)), int(match.group(2))
        _check_index(max(first, second), ell, name)
        return JetCoord.ddu(first, second)
    if match := (_SINGLE_DIGIT.fullmatch(name) or _BRACED_SINGLE.fullmatch(name)):
        index = int(match.group(1))
        _check_index(index, ell, name)
        return JetCoord.du(index)
    if match := _PHI_NAME.fullmatch(name):
        groups = [g for g in match.groups() if g is not None]
        return PhiSymbol(int(groups[0]), int(groups[1]))
    raise ValueError(f"Unknown symbol {name!r}")


class TokenKind(Enum):
    NUMBER = "number"
    IDENT = "identifier"
    OP = "operator"
    LPAREN = "("
    RPAREN = ")"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, column = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line, column = line + 1, 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            column += 1
            continue
        start = i
        if c in _DIGITS:
            while i < len(text) and text[i] in _DIGITS:
                i += 1
            kind = TokenKind.NUMBER
        elif c.isascii() and c.isalpha():
            while i < len(text) and _is_ident_char(text[i]):
                i += 1
            if text[i - 1] == "_" and i < len(text) and text[i] == "{":
                close = text.find("}", i)
                if close == -1:
                    raise ParseError("unclosed '{'", line, column + i - start)
                inner = text[i + 1 : close]
                if not inner or any(ch not in _DIGITS + "," for ch in inner):
                    raise ParseError(f"bad index '{{{inner}}}'", line, column + i - start)
                i = close + 1
            kind = TokenKind.IDENT
        elif c in _OPERATORS:
            i += 1
            kind = TokenKind.OP
        elif c == "(":
            i += 1
            kind = TokenKind.LPAREN
        elif c == ")":
            i += 1
            kind = TokenKind.RPAREN
        else:
            raise ParseError(f"unexpected character {c!r}", line, column)
        tokens.append(Token(kind, text[start:i], line, column))
        column += i - start
    tokens.append(Token(TokenKind.EOF, "", line, column))
    return tokens


@dataclass(frozen=True)
class Num:
    value: Fraction
    literal: bool = False  # a bare integer literal, eligible for p/q folding


@dataclass(frozen=True)
class Var:
    symbol: JetCoord


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Num | Var | Neg | BinOp | Pow


class _Parser:
    def __init__(self, tokens: list[Token], ell: HalfInt | None) -> None:
        self.tokens = tokens
        self.pos = 0
        self.ell = ell

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind is not TokenKind.EOF:
            self.pos += 1
        return token

    def error(self, message: str, token: Token | None = None) -> ParseError:
        token = token or self.peek()
        return ParseError(message, token.line, token.column)

    def at_op(self, ops: str) -> bool:
        token = self.peek()
        return token.kind is TokenKind.OP and token.text in ops

    def parse(self) -> Node:
        if self.peek().kind is TokenKind.EOF:
            raise self.error("empty expression")
        node = self.expr()
        token = self.peek()
        if token.kind is not TokenKind.EOF:
            raise self.error(f"unexpected {token.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at_op("+-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at_op("*/"):
            op_token = self.advance()
            right = self.unary()
            if (
                op_token.text == "/"
                and isinstance(node, Num)
                and isinstance(right, Num)
                and node.literal
                and right.literal
            ):
                if right.value == 0:
                    raise self.error("division by zero", op_token)
                node = Num(node.value / right.value)
            else:
                node = BinOp(op_token.text, node, right)
        return node

    def unary(self) -> Node:
        if self.at_op("-"):
            self.advance()
            return Neg(self.unary())
        if self.at_op("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at_op("^"):
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> int:
        parenthesised = self.peek().kind is TokenKind.LPAREN
        if parenthesised:
            self.advance()
        sign = 1
        if self.at_op("-"):
            self.advance()
            sign = -1
        token = self.advance()
        if token.kind is not TokenKind.NUMBER:
            raise self.error("exponent must be an integer", token)
        if parenthesised:
            closing = self.advance()
            if closing.kind is not TokenKind.RPAREN:
                raise self.error("expected ')'", closing)
        return sign * int(token.text)

    def atom(self) -> Node:
        token = self.advance()
        match token.kind:
            case TokenKind.NUMBER:
                return Num(Fraction(int(token.text)), literal=True)
            case TokenKind.IDENT:
                try:
                    symbol = symbol_from_name(token.text, self.ell)
                except ValueError as e:
                    raise self.error(str(e), token) from e
                if not isinstance(symbol, JetCoord):
                    raise self.error(f"unknown identifier {token.text!r}", token)
                return Var(symbol)
            case TokenKind.LPAREN:
                node = self.expr()
                closing = self.advance()
                if closing.kind is not TokenKind.RPAREN:
                    raise self.error("expected ')'", closing)
                return node
            case _:
                label = token.text or token.kind.value
                raise self.error(f"unexpected {label!r}", token)


def parse(text: str, ell: HalfInt | None = None) -> Node:
    """Parse text into a syntax tree; every malformed input raises ParseError."""
    return _Parser(tokenize(text), ell).parse()


def lower(node: Node) -> RatExpr:
    """Evaluate a syntax tree into a rational expression."""
    match node:
        case Num(value=value):
            return RatExpr.from_poly(value)
        case Var(symbol=symbol):
            return RatExpr(LaurentPoly.var(symbol))
        case Neg(operand=operand):
            return -lower(operand)
        case Pow(base=base, exponent=exponent):
            return lower(base) ** exponent
        case BinOp(op="+", left=left, right=right):
            return lower(left) + lower(right)
        case BinOp(op="-", left=left, right=right):
            return lower(left) - lower(right)
        case BinOp(op="*", left=left, right=right):
            return lower(left) * lower(right)
        case BinOp(op="/", left=left, right=right):
            return lower(left) / lower(right)
    raise TypeError(f"Unknown node {node!r}")


def parse_expression(text: str, ell: HalfInt | None = None) -> RatExpr:
    """
    Parse text form into an exact rational expression.

    Args:
        text: One expression in the text grammar
        ell: When given, indices beyond ell + 1/2 are rejected

    Returns:
        The lowered expression

    Raises:
        ParseError: On malformed text, with the line and column of the
            offending token
        ZeroDivisionExprError: If a subexpression that is identically zero
            is divided by or raised to a negative power
    """
    return lower(parse(text, ell))
