"""Jet-space coordinates, sparse Laurent polynomials and rational expressions.

A monomial is a tuple of ``(symbol, exponent)`` pairs sorted by the symbol's
``sort_key`` with no zero exponents, so structural equality of the term maps
is equality of polynomials. Two symbol families share the machinery: the jet
coordinates ``t, x_1..x_K, U, U_mu, U_mu,nu`` and the ``phi_km`` placeholders
used when an invariant is written as a polynomial in other invariants.
"""

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction

from cga_invariants.exceptions import IndexRangeError, SubstitutionError, ZeroDivisionExprError


class CoordKind(IntEnum):
    """Coordinate families, in canonical order."""

    X = 0  # t = x_0 and x_1..x_K
    U = 1
    U1 = 2  # U_mu
    U2 = 3  # U_mu,nu with mu <= nu


def _pair(first: int, second: int, sep: str) -> str:
    if first <= 9 and second <= 9:
        return f"{first}{second}"
    return f"{{{first}{sep}{second}}}"


@dataclass(frozen=True, slots=True)
class JetCoord:
    """A coordinate of the second-order jet space over (t, x_1..x_K, U)."""

    kind: CoordKind
    first: int = 0
    second: int = 0
    sort_key: tuple[int, int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.first < 0 or self.second < 0:
            raise IndexRangeError(f"Negative coordinate index in {self.kind.name}")
        if self.kind in (CoordKind.X, CoordKind.U1) and self.second:
            raise IndexRangeError(f"{self.kind.name} takes a single index")
        if self.kind is CoordKind.U and (self.first or self.second):
            raise IndexRangeError("U takes no index")
        if self.kind is CoordKind.U2 and self.first > self.second:
            first, second = self.second, self.first
            object.__setattr__(self, "first", first)
            object.__setattr__(self, "second", second)
        object.__setattr__(self, "sort_key", (int(self.kind), self.first, self.second))

    @classmethod
    def t(cls) -> "JetCoord":
        return cls(CoordKind.X, 0)

    @classmethod
    def x(cls, mu: int) -> "JetCoord":
        """x_mu, with x_0 = t."""
        return cls(CoordKind.X, mu)

    @classmethod
    def u(cls) -> "JetCoord":
        return cls(CoordKind.U)

    @classmethod
    def du(cls, mu: int) -> "JetCoord":
        """U_mu = dU/dx_mu."""
        return cls(CoordKind.U1, mu)

    @classmethod
    def ddu(cls, mu: int, nu: int) -> "JetCoord":
        """U_mu,nu (symmetric)."""
        return cls(CoordKind.U2, mu, nu)

    @property
    def graded(self) -> bool:
        return self.kind in (CoordKind.U1, CoordKind.U2)

    @property
    def is_base(self) -> bool:
        """True for t, x_k and U (the coordinates a vector field acts on)."""
        return self.kind in (CoordKind.X, CoordKind.U)

    @property
    def name(self) -> str:
        match self.kind:
            case CoordKind.X:
                return "t" if self.first == 0 else f"x{self.first}"
            case CoordKind.U:
                return "u"
            case CoordKind.U1:
                return f"u_{self.first}" if self.first <= 9 else f"u_{{{self.first}}}"
            case _:
                return f"u_{_pair(self.first, self.second, ',')}"

    @property
    def latex(self) -> str:
        match self.kind:
            case CoordKind.X:
                return "t" if self.first == 0 else f"x_{{{self.first}}}"
            case CoordKind.U:
                return "U"
            case CoordKind.U1:
                return f"U_{{{self.first}}}"
            case _:
                pair = _pair(self.first, self.second, ",")
                return f"U_{{{pair.strip('{}')}}}"


@dataclass(frozen=True, slots=True)
class PhiSymbol:
    """Placeholder phi_km standing for an invariant inside a phi-polynomial."""

    k: int
    m: int
    sort_key: tuple[int, int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sort_key", (10, self.k, self.m))

    @property
    def graded(self) -> bool:
        return True

    @property
    def name(self) -> str:
        return f"phi_{_pair(self.k, self.m, '_')}"

    @property
    def latex(self) -> str:
        pair = _pair(self.k, self.m, ",").strip("{}")
        return f"\\phi_{{{pair}}}"


AnySymbol = JetCoord | PhiSymbol
Monomial = tuple[tuple[AnySymbol, int], ...]
Scalar = int | Fraction


def make_monomial(exponents: Mapping[AnySymbol, int]) -> Monomial:
    """Build the canonical monomial tuple from a symbol -> exponent map."""
    return tuple(
        sorted(((s, e) for s, e in exponents.items() if e), key=lambda item: item[0].sort_key)
    )


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out: list[tuple[AnySymbol, int]] = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        ka = a[i][0].sort_key
        kb = b[j][0].sort_key
        if ka == kb:
            e = a[i][1] + b[j][1]
            if e:
                out.append((a[i][0], e))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _accumulate(out: dict[Monomial, Fraction], mono: Monomial, coef: Fraction) -> None:
    total = out.get(mono, 0) + coef
    if total:
        out[mono] = total
    else:
        out.pop(mono, None)


def term_sort_key(mono: Monomial) -> tuple[int, tuple[tuple[tuple[int, int, int], int], ...]]:
    """
    Canonical term order, graded reverse-lexicographic.

    Terms ascend by graded degree (total exponent of U_mu, U_mu,nu and phi
    symbols), then by the highest coordinate present, then by its exponent,
    then by the next highest coordinate, and so on. Rendering and the golden
    files use this order.

    Args:
        mono: Monomial in canonical factor order

    Returns:
        Sort key for the monomial
    """
    grade = sum(e for s, e in mono if s.graded)
    return grade, tuple((s.sort_key, e) for s, e in reversed(mono))


class LaurentPoly:
    """Sparse polynomial with rational coefficients and integer (possibly negative) exponents.

    Instances are immutable; every operation returns a new polynomial.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None) -> None:
        self._terms: dict[Monomial, Fraction] = {}
        if terms:
            for mono, coef in terms.items():
                if coef:
                    self._terms[mono] = Fraction(coef)

    @classmethod
    def _wrap(cls, terms: dict[Monomial, Fraction]) -> "LaurentPoly":
        poly = cls.__new__(cls)
        poly._terms = terms
        return poly

    # Constructors

    @classmethod
    def zero(cls) -> "LaurentPoly":
        return cls._wrap({})

    @classmethod
    def constant(cls, value: Scalar) -> "LaurentPoly":
        return cls._wrap({(): Fraction(value)} if value else {})

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls.constant(1)

    @classmethod
    def var(cls, symbol: AnySymbol, exponent: int = 1, coef: Scalar = 1) -> "LaurentPoly":
        if not coef:
            return cls.zero()
        mono: Monomial = ((symbol, exponent),) if exponent else ()
        return cls._wrap({mono: Fraction(coef)})

    @classmethod
    def from_exponents(cls, coef: Scalar, exponents: Mapping[AnySymbol, int]) -> "LaurentPoly":
        if not coef:
            return cls.zero()
        return cls._wrap({make_monomial(exponents): Fraction(coef)})

    # Inspection

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in canonical order."""
        return sorted(self._terms.items(), key=lambda item: term_sort_key(item[0]))

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and () in self._terms)

    @property
    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def coefficient(self, exponents: Mapping[AnySymbol, int]) -> Fraction:
        """Coefficient of the monomial with the given exponents (0 if absent)."""
        return self._terms.get(make_monomial(exponents), Fraction(0))

    def symbols(self) -> set[AnySymbol]:
        return {s for mono in self._terms for s, _ in mono}

    def negative_symbols(self) -> set[AnySymbol]:
        """Symbols that occur with a negative exponent."""
        return {s for mono in self._terms for s, e in mono if e < 0}

    def degree_in(self, symbol: AnySymbol) -> int:
        """Largest exponent of ``symbol`` (0 when absent)."""
        best = 0
        for mono in self._terms:
            for s, e in mono:
                if s == symbol:
                    best = max(best, e)
        return best

    def leading_term(self) -> tuple[Monomial, Fraction]:
        """Largest term in canonical order."""
        if not self._terms:
            raise ZeroDivisionExprError("Zero polynomial has no leading term")
        mono = max(self._terms, key=term_sort_key)
        return mono, self._terms[mono]

    def coefficient_of_power(self, symbol: AnySymbol, power: int) -> "LaurentPoly":
        """Collect the terms carrying ``symbol**power`` with that factor removed."""
        out: dict[Monomial, Fraction] = {}
        for mono, coef in self._terms.items():
            exponent = 0
            rest = mono
            for i, (s, e) in enumerate(mono):
                if s == symbol:
                    exponent = e
                    rest = mono[:i] + mono[i + 1 :]
                    break
            if exponent == power:
                out[rest] = coef
        return LaurentPoly._wrap(out)

    # Arithmetic

    @staticmethod
    def _coerce(other: "LaurentPoly | Scalar") -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.constant(other)
        raise TypeError(f"Cannot combine LaurentPoly with {type(other).__name__}")

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.constant(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly._wrap({m: -c for m, c in self._terms.items()})

    def __add__(self, other: "LaurentPoly | Scalar") -> "LaurentPoly":
        if not isinstance(other, (LaurentPoly, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        out = dict(self._terms)
        for mono, coef in other._terms.items():
            total = out.get(mono, 0) + coef
            if total:
                out[mono] = total
            else:
                out.pop(mono, None)
        return LaurentPoly._wrap(out)

    __radd__ = __add__

    def __sub__(self, other: "LaurentPoly | Scalar") -> "LaurentPoly":
        if not isinstance(other, (LaurentPoly, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "LaurentPoly":
        return LaurentPoly.constant(other) - self

    def __mul__(self, other: "LaurentPoly | Scalar") -> "LaurentPoly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return LaurentPoly.zero()
            return LaurentPoly._wrap({m: c * other for m, c in self._terms.items()})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        out: dict[Monomial, Fraction] = {}
        for ma, ca in self._terms.items():
            for mb, cb in other._terms.items():
                mono = _mono_mul(ma, mb)
                total = out.get(mono, 0) + ca * cb
                if total:
                    out[mono] = total
                else:
                    out.pop(mono, None)
        return LaurentPoly._wrap(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "LaurentPoly":
        if exponent < 0:
            return self.inverse_monomial() ** (-exponent)
        result = LaurentPoly.one()
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result

    def inverse_monomial(self) -> "LaurentPoly":
        """1/self, defined only for a single nonzero term."""
        if not self._terms:
            raise ZeroDivisionExprError("Cannot invert the zero polynomial")
        if len(self._terms) != 1:
            raise SubstitutionError("Only a single-term polynomial has a Laurent inverse")
        ((mono, coef),) = self._terms.items()
        return LaurentPoly._wrap({tuple((s, -e) for s, e in mono): 1 / coef})

    # Calculus and substitution

    def partial(self, symbol: AnySymbol) -> "LaurentPoly":
        """Partial derivative with respect to ``symbol``."""
        out: dict[Monomial, Fraction] = {}
        for mono, coef in self._terms.items():
            for i, (s, e) in enumerate(mono):
                if s == symbol:
                    if e == 1:
                        reduced = mono[:i] + mono[i + 1 :]
                    else:
                        reduced = mono[:i] + ((s, e - 1),) + mono[i + 1 :]
                    total = out.get(reduced, 0) + coef * e
                    if total:
                        out[reduced] = total
                    else:
                        out.pop(reduced, None)
                    break
        return LaurentPoly._wrap(out)

    def substitute(self, symbol: AnySymbol, value: "LaurentPoly | Scalar") -> "LaurentPoly":
        """Replace ``symbol`` by ``value``; a negative power of a non-invertible value is a pole."""
        value = self._coerce(value)
        return self.evaluate_symbols({symbol: value})

    def evaluate_symbols(self, mapping: Mapping[AnySymbol, "LaurentPoly"]) -> "LaurentPoly":
        """Substitute several symbols at once."""
        powers: dict[tuple[AnySymbol, int], LaurentPoly] = {}
        out: dict[Monomial, Fraction] = {}
        for mono, coef in self._terms.items():
            rest: list[tuple[AnySymbol, int]] = []
            factor: LaurentPoly | None = None
            for s, e in mono:
                if s not in mapping:
                    rest.append((s, e))
                    continue
                key = (s, e)
                if key not in powers:
                    powers[key] = _power_for_substitution(mapping[s], e, s)
                factor = powers[key] if factor is None else factor * powers[key]
            if factor is None:
                _accumulate(out, mono, coef)
                continue
            rest_mono = tuple(rest)
            for fmono, fcoef in factor._terms.items():
                _accumulate(out, _mono_mul(rest_mono, fmono), coef * fcoef)
        return LaurentPoly._wrap(out)

    def __repr__(self) -> str:
        return f"LaurentPoly({len(self._terms)} terms)"


def proportionality_constant(image: LaurentPoly, base: LaurentPoly) -> Fraction | None:
    """kappa with image == kappa * base, or None."""
    if image.is_zero:
        return Fraction(0)
    if base.is_zero or len(image) != len(base):
        return None
    mono, coef = base.leading_term()
    kappa = image.coefficient(dict(mono)) / coef
    if (image - base * kappa).is_zero:
        return kappa
    return None


def _power_for_substitution(value: LaurentPoly, exponent: int, symbol: AnySymbol) -> LaurentPoly:
    if exponent >= 0:
        return value**exponent
    if value.is_zero or not value.is_monomial:
        raise SubstitutionError(
            f"Substituting {symbol.name} with exponent {exponent} creates a pole"
        )
    return value**exponent


class RatExpr:
    """An unnormalised quotient num/den of Laurent polynomials.

    Single-term denominators are folded into the numerator, so a quotient
    whose denominator is a monomial is always stored with den == 1.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly | None = None) -> None:
        den = LaurentPoly.one() if den is None else den
        if den.is_zero:
            raise ZeroDivisionExprError("Denominator is identically zero")
        if den.is_monomial and den != 1:
            num = num * den.inverse_monomial()
            den = LaurentPoly.one()
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, poly: "LaurentPoly | Scalar") -> "RatExpr":
        return cls(LaurentPoly._coerce(poly))

    @staticmethod
    def _lift(other: "RatExpr | LaurentPoly | Scalar") -> "RatExpr":
        if isinstance(other, RatExpr):
            return other
        return RatExpr.from_poly(other)

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den == 1

    def equals(self, other: "RatExpr | LaurentPoly | Scalar") -> bool:
        """Semantic equality (cross-multiplication)."""
        return (self - self._lift(other)).is_zero

    def __neg__(self) -> "RatExpr":
        return RatExpr(-self.num, self.den)

    def __add__(self, other: "RatExpr | LaurentPoly | Scalar") -> "RatExpr":
        other = self._lift(other)
        if self.den == other.den:
            return RatExpr(self.num + other.num, self.den)
        return RatExpr(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __sub__(self, other: "RatExpr | LaurentPoly | Scalar") -> "RatExpr":
        return self + (-self._lift(other))

    def __rsub__(self, other: "LaurentPoly | Scalar") -> "RatExpr":
        return self._lift(other) - self

    def __mul__(self, other: "RatExpr | LaurentPoly | Scalar") -> "RatExpr":
        other = self._lift(other)
        return RatExpr(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other: "RatExpr | LaurentPoly | Scalar") -> "RatExpr":
        other = self._lift(other)
        if other.is_zero:
            raise ZeroDivisionExprError("Division by an expression whose numerator is zero")
        return RatExpr(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other: "LaurentPoly | Scalar") -> "RatExpr":
        return self._lift(other) / self

    def __pow__(self, exponent: int) -> "RatExpr":
        if exponent < 0:
            if self.is_zero:
                raise ZeroDivisionExprError("Negative power of zero")
            return RatExpr(self.den**-exponent, self.num**-exponent)
        return RatExpr(self.num**exponent, self.den**exponent)

    def __repr__(self) -> str:
        return f"RatExpr(num={self.num!r}, den={self.den!r})"


def jet_coordinates(K: int) -> Iterable[JetCoord]:
    """All coordinates of the second-order jet space with K spatial variables, in order."""
    for mu in range(K + 1):
        yield JetCoord.x(mu)
    yield JetCoord.u()
    for mu in range(K + 1):
        yield JetCoord.du(mu)
    for mu in range(K + 1):
        for nu in range(mu, K + 1):
            yield JetCoord.ddu(mu, nu)
