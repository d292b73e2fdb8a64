"""Generators of the centrally extended conformal Galilei algebra and its commutation table.

The realization acts on (t, x_1..x_K, U) with K = ell + 1/2. Generator names
are ``M``, ``D``, ``H``, ``C`` and ``P1``..``P{2ell+1}``.
"""

import logging
from collections.abc import Iterator
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from sympy import Matrix, Rational

from cga_invariants.exceptions import CGAError
from cga_invariants.services.arith import (
    HalfInt,
    b_ell,
    binomial,
    lambda_k,
    structure_constant_I,
)
from cga_invariants.services.jet import JetCoord, LaurentPoly
from cga_invariants.services.prolong import ProlongedField, VectorField, bracket, prolong2

logger = logging.getLogger(__name__)

CENTRAL_SIGN_PRINTED = 1


def _t(power: int = 1) -> LaurentPoly:
    return LaurentPoly.var(JetCoord.t(), power)


def _x(k: int, power: int = 1) -> LaurentPoly:
    return LaurentPoly.var(JetCoord.x(k), power)


def _u() -> LaurentPoly:
    return LaurentPoly.var(JetCoord.u())


def p_name(n: int) -> str:
    return f"P{n}"


def p_index(name: str) -> int | None:
    """n for a name "P<n>", else None."""
    if name.startswith("P") and name[1:].isdigit():
        return int(name[1:])
    return None


@dataclass(frozen=True)
class GeneratorSet:
    """The 2ell+5 generators of the realization for one ell."""

    ell: HalfInt
    M: VectorField
    D: VectorField
    H: VectorField
    C: VectorField
    P: dict[int, VectorField] = field(default_factory=dict)

    def names(self) -> list[str]:
        return ["M", "D", "H", "C"] + [p_name(n) for n in sorted(self.P)]

    def by_name(self, name: str) -> VectorField:
        n = p_index(name)
        if n is not None:
            if n not in self.P:
                raise KeyError(f"No generator {name} for ell={self.ell}")
            return self.P[n]
        if name not in ("M", "D", "H", "C"):
            raise KeyError(f"Unknown generator {name}")
        vector_field: VectorField = getattr(self, name)
        return vector_field

    def items(self) -> Iterator[tuple[str, VectorField]]:
        for name in self.names():
            yield name, self.by_name(name)


def build_translation(n: int, ell: HalfInt) -> VectorField:
    """
    Translation P^(n) of the realization.

    Args:
        n: Index, 1 <= n <= 2ell + 1
        ell: Half-integer label of the algebra

    Returns:
        The vector field on (t, x_1..x_K, U)

    Raises:
        ValueError: If n is out of range
    """
    K = ell.K
    if not 1 <= n <= ell.twice_value + 1:
        raise ValueError(f"P^({n}) does not exist for ell={ell}")
    xi = {k: _t(n - k) * binomial(n - 1, k - 1) for k in range(1, min(n, K) + 1)}
    eta = LaurentPoly.zero()
    for k in range(K + 1, n + 1):
        coef = binomial(n - 1, k - 1) * structure_constant_I(k - 1, ell)
        eta = eta - _t(n - k) * _x(ell.twice_value + 2 - k) * _u() * coef
    return VectorField(K, xi, eta)


@lru_cache(maxsize=None)
def build_generators(ell: HalfInt) -> GeneratorSet:
    """The realization of the algebra on (t, x_1..x_K, U)."""
    K = ell.K
    # 2(ell + 1 - k), kept integral
    dilation = {k: ell.twice_value + 2 - 2 * k for k in range(1, K + 1)}

    M = VectorField(K, {}, _u())
    D = VectorField(K, {0: _t() * 2, **{k: _x(k) * dilation[k] for k in range(1, K + 1)}})
    H = VectorField(K, {0: LaurentPoly.one()})

    c_xi = {0: _t(2)}
    for k in range(1, K + 1):
        c_xi[k] = _t() * _x(k) * dilation[k]
    for k in range(1, K):
        c_xi[k + 1] = c_xi[k + 1] + _x(k) * lambda_k(k, ell)
    C = VectorField(K, c_xi, -_x(K, 2) * _u() * (b_ell(ell) / 2))

    P = {n: build_translation(n, ell) for n in range(1, ell.twice_value + 2)}
    logger.info(f"Built {ell.generator_count} generators for ell={ell}")
    return GeneratorSet(ell, M, D, H, C, P)


@lru_cache(maxsize=None)
def prolonged_generators(ell: HalfInt) -> dict[str, ProlongedField]:
    """Second prolongations of every generator, keyed by name."""
    return {name: prolong2(vf) for name, vf in build_generators(ell).items()}


def expected_bracket(
    first: str, second: str, ell: HalfInt, central_sign: int = CENTRAL_SIGN_PRINTED
) -> dict[str, Fraction]:
    """[first, second] from the defining relations, as {generator name: coefficient}."""
    top = ell.twice_value + 1
    for name in (first, second):
        n = p_index(name)
        if n is None and name not in ("M", "D", "H", "C"):
            raise KeyError(f"Unknown generator {name}")
        if n is not None and not 1 <= n <= top:
            raise KeyError(f"No generator {name} for ell={ell}")

    direct = _bracket_relation(first, second, ell, central_sign)
    if direct is not None:
        return direct
    swapped = _bracket_relation(second, first, ell, central_sign)
    if swapped is not None:
        return {name: -coef for name, coef in swapped.items()}
    return {}


def _bracket_relation(
    first: str, second: str, ell: HalfInt, central_sign: int
) -> dict[str, Fraction] | None:
    """The relation as listed (None when the pair is not listed in this order)."""
    m = p_index(first)
    n = p_index(second)
    twice = ell.twice_value

    def term(name: str, coef: int | Fraction) -> dict[str, Fraction]:
        coef = Fraction(coef)
        return {name: coef} if coef else {}

    if "M" in (first, second) or first == second:
        return {}
    if (first, second) == ("D", "H"):
        return term("H", -2)
    if (first, second) == ("D", "C"):
        return term("C", 2)
    if (first, second) == ("H", "C"):
        return term("D", 1)
    if n is not None:
        if first == "H":
            return term(p_name(n - 1), n - 1) if n > 1 else {}
        if first == "D":
            # 2(n - 1 - ell)
            return term(p_name(n), 2 * n - 2 - twice)
        if first == "C":
            return term(p_name(n + 1), n - 1 - twice) if n <= twice else {}
        if m is not None:
            if m + n == twice + 2:
                return term("M", -central_sign * structure_constant_I(m - 1, ell))
            return {}
    return None


def combine(generators: GeneratorSet, coefficients: dict[str, Fraction]) -> VectorField:
    """sum_g coefficients[g] * g"""
    out = VectorField(generators.ell.K)
    for name, coef in coefficients.items():
        out = out + generators.by_name(name).scale(coef)
    return out


def _to_sympy(value: Fraction) -> Rational:
    return Rational(value.numerator, value.denominator)


def decompose(
    vector_field: VectorField, generators: GeneratorSet
) -> dict[str, Fraction] | None:
    """
    Write a field as a constant-coefficient combination of the generators.

    Solved exactly by row reduction over the rationals.

    Args:
        vector_field: Field to decompose
        generators: Realization whose span is searched

    Returns:
        Generator name to nonzero coefficient, or None when the field lies
        outside the span
    """
    names = generators.names()
    fields = [generators.by_name(name) for name in names]
    rows: dict[tuple[str, object], list[Fraction]] = {}
    target: dict[tuple[str, object], Fraction] = {}

    def collect(coord_name: str, poly: LaurentPoly, column: int | None) -> None:
        for mono, coef in poly.items():
            key = (coord_name, mono)
            rows.setdefault(key, [Fraction(0)] * len(names))
            if column is None:
                target[key] = coef
            else:
                rows[key][column] += coef

    for column, gen in enumerate(fields):
        for coord, poly in gen.components():
            collect(coord.name, poly, column)
    for coord, poly in vector_field.components():
        collect(coord.name, poly, None)

    if not rows:
        return {}
    keys = list(rows)
    augmented = Matrix(
        [
            [_to_sympy(c) for c in rows[key]] + [_to_sympy(target.get(key, Fraction(0)))]
            for key in keys
        ]
    )
    reduced, pivots = augmented.rref()
    if len(names) in pivots:
        return None
    solution: dict[str, Fraction] = {}
    for row, column in enumerate(pivots):
        value = reduced[row, len(names)]
        if value != 0:
            solution[names[column]] = Fraction(int(value.p), int(value.q))
    if not (combine(generators, solution) - vector_field).is_zero:
        return None
    return solution


@dataclass(frozen=True)
class BracketCheck:
    """One computed bracket compared with the defining relations."""

    first: str
    second: str
    computed: VectorField
    decomposition: dict[str, Fraction] | None
    expected: dict[str, Fraction]
    match: bool
    central: bool


@dataclass(frozen=True)
class CommutationTable:
    ell: HalfInt
    central_sign: int
    checks: list[BracketCheck]

    @property
    def all_match(self) -> bool:
        return all(check.match for check in self.checks)


def infer_central_sign(ell: HalfInt) -> int:
    """
    Sign s such that [P^(m), P^(n)] = -s I_{m-1} M holds in the realization.

    The sign is read off the first nonzero [P, P] bracket in table order,
    [P1, P^(2ell+1)].

    Args:
        ell: Half-integer label of the algebra

    Returns:
        1 when the realization reproduces the printed central term, else -1

    Raises:
        CGAError: If no [P, P] bracket is nonzero
    """
    gens = build_generators(ell)
    top = ell.twice_value + 1
    for m in range(1, top + 1):
        for n in range(m + 1, top + 1):
            computed = bracket(gens.by_name(p_name(m)), gens.by_name(p_name(n)))
            if computed.is_zero:
                continue
            central = (decompose(computed, gens) or {}).get("M", Fraction(0))
            printed = -structure_constant_I(m - 1, ell)
            if central not in (printed, -printed):
                logger.error(f"[P{m}, P{n}] has central part {central}, expected +/-{printed}")
            return 1 if central == printed else -1
    raise CGAError(f"No nonzero [P, P] bracket at ell={ell}")


def verify_commutation_table(ell: HalfInt, central_sign: int | None = None) -> CommutationTable:
    """
    Compute [g_i, g_j] for every unordered pair and compare with the relations.

    Args:
        ell: Half-integer label of the algebra
        central_sign: Sign applied to every central term; None infers it
            from the realization

    Returns:
        One check per pair, in generator order
    """
    if central_sign is None:
        central_sign = infer_central_sign(ell)
    gens = build_generators(ell)
    names = gens.names()
    checks = []
    for i, first in enumerate(names):
        for second in names[i + 1 :]:
            computed = bracket(gens.by_name(first), gens.by_name(second))
            expected = expected_bracket(first, second, ell, central_sign)
            match = (computed - combine(gens, expected)).is_zero
            decomposition = expected if match else decompose(computed, gens)
            m, n = p_index(first), p_index(second)
            central = m is not None and n is not None and m + n == ell.twice_value + 2
            if not match:
                logger.warning(f"[{first}, {second}] does not match the relations at ell={ell}")
            checks.append(
                BracketCheck(first, second, computed, decomposition, expected, match, central)
            )
    table = CommutationTable(ell, central_sign, checks)
    logger.info(
        f"Verified {len(checks)} brackets at ell={ell}: "
        f"{sum(c.match for c in checks)} match, central sign {central_sign}"
    )
    return table
