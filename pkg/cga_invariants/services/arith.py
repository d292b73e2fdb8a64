"""Exact rationals, half-integer labels and the combinatorial constants of the algebra."""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from math import factorial as _factorial

from cga_invariants.exceptions import IndexRangeError, InvalidHalfIntError

Rat = Fraction


def parse_rat(text: str) -> Fraction:
    """Parse "p" or "p/q" into a reduced rational."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"Invalid rational: {text!r}") from e


def format_rat(value: Fraction | int) -> str:
    """Format as "p" when integral, else "p/q"."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True, order=True)
class HalfInt:
    """A half-integer ell >= 3/2, stored as its odd double."""

    twice_value: int

    def __post_init__(self) -> None:
        if self.twice_value % 2 == 0 or self.twice_value < 3:
            raise InvalidHalfIntError(
                f"ell must be a half-integer >= 3/2, got {self.twice_value}/2"
            )

    @classmethod
    def parse(cls, text: str) -> "HalfInt":
        """
        Parse "5/2" style text, or an equivalent decimal such as "2.5".

        Args:
            text: ell as p/2 or a decimal

        Returns:
            The parsed label

        Raises:
            InvalidHalfIntError: If the text is not a half-integer >= 3/2
        """
        try:
            value = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise InvalidHalfIntError(f"Invalid ell: {text!r}") from e
        doubled = 2 * value
        if doubled.denominator != 1:
            raise InvalidHalfIntError(f"ell must be a half-integer, got {text!r}")
        return cls(doubled.numerator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice_value, 2)

    @property
    def K(self) -> int:
        """ell + 1/2: the number of spatial coordinates x_1..x_K."""
        return (self.twice_value + 1) // 2

    @property
    def generator_count(self) -> int:
        """2*ell + 5 generators: M, D, H, C and P^(1..2ell+1)."""
        return self.twice_value + 5

    def __str__(self) -> str:
        return f"{self.twice_value}/2"


def factorial(n: int) -> int:
    if n < 0:
        raise IndexRangeError(f"factorial of negative number {n}")
    return _factorial(n)


def binomial(n: int, k: int) -> int:
    """Binomial coefficient, zero outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def structure_constant_I(m: int, ell: HalfInt) -> Fraction:
    """
    I_m = (-1)^(m + ell + 1/2) (2ell - m)! m!

    Args:
        m: Index, 0 <= m <= 2ell
        ell: Half-integer label of the algebra

    Returns:
        The structure constant, an integer

    Raises:
        IndexRangeError: If m is outside 0..2ell
    """
    if not 0 <= m <= ell.twice_value:
        raise IndexRangeError(f"I_m needs 0 <= m <= {ell.twice_value}, got m={m}")
    sign = -1 if (m + ell.K) % 2 else 1
    return Fraction(sign * factorial(ell.twice_value - m) * factorial(m))


@lru_cache(maxsize=None)
def a_ell(ell: HalfInt) -> Fraction:
    """((ell - 1/2)!)^2"""
    return Fraction(factorial(ell.K - 1) ** 2)


@lru_cache(maxsize=None)
def b_ell(ell: HalfInt) -> Fraction:
    """((ell + 1/2)!)^2"""
    return Fraction(factorial(ell.K) ** 2)


def lambda_k(k: int, ell: HalfInt) -> Fraction:
    """
    lambda_k = 2ell + 1 - k

    Args:
        k: Index, 1 <= k <= 2ell
        ell: Half-integer label of the algebra

    Returns:
        lambda_k as a rational

    Raises:
        IndexRangeError: If k is outside 1..2ell
    """
    if not 1 <= k <= ell.twice_value:
        raise IndexRangeError(f"lambda_k needs 1 <= k <= {ell.twice_value}, got k={k}")
    return Fraction(ell.twice_value + 1 - k)
