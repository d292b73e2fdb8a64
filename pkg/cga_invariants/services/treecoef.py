"""Coefficients of the w_km expansions, generated by a weighted tree on index pairs.

A node is a pair (k, m) with 1 <= k <= m <= K, (k, m) != (K, K). Its children
and edge weights are:

- k < m < K: (k+1, m) with lambda_k/b and (k, m+1) with lambda_m/b
- k = m < K: (k, k+1) with 2 lambda_k/b
- m = K, k < K-1: (k+1, K) with lambda_k/b
- (K-1, K) is the leaf.

c_ab(k, m) is the sum over paths from (k, m) to (k+a, m+b) of the product
of edge weights; gamma(k, m) adds the final step off the leaf.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from cga_invariants.config import get_settings
from cga_invariants.exceptions import IndexRangeError
from cga_invariants.services.arith import HalfInt, b_ell, binomial, factorial, lambda_k

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class NodeLabel:
    k: int
    m: int


def validate_node(label: NodeLabel, ell: HalfInt) -> None:
    K = ell.K
    if not (1 <= label.k <= label.m <= K) or (label.k, label.m) == (K, K):
        raise IndexRangeError(f"({label.k}, {label.m}) is not a tree node for ell={ell}")


def all_nodes(ell: HalfInt) -> list[NodeLabel]:
    """Every node, in (k, m) order."""
    K = ell.K
    return [
        NodeLabel(k, m)
        for k in range(1, K + 1)
        for m in range(k, K + 1)
        if (k, m) != (K, K)
    ]


def children(label: NodeLabel, ell: HalfInt) -> list[tuple[NodeLabel, Fraction]]:
    validate_node(label, ell)
    K = ell.K
    b = b_ell(ell)
    k, m = label.k, label.m
    if m == K:
        if k == K - 1:
            return []
        return [(NodeLabel(k + 1, K), lambda_k(k, ell) / b)]
    if k == m:
        return [(NodeLabel(k, k + 1), 2 * lambda_k(k, ell) / b)]
    return [
        (NodeLabel(k + 1, m), lambda_k(k, ell) / b),
        (NodeLabel(k, m + 1), lambda_k(m, ell) / b),
    ]


@lru_cache(maxsize=None)
def _c(twice_ell: int, k: int, m: int, a: int, b: int) -> Fraction:
    if a < 0 or b < 0:
        return Fraction(0)
    if a == 0 and b == 0:
        return Fraction(1)
    ell = HalfInt(twice_ell)
    total = Fraction(0)
    for child, weight in children(NodeLabel(k, m), ell):
        total += weight * _c(twice_ell, child.k, child.m, a - (child.k - k), b - (child.m - m))
    return total


@lru_cache(maxsize=None)
def _gamma(twice_ell: int, k: int, m: int) -> Fraction:
    ell = HalfInt(twice_ell)
    K = ell.K
    if (k, m) == (K - 1, K):
        return lambda_k(K - 1, ell) / b_ell(ell)
    total = Fraction(0)
    for child, weight in children(NodeLabel(k, m), ell):
        total += weight * _gamma(twice_ell, child.k, child.m)
    return total


def coeff_c_recursive(k: int, m: int, a: int, b: int, ell: HalfInt) -> Fraction:
    """c_ab(k, m) by first-step recursion; 0 when (k+a, m+b) is unreachable."""
    validate_node(NodeLabel(k, m), ell)
    return _c(ell.twice_value, k, m, a, b)


def gamma_recursive(k: int, m: int, ell: HalfInt) -> Fraction:
    validate_node(NodeLabel(k, m), ell)
    return _gamma(ell.twice_value, k, m)


def coeff_c_paths(k: int, m: int, a: int, b: int, ell: HalfInt) -> Fraction:
    """
    c_ab(k, m) by enumerating every path; an independent oracle for small ell.

    Args:
        k, m: Root node
        a, b: Offset of the target node w_{k+a, m+b}
        ell: Half-integer label of the algebra

    Returns:
        Sum over root-to-target paths of the product of edge weights

    Raises:
        IndexRangeError: If (k, m) is not a tree node
        ValueError: If 2ell exceeds the configured path_oracle_max_twice_ell
    """
    root = NodeLabel(k, m)
    validate_node(root, ell)
    limit = get_settings().path_oracle_max_twice_ell
    if ell.twice_value > limit:
        raise ValueError(f"Path enumeration is limited to ell <= {limit}/2")
    target = NodeLabel(k + a, m + b)
    total = Fraction(0)
    stack: list[tuple[NodeLabel, Fraction]] = [(root, Fraction(1))]
    while stack:
        node, weight = stack.pop()
        if node == target:
            total += weight
            continue
        for child, edge in children(node, ell):
            if child.k <= target.k and child.m <= target.m:
                stack.append((child, weight * edge))
    return total


def valid_offsets(label: NodeLabel, ell: HalfInt) -> list[tuple[int, int]]:
    """(a, b) with a+b >= 1 whose w_{k+a, m+b} appears in the expansion of w_km."""
    K = ell.K
    k, m = label.k, label.m
    return [
        (a, b)
        for a in range(0, K - k)
        for b in range(0, K - m + 1)
        if a + b >= 1 and k + a <= m + b
    ]


def gamma_power(label: NodeLabel, ell: HalfInt) -> int:
    """Exponent 2ell + 2 - k - m of Phi in the trailing term of w_km."""
    return ell.twice_value + 2 - label.k - label.m


@dataclass(frozen=True)
class CoeffTable:
    """Every c_ab(k, m) and gamma(k, m) for one ell."""

    ell: HalfInt
    c: dict[tuple[int, int, int, int], Fraction]
    gamma: dict[tuple[int, int], Fraction]

    def expansion_coefficient(self, k: int, m: int, a: int, b: int) -> Fraction:
        """Coefficient of w_{k+a, m+b} Phi^(a+b) in w_km, i.e. c_ab / (a+b)!."""
        return self.c.get((k, m, a, b), Fraction(0)) / factorial(a + b)

    def trailing_coefficient(self, k: int, m: int) -> Fraction:
        """Coefficient of Phi^(2ell+2-k-m) in w_km, i.e. gamma / (2ell+2-k-m)!."""
        power = gamma_power(NodeLabel(k, m), self.ell)
        return self.gamma[(k, m)] / factorial(power)


@lru_cache(maxsize=None)
def build_coeff_table(ell: HalfInt) -> CoeffTable:
    """
    Compute every c_ab(k, m) and gamma(k, m) by memoized recursion.

    Args:
        ell: Half-integer label of the algebra

    Returns:
        The table, cached per ell
    """
    c: dict[tuple[int, int, int, int], Fraction] = {}
    gamma: dict[tuple[int, int], Fraction] = {}
    for node in all_nodes(ell):
        for a, b in valid_offsets(node, ell):
            c[(node.k, node.m, a, b)] = coeff_c_recursive(node.k, node.m, a, b, ell)
        gamma[(node.k, node.m)] = gamma_recursive(node.k, node.m, ell)
    logger.info(f"Built coefficient table for ell={ell}: {len(c)} c entries, {len(gamma)} gammas")
    return CoeffTable(ell, c, gamma)


@dataclass(frozen=True)
class ClosedFormRow:
    """Closed-form coefficients of w_kK: one per w_{k+n,K} Phi^n, then the Phi^(K+1-k) term."""

    k: int
    chain: dict[int, Fraction]
    trailing: Fraction


def closed_form_row(k: int, ell: HalfInt) -> ClosedFormRow:
    """w_kK = phi_kK - sum_n C(2ell+1-k, n) w_{k+n,K} (Phi/b)^n - C(2ell+1-k, K) Phi^(K+1-k) / (b^(K-k) (K+1-k))"""
    K = ell.K
    validate_node(NodeLabel(k, K), ell)
    b = b_ell(ell)
    top = ell.twice_value + 1 - k
    chain = {n: Fraction(binomial(top, n)) / b**n for n in range(1, K - k)}
    trailing = Fraction(binomial(top, K)) / (b ** (K - k) * (K + 1 - k))
    return ClosedFormRow(k, chain, trailing)
