"""Vector fields on (t, x, U), their Lie bracket and their second prolongation.

A ``VectorField`` acts on functions of the base coordinates. Its second
prolongation is a ``ProlongedField``: a first-order derivation on the jet
space given by one coefficient per coordinate. ProlongedFields are closed
under sums and under multiplication by polynomials, which is how the
auxiliary operators (restrictions, Taylor coefficients, C-tilde) are built.
"""

import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from cga_invariants.services.jet import (
    CoordKind,
    JetCoord,
    LaurentPoly,
    RatExpr,
    Scalar,
    proportionality_constant,
)

logger = logging.getLogger(__name__)

T = JetCoord.t()
U = JetCoord.u()


def _d(poly: LaurentPoly, *coords: JetCoord) -> LaurentPoly:
    for coord in coords:
        if poly.is_zero:
            break
        poly = poly.partial(coord)
    return poly


def _ux(mu: int) -> LaurentPoly:
    return LaurentPoly.var(JetCoord.du(mu))


def _uxx(mu: int, nu: int) -> LaurentPoly:
    return LaurentPoly.var(JetCoord.ddu(mu, nu))


def _check_base(poly: LaurentPoly, spatial_dim: int) -> None:
    for symbol in poly.symbols():
        if not isinstance(symbol, JetCoord) or not symbol.is_base:
            raise ValueError(f"Vector field coefficient depends on {symbol.name}")
        if symbol.kind is CoordKind.X and symbol.first > spatial_dim:
            raise ValueError(f"Coefficient uses {symbol.name} beyond x{spatial_dim}")


@dataclass(frozen=True)
class VectorField:
    """xi^0 d/dt + sum_k xi^k d/dx_k + eta d/dU, coefficients polynomial in (t, x, U)."""

    spatial_dim: int
    xi: Mapping[int, LaurentPoly] = field(default_factory=dict)
    eta: LaurentPoly = field(default_factory=LaurentPoly.zero)

    def __post_init__(self) -> None:
        cleaned: dict[int, LaurentPoly] = {}
        for mu, coef in self.xi.items():
            if not 0 <= mu <= self.spatial_dim:
                raise ValueError(f"xi index {mu} outside 0..{self.spatial_dim}")
            _check_base(coef, self.spatial_dim)
            if not coef.is_zero:
                cleaned[mu] = coef
        _check_base(self.eta, self.spatial_dim)
        object.__setattr__(self, "xi", dict(sorted(cleaned.items())))

    def xi_at(self, mu: int) -> LaurentPoly:
        return self.xi.get(mu, LaurentPoly.zero())

    def coefficient(self, coord: JetCoord) -> LaurentPoly:
        if coord.kind is CoordKind.X:
            return self.xi_at(coord.first)
        if coord.kind is CoordKind.U:
            return self.eta
        return LaurentPoly.zero()

    def components(self) -> Iterator[tuple[JetCoord, LaurentPoly]]:
        """Nonzero components in coordinate order."""
        for mu, coef in self.xi.items():
            yield JetCoord.x(mu), coef
        if not self.eta.is_zero:
            yield U, self.eta

    @property
    def is_zero(self) -> bool:
        return not self.xi and self.eta.is_zero

    def apply(self, poly: LaurentPoly) -> LaurentPoly:
        """Act on a function of the base coordinates."""
        out = LaurentPoly.zero()
        for coord, coef in self.components():
            partial = poly.partial(coord)
            if not partial.is_zero:
                out = out + coef * partial
        return out

    def _combine(self, other: "VectorField", sign: int) -> "VectorField":
        if other.spatial_dim != self.spatial_dim:
            raise ValueError("Vector fields live on different spaces")
        xi = {mu: self.xi_at(mu) + other.xi_at(mu) * sign for mu in range(self.spatial_dim + 1)}
        return VectorField(self.spatial_dim, xi, self.eta + other.eta * sign)

    def __add__(self, other: "VectorField") -> "VectorField":
        return self._combine(other, 1)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self._combine(other, -1)

    def __neg__(self) -> "VectorField":
        return self.scale(-1)

    def scale(self, factor: Scalar | LaurentPoly) -> "VectorField":
        return VectorField(
            self.spatial_dim,
            {mu: coef * factor for mu, coef in self.xi.items()},
            self.eta * factor,
        )


def bracket(first: VectorField, second: VectorField) -> VectorField:
    """Lie bracket [X, Y] with coefficients X(coef_Y) - Y(coef_X)."""
    if first.spatial_dim != second.spatial_dim:
        raise ValueError("Vector fields live on different spaces")
    xi = {
        mu: first.apply(second.xi_at(mu)) - second.apply(first.xi_at(mu))
        for mu in range(first.spatial_dim + 1)
    }
    eta = first.apply(second.eta) - second.apply(first.eta)
    return VectorField(first.spatial_dim, xi, eta)


@dataclass(frozen=True)
class Residual:
    """Outcome of applying an operator to an expression.

    ``numerator`` vanishes exactly when the operator annihilates the
    expression; ``peak_terms`` is the largest intermediate polynomial size.
    """

    numerator: LaurentPoly
    peak_terms: int

    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero


@dataclass(frozen=True)
class ProlongedField:
    """A first-order derivation on the jet space, one coefficient per coordinate."""

    spatial_dim: int
    coefficients: Mapping[JetCoord, LaurentPoly]
    base: VectorField | None = None

    def __post_init__(self) -> None:
        cleaned = {c: p for c, p in self.coefficients.items() if not p.is_zero}
        object.__setattr__(
            self, "coefficients", dict(sorted(cleaned.items(), key=lambda item: item[0].sort_key))
        )

    def coefficient(self, coord: JetCoord) -> LaurentPoly:
        return self.coefficients.get(coord, LaurentPoly.zero())

    def xi_at(self, mu: int) -> LaurentPoly:
        return self.coefficient(JetCoord.x(mu))

    @property
    def eta(self) -> LaurentPoly:
        return self.coefficient(U)

    def rho(self, mu: int) -> LaurentPoly:
        return self.coefficient(JetCoord.du(mu))

    def sigma(self, mu: int, nu: int) -> LaurentPoly:
        return self.coefficient(JetCoord.ddu(mu, nu))

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def _combine(self, other: "ProlongedField", sign: int) -> "ProlongedField":
        if other.spatial_dim != self.spatial_dim:
            raise ValueError("Operators live on different jet spaces")
        coefficients = dict(self.coefficients)
        for coord, coef in other.coefficients.items():
            coefficients[coord] = coefficients.get(coord, LaurentPoly.zero()) + coef * sign
        return ProlongedField(self.spatial_dim, coefficients)

    def __add__(self, other: "ProlongedField") -> "ProlongedField":
        return self._combine(other, 1)

    def __sub__(self, other: "ProlongedField") -> "ProlongedField":
        return self._combine(other, -1)

    def __neg__(self) -> "ProlongedField":
        return self.scale(-1)

    def scale(self, factor: Scalar | LaurentPoly) -> "ProlongedField":
        """Multiply every coefficient by a constant or a polynomial."""
        return ProlongedField(
            self.spatial_dim, {c: coef * factor for c, coef in self.coefficients.items()}
        )

    def without(self, coord: JetCoord) -> "ProlongedField":
        """Drop the component along ``coord``."""
        return ProlongedField(
            self.spatial_dim, {c: p for c, p in self.coefficients.items() if c != coord}
        )

    def restrict_t0(self) -> "ProlongedField":
        """Evaluate every coefficient at t = 0."""
        return ProlongedField(
            self.spatial_dim, {c: p.substitute(T, 0) for c, p in self.coefficients.items()}
        )

    def taylor_coefficient_t(self, power: int) -> "ProlongedField":
        """Coefficient of t**power in the expansion of every coefficient."""
        return ProlongedField(
            self.spatial_dim,
            {c: p.coefficient_of_power(T, power) for c, p in self.coefficients.items()},
        )

    def apply_poly(self, poly: LaurentPoly) -> LaurentPoly:
        out = LaurentPoly.zero()
        for symbol in poly.symbols():
            if not isinstance(symbol, JetCoord):
                raise ValueError(f"Cannot differentiate along placeholder {symbol.name}")
            coef = self.coefficients.get(symbol)
            if coef is not None:
                out = out + coef * poly.partial(symbol)
        return out

    def apply(self, expr: RatExpr) -> RatExpr:
        """The image F(n/d) = (F(n) d - n F(d)) / d^2."""
        image_num = self.apply_poly(expr.num)
        if expr.is_polynomial:
            return RatExpr(image_num)
        image_den = self.apply_poly(expr.den)
        return RatExpr(image_num * expr.den - expr.num * image_den, expr.den * expr.den)

    def residual(self, expr: RatExpr) -> Residual:
        """Numerator of F(expr) up to a nonzero factor."""
        image_num = self.apply_poly(expr.num)
        peak = max(len(expr.num), len(image_num))
        if expr.is_polynomial:
            return Residual(image_num, peak)
        image_den = self.apply_poly(expr.den)
        peak = max(peak, len(expr.den), len(image_den))
        if image_den.is_zero:
            return Residual(image_num, peak)
        kappa = proportionality_constant(image_den, expr.den)
        if kappa is not None:
            return Residual(image_num - expr.num * kappa, peak)
        left = image_num * expr.den
        right = expr.num * image_den
        return Residual(left - right, max(peak, len(left), len(right)))

    def commutator(self, other: "ProlongedField") -> "ProlongedField":
        """
        Bracket of two derivations on the jet space.

        The component along a coordinate c is F(G_c) - G(F_c).

        Args:
            other: Second operator G, on the same jet space

        Returns:
            The operator [F, G]

        Raises:
            ValueError: If the operators live on different jet spaces
        """
        if other.spatial_dim != self.spatial_dim:
            raise ValueError("Operators live on different jet spaces")
        coords = set(self.coefficients) | set(other.coefficients)
        return ProlongedField(
            self.spatial_dim,
            {
                c: self.apply_poly(other.coefficient(c)) - other.apply_poly(self.coefficient(c))
                for c in coords
            },
        )

    def annihilates(self, expr: RatExpr | LaurentPoly) -> bool:
        if isinstance(expr, LaurentPoly):
            return self.apply_poly(expr).is_zero
        return self.residual(expr).is_zero


def prolong2(vector_field: VectorField) -> ProlongedField:
    """
    Second prolongation of a point vector field.

    Args:
        vector_field: Field on (t, x_1..x_K, U)

    Returns:
        The operator with xi, eta, rho^mu on U_mu and sigma^{mu nu} on U_mu,nu
    """
    dim = vector_field.spatial_dim
    coefficients: dict[JetCoord, LaurentPoly] = {c: p for c, p in vector_field.components()}
    for mu in range(dim + 1):
        coefficients[JetCoord.du(mu)] = prolong_rho(vector_field, mu)
    for mu in range(dim + 1):
        for nu in range(mu, dim + 1):
            coefficients[JetCoord.ddu(mu, nu)] = prolong_sigma(vector_field, mu, nu)
    return ProlongedField(dim, coefficients, base=vector_field)


def prolong_rho(vector_field: VectorField, mu: int) -> LaurentPoly:
    """rho^mu = eta_mu + eta_U U_mu - sum_nu U_nu (xi^nu_mu + xi^nu_U U_mu)."""
    x_mu = JetCoord.x(mu)
    eta = vector_field.eta
    out = _d(eta, x_mu) + _d(eta, U) * _ux(mu)
    for nu, xi_nu in vector_field.xi.items():
        out = out - _ux(nu) * (_d(xi_nu, x_mu) + _d(xi_nu, U) * _ux(mu))
    return out


def prolong_sigma(vector_field: VectorField, mu: int, nu: int) -> LaurentPoly:
    return (
        sigma_eta_terms(vector_field, mu, nu)
        + sigma_xi_second_sum(vector_field, mu, nu)
        + sigma_xi_first_sum(vector_field, mu, nu)
        + sigma_xi_u_sum(vector_field, mu, nu)
        + sigma_xi_mixed_sum(vector_field, mu, nu)
    )


def sigma_eta_terms(vector_field: VectorField, mu: int, nu: int) -> LaurentPoly:
    """eta_mu,nu + eta_mu,U U_nu + eta_nu,U U_mu + eta_U U_mu,nu + eta_UU U_mu U_nu"""
    eta = vector_field.eta
    x_mu, x_nu = JetCoord.x(mu), JetCoord.x(nu)
    return (
        _d(eta, x_mu, x_nu)
        + _d(eta, x_mu, U) * _ux(nu)
        + _d(eta, x_nu, U) * _ux(mu)
        + _d(eta, U) * _uxx(mu, nu)
        + _d(eta, U, U) * _ux(mu) * _ux(nu)
    )


def sigma_xi_second_sum(vector_field: VectorField, mu: int, nu: int) -> LaurentPoly:
    """-sum_tau xi^tau_mu,nu U_tau"""
    x_mu, x_nu = JetCoord.x(mu), JetCoord.x(nu)
    out = LaurentPoly.zero()
    for tau, xi_tau in vector_field.xi.items():
        out = out - _d(xi_tau, x_mu, x_nu) * _ux(tau)
    return out


def sigma_xi_first_sum(vector_field: VectorField, mu: int, nu: int) -> LaurentPoly:
    """-sum_tau (xi^tau_mu U_nu,tau + xi^tau_nu U_mu,tau)"""
    x_mu, x_nu = JetCoord.x(mu), JetCoord.x(nu)
    out = LaurentPoly.zero()
    for tau, xi_tau in vector_field.xi.items():
        out = out - (_d(xi_tau, x_mu) * _uxx(nu, tau) + _d(xi_tau, x_nu) * _uxx(mu, tau))
    return out


def sigma_xi_u_sum(vector_field: VectorField, mu: int, nu: int) -> LaurentPoly:
    """-sum_tau xi^tau_U (U_tau U_mu,nu + U_mu U_nu,tau + U_nu U_mu,tau)"""
    out = LaurentPoly.zero()
    for tau, xi_tau in vector_field.xi.items():
        xi_u = _d(xi_tau, U)
        if xi_u.is_zero:
            continue
        out = out - xi_u * (
            _ux(tau) * _uxx(mu, nu) + _ux(mu) * _uxx(nu, tau) + _ux(nu) * _uxx(mu, tau)
        )
    return out


def sigma_xi_mixed_sum(vector_field: VectorField, mu: int, nu: int) -> LaurentPoly:
    """-sum_tau (xi^tau_mu,U U_nu + xi^tau_nu,U U_mu + xi^tau_UU U_mu U_nu) U_tau"""
    x_mu, x_nu = JetCoord.x(mu), JetCoord.x(nu)
    out = LaurentPoly.zero()
    for tau, xi_tau in vector_field.xi.items():
        if _d(xi_tau, U).is_zero:
            continue
        inner = (
            _d(xi_tau, x_mu, U) * _ux(nu)
            + _d(xi_tau, x_nu, U) * _ux(mu)
            + _d(xi_tau, U, U) * _ux(mu) * _ux(nu)
        )
        out = out - inner * _ux(tau)
    return out


def weight_eigenvalue(expr: RatExpr | LaurentPoly, operator: ProlongedField) -> Fraction | None:
    """kappa with F(expr) = kappa * expr, or None when expr is not an eigenfunction."""
    if isinstance(expr, LaurentPoly):
        expr = RatExpr(expr)
    if expr.is_zero:
        return None
    image_num = operator.apply_poly(expr.num)
    image_den = operator.apply_poly(expr.den)
    kappa_num = proportionality_constant(image_num, expr.num)
    kappa_den = proportionality_constant(image_den, expr.den)
    if kappa_num is not None and kappa_den is not None:
        return kappa_num - kappa_den
    image = image_num * expr.den - expr.num * image_den
    target = expr.num * expr.den
    mono, coef = target.leading_term()
    kappa = image.coefficient(dict(mono)) / coef
    if (image - target * kappa).is_zero:
        return kappa
    return None
