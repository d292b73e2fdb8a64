"""Tests for vector fields, brackets and second prolongation."""

import pytest

from cga_invariants.services.arith import HalfInt
from cga_invariants.services.cga import build_generators, prolonged_generators
from cga_invariants.services.jet import JetCoord, LaurentPoly, RatExpr
from cga_invariants.services.prolong import (
    ProlongedField,
    VectorField,
    bracket,
    prolong2,
    prolong_rho,
    prolong_sigma,
    sigma_eta_terms,
    sigma_xi_first_sum,
    sigma_xi_mixed_sum,
    sigma_xi_second_sum,
    sigma_xi_u_sum,
    weight_eigenvalue,
)


def var(coord):
    return LaurentPoly.var(coord)


t = var(JetCoord.t())
x1 = var(JetCoord.x(1))
x2 = var(JetCoord.x(2))
u = var(JetCoord.u())
U0, U1, U2 = (var(JetCoord.du(mu)) for mu in range(3))

BASE_2D = [JetCoord.t(), JetCoord.x(1), JetCoord.u()]


def ddu(mu, nu):
    return var(JetCoord.ddu(mu, nu))


def _t_free(field: ProlongedField) -> bool:
    return all(JetCoord.t() not in p.symbols() for p in field.coefficients.values())


def random_coefficient(rng, max_exp=2):
    out = LaurentPoly.zero()
    for _ in range(2):
        exponents = {c: rng.randint(0, max_exp) for c in BASE_2D}
        out = out + LaurentPoly.from_exponents(rng.randint(-3, 3), exponents)
    return out


def random_field(rng, max_exp=2):
    """A field on (t, x1, U) whose xi may depend on U."""
    return VectorField(
        1,
        {0: random_coefficient(rng, max_exp), 1: random_coefficient(rng, max_exp)},
        random_coefficient(rng, max_exp),
    )


def total_derivative(poly, mu):
    """D_mu on functions of (t, x1, U, U_0, U_1)."""
    out = poly.partial(JetCoord.x(mu)) + poly.partial(JetCoord.u()) * var(JetCoord.du(mu))
    for tau in range(2):
        out = out + poly.partial(JetCoord.du(tau)) * ddu(mu, tau)
    return out


@pytest.fixture
def p3_prolonged(ell_32):
    return prolong2(build_generators(ell_32).P[3])


class TestVectorField:
    """Test construction and the Lie bracket."""

    def test_rejects_jet_coefficients(self):
        """Test rejects jet coefficients."""
        with pytest.raises(ValueError):
            VectorField(2, {1: U1})

    def test_rejects_coordinate_beyond_dimension(self):
        """Test rejects coordinate beyond dimension."""
        with pytest.raises(ValueError):
            VectorField(2, {1: var(JetCoord.x(3))})

    def test_apply(self, ell_32):
        """Test a field acting on a base polynomial."""
        P2 = build_generators(ell_32).P[2]
        assert P2.apply(t * var(JetCoord.x(1)) + x2**2) == t**2 + x2 * 2

    def test_bracket_antisymmetric(self, ell_32):
        """Test bracket antisymmetric."""
        gens = build_generators(ell_32)
        first, second = gens.C, gens.P[2]
        assert (bracket(first, second) + bracket(second, first)).is_zero

    def test_jacobi_identity(self, ell_32, rng):
        """Test jacobi identity."""
        gens = build_generators(ell_32)
        fields = [vf for _, vf in gens.items()]

        def combination():
            out = VectorField(ell_32.K)
            for vf in rng.sample(fields, 2):
                out = out + vf.scale(rng.randint(-3, 3))
            return out

        for _ in range(1000):
            a, b, c = combination(), combination(), combination()
            total = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
            assert total.is_zero

    @pytest.mark.parametrize("twice", [5, 7, 9])
    def test_jacobi_identity_higher_ell(self, twice, rng):
        """Test the Jacobi identity on random generator combinations at larger ell."""
        ell = HalfInt(twice)
        fields = [vf for _, vf in build_generators(ell).items()]

        def combination():
            out = VectorField(ell.K)
            for vf in rng.sample(fields, 2):
                out = out + vf.scale(rng.randint(-3, 3))
            return out

        for _ in range(250):
            a, b, c = combination(), combination(), combination()
            total = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, bracket(a, b))
            assert total.is_zero


class TestProlongation:
    """Test the prolongation coefficients against hand computation."""

    def test_m_scales_every_dependent_coordinate(self, ell_32):
        """Test m scales every dependent coordinate."""
        m_hat = prolonged_generators(ell_32)["M"]
        assert m_hat.eta == u
        assert m_hat.rho(2) == U2
        assert m_hat.sigma(0, 1) == ddu(0, 1)

    def test_h_has_no_extension(self, ell_32):
        """Test h has no extension."""
        h_hat = prolonged_generators(ell_32)["H"]
        assert dict(h_hat.coefficients) == {JetCoord.t(): LaurentPoly.one()}

    def test_rho_of_p3(self, p3_prolonged):
        """Test rho of p3."""
        assert p3_prolonged.rho(0) == -x2 * U0 * 2 - t * U1 * 2 - U2 * 2
        assert p3_prolonged.rho(1) == -x2 * U1 * 2
        assert p3_prolonged.rho(2) == -u * 2 - x2 * U2 * 2

    def test_sigma_of_p3(self, p3_prolonged):
        """Test sigma of p3."""
        assert p3_prolonged.sigma(0, 0) == -x2 * ddu(0, 0) * 2 - U1 * 2 - t * ddu(0, 1) * 4 - ddu(0, 2) * 4
        assert p3_prolonged.sigma(2, 2) == -U2 * 4 - x2 * ddu(2, 2) * 2
        assert p3_prolonged.sigma(0, 2) == -U0 * 2 - x2 * ddu(0, 2) * 2 - t * ddu(1, 2) * 2 - ddu(2, 2) * 2

    def test_linearity(self, ell_32, rng):
        """Test prolongation is linear over constant coefficients."""
        fields = [vf for _, vf in build_generators(ell_32).items()]
        for _ in range(1000):
            first, second = rng.sample(fields, 2)
            a, b = rng.randint(-4, 4), rng.randint(-4, 4)
            combined = prolong2(first.scale(a) + second.scale(b))
            separate = prolong2(first).scale(a) + prolong2(second).scale(b)
            assert (combined - separate).is_zero

    def test_apply_is_a_derivation(self, ell_32, rng):
        """Test apply is a derivation."""
        operators = list(prolonged_generators(ell_32).values())
        coords = [JetCoord.t(), JetCoord.x(2), JetCoord.u(), JetCoord.du(0), JetCoord.ddu(1, 2)]
        for _ in range(1000):
            p = var(rng.choice(coords)) * rng.randint(1, 3) + var(rng.choice(coords))
            q = var(rng.choice(coords)) ** rng.randint(-1, 2) - rng.randint(0, 2)
            operator = rng.choice(operators)
            left = operator.apply_poly(p * q)
            right = operator.apply_poly(p) * q + p * operator.apply_poly(q)
            assert left == right

    def test_matches_total_derivative_recursion(self, rng):
        """Test rho and sigma against D_mu applied to eta and rho on random U-dependent fields."""
        for _ in range(300):
            field = random_field(rng)
            for mu in range(2):
                rho = total_derivative(field.eta, mu)
                for tau in range(2):
                    rho = rho - var(JetCoord.du(tau)) * total_derivative(field.xi_at(tau), mu)
                assert prolong_rho(field, mu) == rho
            for mu in range(2):
                for nu in range(mu, 2):
                    sigma = total_derivative(prolong_rho(field, mu), nu)
                    for tau in range(2):
                        sigma = sigma - ddu(mu, tau) * total_derivative(field.xi_at(tau), nu)
                    assert prolong_sigma(field, mu, nu) == sigma

    def test_bracket_homomorphism(self, rng):
        """Test the prolonged bracket equals the commutator of prolonged fields."""
        for _ in range(1000):
            first, second = random_field(rng, max_exp=1), random_field(rng, max_exp=1)
            lhs = prolong2(bracket(first, second))
            rhs = prolong2(first).commutator(prolong2(second))
            assert (lhs - rhs).is_zero

    def test_bracket_homomorphism_on_generators(self, ell_52):
        """Test the homomorphism on every pair of realized generators."""
        gens = list(build_generators(ell_52).items())
        prolonged = {name: prolong2(vf) for name, vf in gens}
        for i, (name_a, a) in enumerate(gens):
            for name_b, b in gens[i + 1 :]:
                lhs = prolong2(bracket(a, b))
                rhs = prolonged[name_a].commutator(prolonged[name_b])
                assert (lhs - rhs).is_zero, (name_a, name_b)


class TestSigmaGroups:
    """Test each group of sigma terms against hand expansions."""

    def test_xi_groups_with_u_dependent_spatial_component(self):
        """Test xi^1 = t x1 U on (t, x1) at the mixed index pair."""
        field = VectorField(1, {1: t * x1 * u})
        p0, p1 = U0, U1
        q01, q11 = ddu(0, 1), ddu(1, 1)
        assert sigma_eta_terms(field, 0, 1).is_zero
        assert sigma_xi_second_sum(field, 0, 1) == -u * p1
        assert sigma_xi_first_sum(field, 0, 1) == -(x1 * u * q11 + t * u * q01)
        assert sigma_xi_u_sum(field, 0, 1) == -t * x1 * (p1 * q01 * 2 + p0 * q11)
        assert sigma_xi_mixed_sum(field, 0, 1) == -x1 * p1**2 - t * p0 * p1
        assert prolong_sigma(field, 0, 1) == (
            -u * p1 - x1 * u * q11 - t * u * q01 - t * x1 * (p1 * q01 * 2 + p0 * q11) - x1 * p1**2 - t * p0 * p1
        )

    def test_eta_group(self):
        """Test eta = x1^2 U^2 on (t, x1) at the mixed index pair."""
        field = VectorField(1, {}, x1**2 * u**2)
        expected = x1 * u * U0 * 4 + x1**2 * u * ddu(0, 1) * 2 + x1**2 * U0 * U1 * 2
        assert sigma_eta_terms(field, 0, 1) == expected
        assert prolong_sigma(field, 0, 1) == expected

    def test_time_component_in_one_variable(self):
        """Test xi^0 = t^2 U^2 with no spatial coordinate."""
        field = VectorField(0, {0: t**2 * u**2})
        p, q = U0, ddu(0, 0)
        assert sigma_xi_second_sum(field, 0, 0) == -(u**2) * p * 2
        assert sigma_xi_first_sum(field, 0, 0) == -t * u**2 * q * 4
        assert sigma_xi_u_sum(field, 0, 0) == -(t**2) * u * p * q * 6
        assert sigma_xi_mixed_sum(field, 0, 0) == -t * u * p**2 * 8 - t**2 * p**3 * 2
        xi = t**2 * u**2
        d_t_xi = xi.partial(JetCoord.t()) + xi.partial(JetCoord.u()) * p
        d_tt_xi = (
            d_t_xi.partial(JetCoord.t()) + d_t_xi.partial(JetCoord.u()) * p + d_t_xi.partial(JetCoord.du(0)) * q
        )
        assert prolong_sigma(field, 0, 0) == -p * d_tt_xi - q * d_t_xi * 2


class TestProlongedField:
    """Test operator algebra on the jet space."""

    def test_restriction_and_taylor(self, ell_32):
        """Test restriction and taylor."""
        p3 = prolonged_generators(ell_32)["P3"]
        assert (p3.restrict_t0() - p3.taylor_coefficient_t(0)).is_zero
        assert _t_free(p3.restrict_t0())

    @pytest.mark.parametrize("twice", [3, 5, 7])
    def test_restriction_matches_zeroth_taylor_coefficient(self, twice):
        """Test t = 0 restriction and the t^0 coefficient agree for every generator."""
        for name, operator in prolonged_generators(HalfInt(twice)).items():
            restricted = operator.restrict_t0()
            assert (restricted - operator.taylor_coefficient_t(0)).is_zero, name
            assert _t_free(restricted), name

    def test_apply_obeys_product_and_quotient_rules(self, ell_32, rng):
        """Test F(ab) and F(a/b) on quotients with non-monomial denominators."""
        operators = list(prolonged_generators(ell_32).values())
        coords = [JetCoord.t(), JetCoord.x(2), JetCoord.u(), JetCoord.du(0), JetCoord.du(1), JetCoord.ddu(1, 2)]

        def quotient():
            first, second = rng.sample(coords, 2)
            num = var(rng.choice(coords)) * rng.randint(1, 3) - rng.randint(0, 2)
            den = var(first) + var(second) * rng.randint(1, 3) + rng.randint(1, 2)
            return RatExpr(num, den)

        for _ in range(1000):
            a, b = quotient(), quotient()
            operator = rng.choice(operators)
            fa, fb = operator.apply(a), operator.apply(b)
            assert operator.apply(a * b).equals(fa * b + a * fb)
            assert operator.apply(a / b).equals((fa * b - a * fb) / (b * b))

    def test_residual_of_quotient(self, ell_32):
        """Test residual of quotient."""
        m_hat = prolonged_generators(ell_32)["M"]
        ratio = RatExpr(U1 * u + U2**2, u**2 + U0 * u)
        residual = m_hat.residual(ratio)
        assert residual.is_zero
        assert residual.peak_terms >= 2

    def test_residual_nonzero(self, ell_32):
        """Test residual nonzero."""
        d_hat = prolonged_generators(ell_32)["D"]
        assert not d_hat.annihilates(RatExpr(U1, U0 + U2))

    def test_without(self, ell_32):
        """Test dropping a coordinate from an operator."""
        c_hat = prolonged_generators(ell_32)["C"]
        assert JetCoord.t() not in c_hat.without(JetCoord.t()).coefficients


class TestWeights:
    """Test eigenvalues of the prolonged dilation."""

    def test_first_derivative_ratio(self, ell_32):
        """Test first derivative ratio."""
        d_hat = prolonged_generators(ell_32)["D"]
        assert weight_eigenvalue(U1 * u**-1, d_hat) == -3
        assert weight_eigenvalue(U2 * u**-1, d_hat) == -1

    def test_not_an_eigenfunction(self, ell_32):
        """Test not an eigenfunction."""
        d_hat = prolonged_generators(ell_32)["D"]
        assert weight_eigenvalue(U1 + U2, d_hat) is None

    def test_quotient(self, ell_32):
        """Test the weight of a quotient of eigenfunctions."""
        d_hat = prolonged_generators(ell_32)["D"]
        assert weight_eigenvalue(RatExpr(U1 * U2, U0 + U2**2), d_hat) == -2
