"""Ramified Laurent series: arithmetic, truncation tracking, inversion."""

import random
from fractions import Fraction as F
from math import comb

import pytest

from satoquiver.coeffs import CycScalar, zeta_pow
from satoquiver.series import (
    NotInvertible,
    Series,
    ZeroScale,
    ZeroSeries,
    compose_polynomial,
    compositional_inverse,
    inverse_at_infinity,
    parse_series,
    principal_root,
    render_series,
)


def rat(v):
    return CycScalar.rational(F(v))


def S(*pairs):
    return Series.from_pairs(list(pairs))


QUINTIC = S((5, 1), (4, F(-14, 5)), (3, F(-2, 5)), (2, F(1599, 125)), (1, F(26836, 625)))


class TestConstruction:
    def test_zero_coeffs_dropped(self):
        s = S((2, 1), (1, 0))
        assert list(s.exponents()) == [2]

    def test_terms_below_trunc_dropped(self):
        s = S((2, 1), (-5, 3)).truncate(-3)
        assert list(s.exponents()) == [2]
        assert s.trunc_exp() == -3

    def test_ram_reduces(self):
        # z^(2/2) is just z
        s = Series.monomial(F(2, 2), 1)
        assert s.ram == 1
        assert s.coeff(1) == CycScalar.one(1)

    def test_ram_kept_when_needed(self):
        s = Series.monomial(F(1, 2), 1)
        assert s.ram == 2

    def test_mixing_ramifications(self):
        s = Series.monomial(F(1, 2), 1) + Series.monomial(F(1, 3), 1)
        assert s.ram == 6
        assert s.coeff(F(1, 2)) == CycScalar.one(1)
        assert s.coeff(F(1, 3)) == CycScalar.one(1)


class TestArith:
    def test_poly_product(self):
        assert (S((0, 1), (1, 1))) * (S((0, 1), (1, -1))) == S((0, 1), (2, -1))

    def test_truncated_add(self):
        a = S((0, 1), (-1, 1)).truncate(-3)
        b = S((1, 1), (-2, -1)).truncate(-3)
        c = a + b
        assert c == S((1, 1), (0, 1), (-1, 1), (-2, -1)).truncate(-3)
        assert c.trunc_exp() == -3

    def test_half_powers_multiply_to_integer(self):
        h = Series.monomial(F(1, 2), 1)
        p = h * h
        assert p.ram == 1
        assert p == S((1, 1))

    def test_mul_truncation_propagates(self):
        a = S((-1, 1)).truncate(-3)
        b = S((2, 1), (0, 1))
        assert (a * b).trunc_exp() == -1

    def test_mul_exact_times_exact_is_exact(self):
        assert ((S((3, 2)) * S((-1, F(1, 2))))).is_exact()

    def test_pow_binomial(self):
        p = S((0, 1), (1, 1)) ** 5
        for k in range(6):
            assert p.coeff(k) == rat(comb(5, k))

    def test_scalar_mul(self):
        assert S((2, 3)).scalar_mul(rat(F(1, 3))) == S((2, 1))


class TestDerivative:
    def test_monomial(self):
        assert S((3, 1)).derivative() == S((2, 3))

    def test_constant(self):
        assert S((0, 7)).derivative().is_zero()

    def test_truncation_lowers(self):
        d = S((-1, 1)).truncate(-4).derivative()
        assert d == S((-2, -1)).truncate(-5)

    def test_leibniz_random(self):
        rng = random.Random(4271)
        for _ in range(25):
            a = S(*[(rng.randint(-4, 5), F(rng.randint(-6, 6))) for _ in range(4)])
            b = S(*[(rng.randint(-4, 5), F(rng.randint(-6, 6))) for _ in range(4)])
            lhs = (a * b).derivative()
            rhs = a.derivative() * b + a * b.derivative()
            assert lhs == rhs


class TestScaleSubstitute:
    def test_even_power_invariant(self):
        assert S((2, 1)).scale_substitute(zeta_pow(2, 1)) == S((2, 1))

    def test_odd_power_flips(self):
        assert S((3, 1)).scale_substitute(zeta_pow(2, 1)) == S((3, -1))

    def test_round_trip(self):
        rng = random.Random(7)
        c = zeta_pow(5, 2) * rat(F(3, 2))
        for _ in range(10):
            a = S(*[(rng.randint(-3, 6), F(rng.randint(-9, 9))) for _ in range(5)])
            back = a.scale_substitute(c).scale_substitute(c.inverse())
            assert back == a

    def test_zero_scale(self):
        with pytest.raises(ZeroScale):
            S((1, 1)).scale_substitute(CycScalar.zero(3))


class TestLeading:
    def test_quintic(self):
        assert QUINTIC.leading() == (5, CycScalar.one(1))

    def test_constant(self):
        assert S((0, 3)).leading() == (0, rat(3))

    def test_gap_series(self):
        assert S((-2, 1), (-7, 1)).leading() == (-2, CycScalar.one(1))

    def test_zero_raises(self):
        with pytest.raises(ZeroSeries):
            Series.zero().leading()
        with pytest.raises(ZeroSeries):
            S((-5, 1)).truncate(-2).leading()


class TestCompositionalInverse:
    def test_identity(self):
        g = compositional_inverse(S((1, 1)), 5)
        assert g.coeff(1) == CycScalar.one(1)

    def test_catalan_signs(self):
        g = compositional_inverse(S((1, 1), (2, 1)), 5)
        for e, v in {1: 1, 2: -1, 3: 2, 4: -5, 5: 14}.items():
            assert g.coeff(e) == rat(v)

    def test_linear(self):
        g = compositional_inverse(S((1, 2)), 5)
        assert g.coeff(1) == rat(F(1, 2))

    def test_not_invertible(self):
        with pytest.raises(NotInvertible):
            compositional_inverse(Series.zero(), 4)
        with pytest.raises(NotInvertible):
            # constant term blocks both inversion routes
            compositional_inverse(S((0, 1), (1, 1)), 4)

    def test_round_trip_random(self):
        """f then its inverse is the identity to the working order."""
        rng = random.Random(31337)
        for _ in range(100):
            deg = rng.randint(1, 6)
            pairs = [(1, F(rng.randint(1, 9)))]
            pairs += [(k, F(rng.randint(-9, 9))) for k in range(2, deg + 1)]
            f = S(*pairs)
            g = compositional_inverse(f, 8)
            h = compose_polynomial(f, g)
            assert h.coeff(1) == CycScalar.one(1)
            for e in h.exponents():
                if e != 1:
                    assert h.coeff(e).is_zero() or e > 8

    def test_lagrange_formula(self):
        # for f = z + t*z^k the inverse coefficient of degree m is
        # (1/m) * C(-m, j) * t^j with j = (m-1)/(k-1), zero when j is
        # not an integer; C is the generalized binomial coefficient
        for k in (2, 3, 4):
            for t in (F(1), F(-2), F(3, 5)):
                f = S((1, 1), (k, t))
                g = compositional_inverse(f, 8)
                for m in range(1, 9):
                    num, den = divmod(m - 1, k - 1)
                    if den == 0:
                        j = num
                        want = F((-1) ** j * comb(m + j - 1, j), m) * t**j
                    else:
                        want = F(0)
                    assert g.coeff(m) == rat(want), (k, t, m)


class TestInverseAtInfinity:
    def test_square(self):
        g, root = inverse_at_infinity(S((2, 1)), 8)
        assert g.coeff(F(1, 2)) == CycScalar.one(1)
        assert root * root == CycScalar.one(1)

    def test_shifted_square(self):
        # closed form (-1 + sqrt(1+4w))/2 expanded at infinity
        g, _ = inverse_at_infinity(S((2, 1), (1, 1)), 8)
        assert g.coeff(F(1, 2)) == CycScalar.one(1)
        assert g.coeff(0) == rat(F(-1, 2))
        assert g.coeff(F(-1, 2)) == rat(F(1, 8))
        assert g.coeff(F(-3, 2)) == rat(F(-1, 128))
        assert g.coeff(F(-5, 2)) == rat(F(1, 1024))
        assert g.coeff(F(-7, 2)) == rat(F(-5, 32768))

    def test_forward_composition(self):
        f = S((3, 8), (2, -1), (0, 5))
        g, _ = inverse_at_infinity(f, 9)
        h = compose_polynomial(f, g)
        assert h.coeff(1) == CycScalar.one(1)
        for e in h.exponents():
            assert e == 1 or h.coeff(e).is_zero()

    def test_negative_lead_branch(self):
        g, root = inverse_at_infinity(S((2, -1)), 6)
        c = g.coeff(F(1, 2))
        assert c * c == rat(-1)
        assert root * root == rat(-1)

    def test_unrepresentable_root(self):
        with pytest.raises(NotInvertible):
            inverse_at_infinity(S((2, 2)), 4)

    def test_valuation_one_still_expands_at_infinity(self):
        # even for degree-ge-2 polynomials with a linear term the
        # large-argument branch must be used, not the ascending one
        g, _ = inverse_at_infinity(S((2, 1), (1, 1)), 6)
        assert g.ram == 2


class TestPrincipalRoot:
    def test_rational(self):
        assert principal_root(rat(F(27, 8)), 3) == rat(F(3, 2))

    def test_root_of_unity(self):
        r = principal_root(zeta_pow(5, 2), 2)
        assert r * r == zeta_pow(5, 2)

    def test_negative(self):
        r = principal_root(rat(-4), 2)
        assert r * r == rat(-4)

    def test_unrepresentable(self):
        with pytest.raises(NotInvertible):
            principal_root(rat(2), 2)


class TestText:
    def test_canonical_quintic(self):
        text = "z^5 - 14/5*z^4 - 2/5*z^3 + 1599/125*z^2 + 26836/625*z + O(z^-12)"
        assert render_series(QUINTIC.truncate(-12)) == text
        assert parse_series(text) == QUINTIC.truncate(-12)

    def test_ramified_exponent_form(self):
        assert render_series(Series.monomial(F(3, 2), 1)) == "z^(3/2)"

    def test_round_trip_random(self):
        rng = random.Random(5150)
        for _ in range(20):
            ram = rng.choice([1, 1, 2, 3])
            pairs = [
                (F(rng.randint(-6, 8), ram), F(rng.randint(-9, 9), rng.randint(1, 3)))
                for _ in range(5)
            ]
            s = Series.from_pairs(pairs)
            if rng.random() < 0.5:
                s = s.truncate(F(rng.randint(-12, -7), ram))
            assert parse_series(render_series(s)) == s

    def test_cyclotomic_coefficients_round_trip(self):
        s = S((2, zeta_pow(3, 1)), (0, zeta_pow(3, 2) * rat(F(1, 2))))
        assert parse_series(render_series(s)) == s
