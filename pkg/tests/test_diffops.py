"""Normal ordering, canonical commutation, and the named operators."""

import random
from fractions import Fraction as F

import pytest

from satoquiver.coeffs import CycScalar, zeta_pow
from satoquiver.diffops import (
    BadDegreeRange,
    DiffOp,
    OpError,
    apply_op,
    commutator,
    kac_schwarz,
    ks_commutator_identity,
    render_op,
    witt_op,
    witt_relation,
)
from satoquiver.series import Series

D = DiffOp.d_op()
Z = DiffOp.z_pow(1)


def rand_op(rng, hmax=0):
    terms = {}
    for _ in range(rng.randint(1, 4)):
        key = (rng.randint(-3, 3), rng.randint(0, 3), rng.randint(0, hmax))
        terms[key] = CycScalar.rational(F(rng.randint(-5, 5)))
    return DiffOp(terms)


class TestNormalOrder:
    def test_canonical_commutation(self):
        assert D * Z == Z * D + DiffOp.one()

    def test_second_order(self):
        assert DiffOp.d_op(2) * Z == Z * DiffOp.d_op(2) + DiffOp.d_op(1).scalar_mul(2)

    def test_h_graded(self):
        hD = DiffOp.hbar() * D
        assert hD * Z == Z * hD + DiffOp.hbar()

    def test_negative_powers(self):
        # D z^-1 = z^-1 D - z^-2
        got = D * DiffOp.z_pow(-1)
        want = DiffOp.z_pow(-1) * D + DiffOp.z_pow(-2, -1)
        assert got == want

    def test_associativity_random(self):
        rng = random.Random(1123)
        for _ in range(100):
            a, b, c = rand_op(rng), rand_op(rng), rand_op(rng)
            assert (a * b) * c == a * (b * c)

    def test_jacobi_random(self):
        rng = random.Random(58)
        for _ in range(40):
            a, b, c = rand_op(rng, 1), rand_op(rng, 1), rand_op(rng, 1)
            total = (
                commutator(a, commutator(b, c))
                + commutator(b, commutator(c, a))
                + commutator(c, commutator(a, b))
            )
            assert total.is_zero()


class TestCommutator:
    def test_linear_string_equation(self):
        assert commutator(D + DiffOp.z_pow(2), Z) == DiffOp.one()

    def test_quadratic_string_equation(self):
        assert commutator(kac_schwarz(2, 3), DiffOp.z_pow(2)) == DiffOp.one()

    def test_euler(self):
        assert commutator(Z * D, DiffOp.z_pow(3)) == DiffOp.z_pow(3, 3)

    def test_string_equation_sweep(self):
        for p in range(1, 5):
            for q in range(p + 1, p + 5):
                assert commutator(kac_schwarz(p, q), DiffOp.z_pow(p)) == DiffOp.one()


class TestKacSchwarz:
    def test_p1_degenerates_to_plain_derivative(self):
        assert kac_schwarz(1, 2) == D + DiffOp.z_pow(2)

    def test_p2_q3_display(self):
        got = kac_schwarz(2, 3)
        want = DiffOp(
            {
                (-1, 1, 0): CycScalar.rational(F(1, 2)),
                (-2, 0, 0): CycScalar.rational(F(-1, 4)),
                (3, 0, 0): CycScalar.one(),
            }
        )
        assert got == want

    def test_constant_potential(self):
        assert kac_schwarz(1, 0, {0: F(5, 7)}) == D + DiffOp.scalar(F(5, 7))

    def test_full_potential_map(self):
        op = kac_schwarz(2, 2, {-1: 1, 0: F(1, 3), 2: -2})
        assert op.terms[(-1, 0, 0)] == CycScalar.one()
        assert op.terms[(2, 0, 0)] == CycScalar.rational(-2)

    def test_degree_range_enforced(self):
        with pytest.raises(BadDegreeRange):
            kac_schwarz(2, 3, {-2: 1})
        with pytest.raises(BadDegreeRange):
            kac_schwarz(2, 3, {4: 1})
        with pytest.raises(BadDegreeRange):
            kac_schwarz(0, 1)

    def test_nested_commutator_identity(self):
        for p in range(1, 4):
            for q in range(p + 1, 6):
                for i in range(4):
                    assert ks_commutator_identity(p, q, i).is_zero(), (p, q, i)


class TestWitt:
    def test_l0(self):
        want = DiffOp(
            {(1, 1, 0): CycScalar.rational(-1), (0, 0, 0): CycScalar.rational(F(-1, 2))}
        )
        assert witt_op(0) == want

    def test_relation_examples(self):
        assert witt_relation(1, -1).is_zero()
        assert witt_relation(2, 3).is_zero()

    def test_relation_sweep(self):
        for m in range(-4, 5):
            for n in range(-4, 5):
                assert witt_relation(m, n).is_zero(), (m, n)


class TestApply:
    def test_affine(self):
        assert apply_op(D + DiffOp.z_pow(2), Series.one()) == Series.from_pairs([(2, 1)])

    def test_euler_eigenvector(self):
        s = Series.from_pairs([(5, 1)])
        assert apply_op(Z * D, s) == Series.from_pairs([(5, 5)])

    def test_truncation_drops(self):
        t = Series.from_pairs([(0, 1), (-1, 1)]).truncate(-3)
        assert apply_op(D, t) == Series.from_pairs([(-2, -1)]).truncate(-4)

    def test_shift_lowers_reliable_order(self):
        t = Series.from_pairs([(0, 1)]).truncate(-2)
        got = apply_op(DiffOp.z_pow(-3), t)
        assert got.trunc_exp() == -5

    def test_h_must_be_specialized(self):
        hD = DiffOp.hbar() * D
        with pytest.raises(OpError):
            apply_op(hD, Series.one())
        out = apply_op(hD, Series.from_pairs([(3, 1)]), hbar=F(1, 2))
        assert out == Series.from_pairs([(2, F(3, 2))])

    def test_cyclotomic_scalars_pass_through(self):
        op = DiffOp.z_pow(1, zeta_pow(3, 1))
        got = apply_op(op, Series.from_pairs([(2, zeta_pow(3, 2))]))
        assert got == Series.from_pairs([(3, 1)])


class TestText:
    def test_ks_render(self):
        assert render_op(kac_schwarz(2, 3)) == "1/2*z^-1*D - 1/4*z^-2 + z^3"

    def test_zero(self):
        assert render_op(DiffOp.zero()) == "0"

    def test_h_and_powers(self):
        op = DiffOp.hbar(2, F(1, 3)) * DiffOp.d_op(2) + DiffOp.z_pow(-1, -1)
        assert render_op(op) == "1/3*h^2*D^2 - z^-1"
