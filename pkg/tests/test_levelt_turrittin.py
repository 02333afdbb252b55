"""Rank-1 splitting: frozen expected values and the certificate check."""

from fractions import Fraction as F

import pytest

from satoquiver.coeffs import CycScalar, zeta_pow
from satoquiver.connections import (
    Connection,
    OneDimClass,
    class_multiset_equal,
)
from satoquiver.levelt_turrittin import (
    DegenerateLeading,
    InsufficientDepth,
    SplitError,
    lt_split,
    verify_split,
)
from satoquiver.series import Series

ZERO = Series.zero()


def S(*pairs):
    return Series.from_pairs(list(pairs))


def cls(poly_pairs, residue=0):
    return OneDimClass(S(*poly_pairs), CycScalar.rational(residue))


class TestDiagonalAndTriangular:
    def test_already_diagonal(self):
        c = Connection([[S((2, 1)), ZERO], [ZERO, S((2, -1))]])
        out = lt_split(c)
        assert class_multiset_equal(out.classes, [cls([(2, 1)]), cls([(2, -1)])])
        assert verify_split(c, out)

    def test_upper_triangular_distinct_rational_leads(self):
        # leading coefficient diag(1, 2): the non-root fallback path
        c = Connection([[S((2, 1)), Series.one()], [ZERO, S((2, 2))]])
        out = lt_split(c)
        assert class_multiset_equal(out.classes, [cls([(2, 1)]), cls([(2, 2)])])
        assert verify_split(c, out)

    def test_diagonal_with_residue(self):
        c = Connection([[S((2, 1), (-1, F(1, 3))), ZERO], [ZERO, S((3, 1))]])
        out = lt_split(c)
        assert class_multiset_equal(
            out.classes, [cls([(2, 1)], F(1, 3)), cls([(3, 1)])]
        )


class TestSwapShape:
    # [[0, a], [b, 0]] splits into +-sqrt(ab) branch data

    def test_pure_power_swap(self):
        c = Connection([[ZERO, S((2, 1))], [S((2, 1)), ZERO]])
        out = lt_split(c)
        assert class_multiset_equal(out.classes, [cls([(2, 1)]), cls([(2, -1)])])
        assert verify_split(c, out)

    def test_perturbed_swap_residue_sixteenth(self):
        # sqrt(z^2 (z^2 + z)) = z^2 + z/2 - 1/8 + 1/(16 z) - ...
        c = Connection([[ZERO, S((2, 1))], [S((2, 1), (1, 1)), ZERO]])
        out = lt_split(c)
        want = [
            cls([(2, 1), (1, F(1, 2)), (0, F(-1, 8))], F(1, 16)),
            cls([(2, -1), (1, F(-1, 2)), (0, F(1, 8))], F(-1, 16)),
        ]
        assert class_multiset_equal(out.classes, want)
        assert verify_split(c, out)

    def test_classes_stable_under_depth(self):
        c = Connection([[ZERO, S((2, 1))], [S((2, 1), (1, 1)), ZERO]])
        shallow = lt_split(c, depth=0)
        deep = lt_split(c, depth=7)
        assert class_multiset_equal(shallow.classes, deep.classes)
        assert verify_split(c, shallow)
        assert verify_split(c, deep)


class TestCertificate:
    def setup_method(self):
        self.conn = Connection([[ZERO, S((2, 1))], [S((2, 1), (1, 1)), ZERO]])
        self.result = lt_split(self.conn)

    def test_tampered_residue_rejected(self):
        from satoquiver.levelt_turrittin import SplitResult

        bad = list(self.result.classes)
        bad[0] = OneDimClass(
            bad[0].polypart, bad[0].residue + CycScalar.rational(F(1, 2))
        )
        forged = SplitResult(bad, self.result.gauge, self.result.diagnostics)
        assert not verify_split(self.conn, forged)

    def test_tampered_gauge_rejected(self):
        from satoquiver.levelt_turrittin import SplitResult

        g = [list(row) for row in self.result.gauge]
        g[0][1] = g[0][1] + Series.one()
        forged = SplitResult(
            self.result.classes, tuple(tuple(r) for r in g), self.result.diagnostics
        )
        assert not verify_split(self.conn, forged)

    def test_wrong_connection_rejected(self):
        other = Connection([[ZERO, S((2, 1))], [S((2, 1)), ZERO]])
        assert not verify_split(other, self.result)


class TestLeadingTermLaw:
    def test_cycle_leading_gives_root_of_unity_fan(self):
        # leading permutation is a 3-cycle with product 8, so the top
        # terms of the classes are 2 zeta_3^t z^2
        rows = [
            [ZERO, S((2, 2)), ZERO],
            [ZERO, ZERO, S((2, 2), (0, 5))],
            [S((2, 2), (1, -3)), ZERO, ZERO],
        ]
        out = lt_split(Connection(rows))
        leads = sorted(
            (cl.polypart.terms[2] - CycScalar.rational(2) * zeta_pow(3, t)).is_zero()
            for t, cl in enumerate(out.classes)
        )
        assert leads == [True, True, True]
        assert verify_split(Connection(rows), out)


class TestRejections:
    def test_hbar_connection_rejected(self):
        c = Connection([[S((2, 1))]], hbar=True)
        with pytest.raises(SplitError):
            lt_split(c)

    def test_pure_pole_rejected(self):
        c = Connection([[S((-1, 1)), ZERO], [ZERO, S((-1, 2))]])
        with pytest.raises(DegenerateLeading):
            lt_split(c)

    def test_zero_matrix_rejected(self):
        c = Connection([[ZERO, ZERO], [ZERO, ZERO]])
        with pytest.raises(DegenerateLeading):
            lt_split(c)

    def test_repeated_leading_eigenvalue_rejected(self):
        c = Connection([[S((2, 1)), Series.one()], [ZERO, S((2, 1))]])
        with pytest.raises(DegenerateLeading):
            lt_split(c)

    def test_negative_depth_rejected(self):
        c = Connection([[S((2, 1))]])
        with pytest.raises(InsufficientDepth):
            lt_split(c, depth=-1)

    def test_truncated_input_rejected(self):
        c = Connection([[Series({2: CycScalar.one()}, 0, 1)]])
        with pytest.raises(SplitError):
            lt_split(c)
