"""Matrix connections d/dz + M, gauge action, and rank-1 class data.

The singular point sits at z = infinity, so in the z coordinate the
irregular data of a rank-1 factor d/dz + lam is the nonnegative part of
lam, the z^-1 coefficient survives as a residue defined modulo Z, and
everything at z^-2 and below can be gauged away.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .coeffs import CycScalar, render_scalar
from .series import Series, render_series

Matrix = tuple[tuple[Series, ...], ...]


class ConnError(ValueError):
    pass


class NotInverse(ConnError):
    pass


class InsufficientPrecision(ConnError):
    pass


# -- matrix helpers (shared with the splitting algorithm) ------------


def as_matrix(rows: Iterable[Iterable[Series]]) -> Matrix:
    m = tuple(tuple(row) for row in rows)
    n = len(m)
    for row in m:
        if len(row) != n:
            raise ConnError("matrix must be square")
    return m


def zero_matrix(n: int) -> Matrix:
    z = Series.zero()
    return tuple(tuple(z for _ in range(n)) for _ in range(n))


def identity_matrix(n: int) -> Matrix:
    one = Series.one()
    z = Series.zero()
    return tuple(
        tuple(one if i == j else z for j in range(n)) for i in range(n)
    )


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(
        tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return tuple(
        tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    bt = tuple(zip(*b))
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = Series.zero()
            for x, y in zip(a[i], bt[j]):
                acc = acc + x * y
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def mat_scalar(a: Matrix, c: Series) -> Matrix:
    return tuple(tuple(x * c for x in row) for row in a)


def mat_derivative(a: Matrix) -> Matrix:
    return tuple(tuple(x.derivative() for x in row) for row in a)


def mat_visibly_zero(a: Matrix) -> bool:
    return all(not x.terms for row in a for x in row)


# -- connections -----------------------------------------------------


class Connection:
    """d/dz + M, or for the h-graded variant h*d/dz + M0 + h*M1.

    Immutable.  The h flag fixes which of the two shapes is meant; the
    classical limit only exists for the graded one.
    """

    __slots__ = ("dim", "matrix", "hbar", "matrix_h")

    def __init__(
        self,
        matrix: Iterable[Iterable[Series]],
        hbar: bool = False,
        matrix_h: Optional[Iterable[Iterable[Series]]] = None,
    ):
        m = as_matrix(matrix)
        object.__setattr__(self, "dim", len(m))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "hbar", bool(hbar))
        if matrix_h is not None and not hbar:
            raise ConnError("h-degree-1 part given without the h flag")
        mh = None
        if hbar:
            mh = as_matrix(matrix_h) if matrix_h is not None else zero_matrix(len(m))
            if len(mh) != len(m):
                raise ConnError("h-degree parts disagree on dimension")
        object.__setattr__(self, "matrix_h", mh)

    def __setattr__(self, *_):
        raise AttributeError("Connection is immutable")

    def __eq__(self, other):
        if not isinstance(other, Connection):
            return NotImplemented
        return (
            self.hbar == other.hbar
            and self.matrix == other.matrix
            and self.matrix_h == other.matrix_h
        )

    def __repr__(self):
        kind = "h-connection" if self.hbar else "connection"
        return f"<{kind} dim={self.dim}>"


def gauge_transform(conn: Connection, g: Matrix, g_inv: Matrix) -> Connection:
    """M -> g^-1 M g + g^-1 g'; the caller supplies both g and g^-1.

    The pair is checked: g*g_inv must be the identity at every visible
    order, otherwise NotInverse.
    """
    g = as_matrix(g)
    g_inv = as_matrix(g_inv)
    n = conn.dim
    if len(g) != n:
        raise ConnError("gauge dimension mismatch")
    probe = mat_sub(mat_mul(g, g_inv), identity_matrix(n))
    if not mat_visibly_zero(probe):
        raise NotInverse("g * g_inv is visibly not the identity")
    shift = mat_mul(g_inv, mat_derivative(g))
    if conn.hbar:
        return Connection(
            mat_mul(g_inv, mat_mul(conn.matrix, g)),
            hbar=True,
            matrix_h=mat_add(mat_mul(g_inv, mat_mul(conn.matrix_h, g)), shift),
        )
    return Connection(
        mat_add(mat_mul(g_inv, mat_mul(conn.matrix, g)), shift)
    )


def direct_sum(conns: Sequence[Connection]) -> Connection:
    if not conns:
        raise ConnError("direct sum of nothing")
    hbar = conns[0].hbar
    if any(c.hbar != hbar for c in conns):
        raise ConnError("cannot mix graded and ungraded summands")
    n = sum(c.dim for c in conns)
    rows = [[Series.zero()] * n for _ in range(n)]
    rows_h = [[Series.zero()] * n for _ in range(n)] if hbar else None
    at = 0
    for c in conns:
        for i in range(c.dim):
            for j in range(c.dim):
                rows[at + i][at + j] = c.matrix[i][j]
                if hbar:
                    rows_h[at + i][at + j] = c.matrix_h[i][j]
        at += c.dim
    return Connection(rows, hbar=hbar, matrix_h=rows_h)


# -- rank-1 classes --------------------------------------------------


def _mod_one(c: CycScalar) -> CycScalar:
    # shift the rational coordinate into [0, 1); the basis vector 1 is
    # the only direction integers move along
    r0 = c.coeffs[0]
    return c - math.floor(r0)


class OneDimClass:
    """Irregular class of d/dz + lam: (polynomial part, residue mod Z)."""

    __slots__ = ("polypart", "residue")

    def __init__(self, polypart: Series, residue: CycScalar):
        if not polypart.is_exact() or polypart.ram != 1:
            raise ConnError("polynomial part must be exact and unramified")
        if polypart.terms and min(polypart.terms) < 0:
            raise ConnError("polynomial part cannot have negative exponents")
        object.__setattr__(self, "polypart", polypart)
        object.__setattr__(self, "residue", residue)

    def __setattr__(self, *_):
        raise AttributeError("OneDimClass is immutable")

    def __eq__(self, other):
        if not isinstance(other, OneDimClass):
            return NotImplemented
        if self.polypart != other.polypart:
            return False
        return (self.residue - other.residue).is_integer()

    def __hash__(self):
        return hash((frozenset(self.polypart.terms.items()),))

    def key(self):
        """Deterministic sort key; residues enter mod Z."""
        deg = max(self.polypart.terms, default=-1)
        coeffs = tuple(
            (k, self.polypart.terms[k].key())
            for k in sorted(self.polypart.terms, reverse=True)
        )
        return (deg, coeffs, _mod_one(self.residue).key())

    def __repr__(self):
        return (
            f"OneDimClass({render_series(self.polypart)!r}, "
            f"residue={render_scalar(self.residue)!r})"
        )


class RamifiedClass:
    """Rank-1 class over the degree-r cover z^(1/r).

    Unlike the unramified case the exponents strictly between -1 and 0
    cannot be gauged away over C((z^(1/r))) (a logarithmic derivative of
    a unit in the cover only produces exponents at -1 and below), so
    they are carried separately in `subpolar`.
    """

    __slots__ = ("ram", "polypart", "subpolar", "residue")

    def __init__(self, ram: int, polypart: Series, subpolar: Series, residue: CycScalar):
        if ram < 1:
            raise ConnError("ramification must be positive")
        if not polypart.is_exact() or (
            polypart.terms and min(Fraction(k, polypart.ram) for k in polypart.terms) < 0
        ):
            raise ConnError("polynomial part must be exact with exponents >= 0")
        if not subpolar.is_exact():
            raise ConnError("subpolar part must be exact")
        for k in subpolar.terms:
            e = Fraction(k, subpolar.ram)
            if not (-1 < e < 0):
                raise ConnError("subpolar exponents must lie in (-1, 0)")
        object.__setattr__(self, "ram", ram)
        object.__setattr__(self, "polypart", polypart)
        object.__setattr__(self, "subpolar", subpolar)
        object.__setattr__(self, "residue", residue)

    def __setattr__(self, *_):
        raise AttributeError("RamifiedClass is immutable")

    def __eq__(self, other):
        if not isinstance(other, RamifiedClass):
            return NotImplemented
        return (
            self.ram == other.ram
            and self.polypart == other.polypart
            and self.subpolar == other.subpolar
            and (self.residue - other.residue).is_integer()
        )

    def __hash__(self):
        return hash(
            (
                self.ram,
                frozenset(self.polypart.terms.items()),
                frozenset(self.subpolar.terms.items()),
            )
        )

    def key(self):
        deg = max(
            (Fraction(k, self.polypart.ram) for k in self.polypart.terms),
            default=Fraction(-1),
        )
        pp = tuple(
            (Fraction(k, self.polypart.ram), self.polypart.terms[k].key())
            for k in sorted(self.polypart.terms, reverse=True)
        )
        sub = tuple(
            (Fraction(k, self.subpolar.ram), self.subpolar.terms[k].key())
            for k in sorted(self.subpolar.terms, reverse=True)
        )
        return (self.ram, deg, pp, sub, _mod_one(self.residue).key())

    def __repr__(self):
        return (
            f"RamifiedClass(ram={self.ram}, {render_series(self.polypart)!r}, "
            f"subpolar={render_series(self.subpolar)!r}, "
            f"residue={render_scalar(self.residue)!r})"
        )


def one_dim_class(lam: Series) -> OneDimClass:
    """Collapse d/dz + lam to its class; lam must show everything at z^-1."""
    if lam.trunc is not None and lam.trunc_exp() >= -1:
        raise InsufficientPrecision(
            f"truncation at z^{lam.trunc_exp()} hides the residue"
        )
    if lam.ram != 1:
        raise ConnError("ramified eigenvalue: use ramified_class")
    poly = {k: c for k, c in lam.terms.items() if k >= 0}
    return OneDimClass(
        Series(poly, None, 1), lam.terms.get(-1, CycScalar.zero())
    )


def ramified_class(lam: Series, ram: Optional[int] = None) -> RamifiedClass:
    """Class of d/dz + lam over the cover where lam lives."""
    if lam.trunc is not None and lam.trunc_exp() >= -1:
        raise InsufficientPrecision(
            f"truncation at z^{lam.trunc_exp()} hides the residue"
        )
    r = lam.ram if ram is None else ram
    poly, sub = {}, {}
    residue = CycScalar.zero()
    for k, c in lam.terms.items():
        e = Fraction(k, lam.ram)
        if e >= 0:
            poly[k] = c
        elif e == -1:
            residue = c
        elif e > -1:
            sub[k] = c
    return RamifiedClass(
        r,
        Series(poly, None, lam.ram),
        Series(sub, None, lam.ram),
        residue,
    )


def class_multiset_equal(a: Sequence, b: Sequence) -> bool:
    """Unordered comparison of rank-1 classes, residues mod Z."""
    if len(a) != len(b):
        return False
    ka = sorted(a, key=lambda c: c.key())
    kb = sorted(b, key=lambda c: c.key())
    return all(x == y for x, y in zip(ka, kb))


def diagonal_classes(conn: Connection) -> list[OneDimClass]:
    """Classes along the diagonal of a (visibly) diagonal connection."""
    for i in range(conn.dim):
        for j in range(conn.dim):
            if i != j and conn.matrix[i][j].terms:
                raise ConnError("connection is not diagonal")
    return [one_dim_class(conn.matrix[i][i]) for i in range(conn.dim)]


# -- classical limit -------------------------------------------------


def classical_limit(conn: Connection) -> dict[int, Series]:
    """det(y*Id - M0) for an h-connection, as {y-degree: coefficient}.

    Exact determinant over the commutative ring of y-polynomials with
    series coefficients, by elimination over column subsets.
    """
    if not conn.hbar:
        raise ConnError("classical limit needs the h grading")
    n = conn.dim
    m0 = conn.matrix
    # entry (i, j) of y*Id - M0 as a y-polynomial: list index = y-degree
    def entry(i, j):
        base = -m0[i][j]
        if i == j:
            return [base, Series.one()]
        return [base]

    def ypoly_mul(p, q):
        out = [Series.zero()] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            if not a.terms and a.trunc is None:
                continue
            for j, b in enumerate(q):
                out[i + j] = out[i + j] + a * b
        return out

    def ypoly_add(p, q):
        if len(p) < len(q):
            p, q = q, p
        out = list(p)
        for i, b in enumerate(q):
            out[i] = out[i] + b
        return out

    # D[mask] = det of the top rows against the column set in mask
    size = 1 << n
    dets: list[Optional[list[Series]]] = [None] * size
    dets[0] = [Series.one()]
    for mask in range(1, size):
        row = bin(mask).count("1") - 1
        acc = None
        # expansion along the last used row: sign (-1)^(row + column slot)
        sign = -1 if row % 2 else 1
        for j in range(n):
            if not mask & (1 << j):
                continue
            sub = dets[mask ^ (1 << j)]
            piece = ypoly_mul(entry(row, j), sub)
            if sign < 0:
                piece = [x.scalar_mul(CycScalar.rational(-1)) for x in piece]
            acc = piece if acc is None else ypoly_add(acc, piece)
            sign = -sign
        dets[mask] = acc
    full = dets[size - 1]
    return {d: c for d, c in enumerate(full) if c.terms or c.trunc is not None}


def render_curve(curve: dict[int, Series]) -> str:
    """Text form of det(y*Id - M0), highest y-power first."""
    if not curve:
        return "0"
    parts = []
    for d in sorted(curve, reverse=True):
        c = curve[d]
        if d == 0:
            parts.append(render_series(c))
            continue
        y = "y" if d == 1 else f"y^{d}"
        text = render_series(c)
        if text == "1":
            parts.append(y)
        elif text == "-1":
            parts.append(f"-{y}")
        elif c.terms and len(c.terms) == 1 and not text.startswith("-"):
            parts.append(f"{text}*{y}")
        elif c.terms and len(c.terms) == 1:
            parts.append(f"-{text[1:]}*{y}")
        else:
            parts.append(f"({text})*{y}")
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out


def factor_report(classes: Sequence) -> list[dict]:
    """JSON-ready description of a list of rank-1 classes."""
    out = []
    for c in classes:
        item = {
            "polypart": render_series(c.polypart),
            "residue": render_scalar(c.residue),
        }
        if isinstance(c, RamifiedClass):
            item["ram"] = c.ram
            if c.subpolar.terms:
                item["subpolar"] = render_series(c.subpolar)
        out.append(item)
    return out
