"""Splitting d/dz + M into rank-1 pieces when the top coefficient splits.

The input matrix must be an exact Laurent-polynomial matrix whose leading
coefficient L (at the top exponent m) has n distinct eigenvalues.  The
reduction conjugates by an eigenvector matrix of L and then strips the
off-diagonal part one exponent at a time with gauges Id + G z^-k; each G
solves a constant linear system built from the leading eigenvalues.

Everything here works on "levels": a map exponent -> constant matrix.
Dropping levels below the working floor is harmless because every gauge
factor is supported in nonpositive exponents, so lost content can never
climb back up past the floor.
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction
from typing import Optional, Sequence

from .coeffs import CycScalar, zeta_pow
from .connections import (
    Connection,
    Matrix,
    OneDimClass,
    mat_derivative,
    mat_mul,
)
from .series import Series

CMat = list[list[CycScalar]]


class SplitError(ValueError):
    pass


class DegenerateLeading(SplitError):
    pass


class InsufficientDepth(SplitError):
    pass


class SplitResult:
    """classes in eigenvalue order, the exact composed gauge, and a log."""

    __slots__ = ("classes", "gauge", "diagnostics")

    def __init__(self, classes, gauge, diagnostics):
        object.__setattr__(self, "classes", tuple(classes))
        object.__setattr__(self, "gauge", gauge)
        object.__setattr__(self, "diagnostics", tuple(diagnostics))

    def __setattr__(self, *_):
        raise AttributeError("SplitResult is immutable")

    def __repr__(self):
        return f"<SplitResult dim={len(self.classes)} steps={len(self.diagnostics)}>"


# -- constant-matrix helpers -----------------------------------------


def _czero(n: int) -> CMat:
    z = CycScalar.zero()
    return [[z] * n for _ in range(n)]


def _cident(n: int) -> CMat:
    out = _czero(n)
    one = CycScalar.one()
    for i in range(n):
        out[i][i] = one
    return out


def _cmul(a: CMat, b: CMat) -> CMat:
    n = len(a)
    out = _czero(n)
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for l in range(n):
            x = ai[l]
            if x.is_zero():
                continue
            bl = b[l]
            for j in range(n):
                y = bl[j]
                if not y.is_zero():
                    oi[j] = oi[j] + x * y
    return out


def _cadd_into(a: CMat, b: CMat) -> None:
    n = len(a)
    for i in range(n):
        for j in range(n):
            y = b[i][j]
            if not y.is_zero():
                a[i][j] = a[i][j] + y


def _csub_into(a: CMat, b: CMat) -> None:
    n = len(a)
    for i in range(n):
        for j in range(n):
            y = b[i][j]
            if not y.is_zero():
                a[i][j] = a[i][j] - y


def _cscale(a: CMat, c) -> CMat:
    return [[x * c if not x.is_zero() else x for x in row] for row in a]


def _call_zero(a: Optional[CMat]) -> bool:
    return a is None or all(x.is_zero() for row in a for x in row)


# -- leading-term analysis -------------------------------------------


@functools.lru_cache(maxsize=None)
def _zeta_diff_inv(n: int, i: int, j: int) -> CycScalar:
    return (zeta_pow(n, i) - zeta_pow(n, j)).inverse()


def _as_levels(m: Matrix) -> tuple[dict[int, CMat], int]:
    n = len(m)
    levels: dict[int, CMat] = {}
    for i in range(n):
        for j in range(n):
            s = m[i][j]
            if not s.is_exact():
                raise SplitError("matrix entries must be exact Laurent polynomials")
            if s.ram != 1:
                raise SplitError("matrix entries must be unramified")
            for k, c in s.terms.items():
                levels.setdefault(k, _czero(n))[i][j] = c
    if not levels:
        raise DegenerateLeading("zero matrix has no leading term")
    return levels, max(levels)


def _leading_data(L: CMat):
    """Eigen-data of the top coefficient.

    Returns (eigenvalues, F, F_inv) with L = F diag(eigs) F^-1.  Three
    shapes are recognized: a scaled permutation of a single n-cycle
    (diagonalized by the orbit DFT), an already-diagonal matrix, and a
    general matrix with distinct rational eigenvalues.
    """
    n = len(L)
    # scaled n-cycle permutation?
    perm = _try_cycle_permutation(L)
    if perm is not None:
        alpha, tau = perm
        orbit = [0]
        while len(orbit) < n:
            orbit.append(tau[orbit[-1]])
        eigs = [alpha * zeta_pow(n, t) for t in range(n)]
        F = _czero(n)
        Fi = _czero(n)
        ninv = Fraction(1, n)
        for s, row in enumerate(orbit):
            for t in range(n):
                F[row][t] = zeta_pow(n, t * s)
                Fi[t][row] = zeta_pow(n, -t * s) * ninv
        return eigs, F, Fi
    if all(L[i][j].is_zero() for i in range(n) for j in range(n) if i != j):
        eigs = [L[i][i] for i in range(n)]
        for i in range(n):
            for j in range(i):
                if eigs[i] == eigs[j]:
                    raise DegenerateLeading("repeated leading eigenvalue")
        return eigs, _cident(n), _cident(n)
    return _rational_eigen(L)


def _try_cycle_permutation(L: CMat):
    n = len(L)
    if n == 1:
        # 1x1 is trivially the identity cycle
        return (L[0][0], [0]) if not L[0][0].is_zero() else None
    tau = [-1] * n
    alpha = None
    seen_cols = set()
    for i in range(n):
        hits = [j for j in range(n) if not L[i][j].is_zero()]
        if len(hits) != 1:
            return None
        j = hits[0]
        if j in seen_cols:
            return None
        seen_cols.add(j)
        if alpha is None:
            alpha = L[i][j]
        elif L[i][j] != alpha:
            return None
        tau[i] = j
    # single n-cycle?
    at, count = 0, 0
    while count < n:
        at = tau[at]
        count += 1
        if at == 0:
            break
    if count != n:
        raise DegenerateLeading(
            "leading permutation is not a single cycle: repeated eigenvalues"
        )
    return alpha, tau


def _char_poly(L: CMat) -> list[CycScalar]:
    # det(y Id - L) by column-subset elimination; index = y-degree
    n = len(L)
    size = 1 << n
    dets: list[Optional[list[CycScalar]]] = [None] * size
    dets[0] = [CycScalar.one()]
    for mask in range(1, size):
        row = bin(mask).count("1") - 1
        acc: Optional[list[CycScalar]] = None
        sign = -1 if row % 2 else 1
        for j in range(n):
            if not mask & (1 << j):
                continue
            sub = dets[mask ^ (1 << j)]
            ent = [-L[row][j]]
            if row == j:
                ent.append(CycScalar.one())
            piece = [CycScalar.zero()] * (len(ent) + len(sub) - 1)
            for ia, av in enumerate(ent):
                if av.is_zero():
                    continue
                for ib, bv in enumerate(sub):
                    piece[ia + ib] = piece[ia + ib] + av * bv
            if sign < 0:
                piece = [-x for x in piece]
            if acc is None:
                acc = piece
            else:
                if len(acc) < len(piece):
                    acc, piece = piece, acc
                for ib, bv in enumerate(piece):
                    acc[ib] = acc[ib] + bv
            sign = -sign
        dets[mask] = acc
    return dets[size - 1]


def _rational_eigen(L: CMat):
    n = len(L)
    cp = _char_poly(L)
    if not all(c.is_rational() for c in cp):
        raise DegenerateLeading(
            "leading matrix is not a scaled cycle permutation and its "
            "characteristic polynomial is not rational"
        )
    coeffs = [c.as_fraction() for c in cp]
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    roots = set()
    a0, an = ints[0], ints[-1]
    if a0 == 0:
        roots.add(Fraction(0))
        while ints[0] == 0:
            ints = ints[1:]
        a0 = ints[0]
    for p in _divisors_signed(a0):
        for q in _divisors_pos(an):
            cand = Fraction(p, q)
            acc = Fraction(0)
            for c in reversed(coeffs):
                acc = acc * cand + c
            if acc == 0:
                roots.add(cand)
    if len(roots) != n:
        raise DegenerateLeading(
            f"found {len(roots)} distinct rational eigenvalues, need {n}"
        )
    eigs_f = sorted(roots)
    eigs = [CycScalar.rational(v) for v in eigs_f]
    cols = [_kernel_vector(L, lam) for lam in eigs]
    F = [[cols[t][i] for t in range(n)] for i in range(n)]
    Fi = _cinvert(F)
    return eigs, F, Fi


def _divisors_pos(a: int) -> list[int]:
    a = abs(a)
    out = [d for d in range(1, a + 1) if a % d == 0]
    return out


def _divisors_signed(a: int) -> list[int]:
    pos = _divisors_pos(a)
    return pos + [-d for d in pos]


def _kernel_vector(L: CMat, lam: CycScalar) -> list[CycScalar]:
    n = len(L)
    rows = [[L[i][j] - (lam if i == j else CycScalar.zero()) for j in range(n)] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(n):
        pivot = None
        for i in range(r, n):
            if not rows[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    free = [c for c in range(n) if c not in piv_cols]
    if not free:
        raise DegenerateLeading("claimed eigenvalue has trivial kernel")
    fc = free[0]
    vec = [CycScalar.zero()] * n
    vec[fc] = CycScalar.one()
    for r_i, c in enumerate(piv_cols):
        vec[c] = -rows[r_i][fc]
    return vec


def _cinvert(A: CMat) -> CMat:
    n = len(A)
    rows = [list(r) + list(ir) for r, ir in zip(A, _cident(n))]
    for c in range(n):
        pivot = None
        for i in range(c, n):
            if not rows[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            raise DegenerateLeading("eigenvector matrix is singular")
        rows[c], rows[pivot] = rows[pivot], rows[c]
        inv = rows[c][c].inverse()
        rows[c] = [x * inv for x in rows[c]]
        for i in range(n):
            if i != c and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return [r[n:] for r in rows]


# -- the splitting loop ----------------------------------------------


def lt_split(conn: Connection, depth: Optional[int] = None) -> SplitResult:
    """Reduce to rank-1 classes; gauge trail included.

    depth counts extra elimination passes below the residue exponent;
    the default m+2 matches the certified default elsewhere.  Any
    depth >= 0 suffices for the classes themselves, which is exactly
    what verify_split certifies afterwards.
    """
    if conn.hbar:
        raise SplitError("split the specialized connection, not the graded one")
    n = conn.dim
    levels, m = _as_levels(conn.matrix)
    if m < 0:
        raise DegenerateLeading("no irregular leading term above z^0")
    if depth is None:
        depth = m + 2
    if depth < 0:
        raise InsufficientDepth("need depth >= 0 to reach the residue exponent")
    floor = -1 - depth

    eigs, F, Fi = _leading_data(levels[m])
    inv_diff: dict[tuple[int, int], CycScalar] = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                d = eigs[i] - eigs[j]
                if d.is_zero():
                    raise DegenerateLeading("repeated leading eigenvalue")
                inv_diff[(i, j)] = d.inverse()

    # conjugate into the eigenbasis (constant gauge: no derivative term)
    work: dict[int, CMat] = {}
    for e, mat in levels.items():
        if e >= floor:
            work[e] = _cmul(Fi, _cmul(mat, F))

    gauge_levels: dict[int, CMat] = {0: [row[:] for row in F]}
    log = []

    for k in range(1, m + 1 + depth + 1):
        lvl = m - k
        if lvl < floor:
            break
        O = work.get(lvl)
        if O is None:
            continue
        G = _czero(n)
        removed = 0
        for i in range(n):
            for j in range(n):
                if i != j and not O[i][j].is_zero():
                    G[i][j] = -O[i][j] * inv_diff[(i, j)]
                    removed += 1
        if removed == 0:
            continue
        log.append({"k": k, "level": lvl, "removed": removed})

        # right factor: N_e = M_e + M_{e+k} G
        N: dict[int, CMat] = {}
        for e in range(floor, m + 1):
            base = work.get(e)
            upper = work.get(e + k)
            if upper is None:
                if base is not None:
                    N[e] = base
                continue
            shift = _cmul(upper, G)
            if base is None:
                N[e] = shift
            else:
                out = [row[:] for row in base]
                _cadd_into(out, shift)
                N[e] = out

        # left factor: peel (Id + G z^-k)^-1 implicitly, solving
        # new_t + G new_{t+k} = N_t + g'_t from the top level down
        new: dict[int, CMat] = {}
        minus_kG = _cscale(G, CycScalar.rational(-k))
        gp_level = -k - 1
        for t in range(m, floor - 1, -1):
            acc = None
            base = N.get(t)
            if base is not None:
                acc = [row[:] for row in base]
            if t == gp_level:
                if acc is None:
                    acc = [row[:] for row in minus_kG]
                else:
                    _cadd_into(acc, minus_kG)
            up = new.get(t + k)
            if up is not None:
                shift = _cmul(G, up)
                if not _call_zero(shift):
                    if acc is None:
                        acc = [[-x for x in row] for row in shift]
                    else:
                        _csub_into(acc, shift)
            if acc is not None and not _call_zero(acc):
                new[t] = acc
        work = new

        # extend the exact composed gauge by (Id + G z^-k)
        gnew: dict[int, CMat] = {}
        for e, mat in gauge_levels.items():
            cur = gnew.get(e)
            if cur is None:
                gnew[e] = [row[:] for row in mat]
            else:
                _cadd_into(cur, mat)
            shift = _cmul(mat, G)
            if not _call_zero(shift):
                cur = gnew.get(e - k)
                if cur is None:
                    gnew[e - k] = shift
                else:
                    _cadd_into(cur, shift)
        gauge_levels = gnew

    classes = []
    zero = CycScalar.zero()
    for t in range(n):
        poly = {}
        for e in range(0, m + 1):
            mat = work.get(e)
            if mat is not None and not mat[t][t].is_zero():
                poly[e] = mat[t][t]
        res = work.get(-1)
        classes.append(
            OneDimClass(
                Series(poly, None, 1),
                res[t][t] if res is not None else zero,
            )
        )

    gauge = _levels_to_series_matrix(gauge_levels, n)
    return SplitResult(classes, gauge, log)


def _levels_to_series_matrix(levels: dict[int, CMat], n: int) -> Matrix:
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = {}
            for e, mat in levels.items():
                c = mat[i][j]
                if not c.is_zero():
                    terms[e] = c
            row.append(Series(terms, None, 1))
        out.append(tuple(row))
    return tuple(out)


def verify_split(conn: Connection, result: SplitResult) -> bool:
    """Check M g + g' - g D is supported at exponents <= -2, exactly.

    g is the exact composed gauge and D = diag(polypart + residue/z), so
    this is the SplitResult invariant with no recourse to the algorithm
    that produced it.
    """
    n = conn.dim
    if len(result.classes) != n or len(result.gauge) != n:
        return False
    D = []
    for t, cl in enumerate(result.classes):
        lam = cl.polypart
        if not cl.residue.is_zero():
            lam = lam + Series({-1: cl.residue}, None, 1)
        D.append(tuple(lam if s == t else Series.zero() for s in range(n)))
    # only the window above -2 is asserted, so the gauge tail below
    # -2 - (top exponent of either factor) cannot reach it; truncating
    # there keeps the check exact where it matters and off the deep tail
    top = 0
    for row in list(conn.matrix) + D:
        for s in row:
            if s.terms:
                top = max(top, max(s.terms) // s.ram)
    floor_t = -2 - top
    g = tuple(
        tuple(s.truncate(floor_t) for s in row) for row in result.gauge
    )
    R1 = mat_mul(conn.matrix, g)
    R2 = mat_derivative(g)
    R3 = mat_mul(g, tuple(D))
    for i in range(n):
        for j in range(n):
            r = R1[i][j] + R2[i][j] - R3[i][j]
            if r.trunc is not None and r.trunc_exp() > -2:
                return False
            for k in r.terms:
                if Fraction(k, r.ram) > -2:
                    return False
    return True
