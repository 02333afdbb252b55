"""Cyclic quivers of big-cell points and their companion matrices.

The objects here tie the rest of the package together: a QuiverSpec fixes
the combinatorics (degree n permutation, potential f, shift power p), a
CompanionMatrix records how the first-order operator acts on distinguished
generators, and the operations translate between three presentations of
the same data: the closed-form normal form for string quivers, the
splitting of the companion connection, and explicit flat-section
solutions (one per sheet of the n-fold cover).

Conventions.  Permutations are stored 0-based one-line; cycle notation at
the boundaries is 1-based.  Entry (i, j) of a companion matrix of shape
(sigma, s) may only carry exponents congruent to sigma(i) - j mod n, with
total degree exactly s and a single constant top coefficient.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .coeffs import CycScalar, zeta_pow
from .connections import (
    Connection,
    OneDimClass,
    class_multiset_equal,
    one_dim_class,
)
from .levelt_turrittin import SplitError, lt_split, verify_split
from .series import Series


class QuiverError(ValueError):
    pass


class NotStringQuiver(QuiverError):
    pass


class UnsupportedP(QuiverError):
    pass


class InvalidCompanion(QuiverError):
    pass


class IncompatibleLeading(QuiverError):
    pass


class Resonance(QuiverError):
    pass


class EmptyPotential(QuiverError):
    pass


# -- permutations ----------------------------------------------------


def string_sigma(n: int) -> tuple[int, ...]:
    """The one-line form of i -> i-1 mod n."""
    return tuple((i - 1) % n for i in range(n))


def sigma_from_cycle(n: int, cycle: Sequence[int]) -> tuple[int, ...]:
    """1-based cycle (a b c ...) -> 0-based one-line; absent points are fixed."""
    entries = [int(a) for a in cycle]
    if len(set(entries)) != len(entries):
        raise QuiverError("cycle repeats a point")
    for a in entries:
        if not 1 <= a <= n:
            raise QuiverError(f"cycle point {a} outside 1..{n}")
    out = list(range(n))
    for pos, a in enumerate(entries):
        b = entries[(pos + 1) % len(entries)]
        out[a - 1] = b - 1
    return tuple(out)


def _check_perm(n: int, sigma: Sequence[int]) -> tuple[int, ...]:
    sigma = tuple(int(a) for a in sigma)
    if sorted(sigma) != list(range(n)):
        raise QuiverError("sigma is not a permutation in one-line form")
    return sigma


def is_n_cycle(sigma: Sequence[int]) -> bool:
    n = len(sigma)
    seen, i = 0, 0
    for _ in range(n):
        i = sigma[i]
        seen += 1
        if i == 0:
            break
    return i == 0 and seen == n


def constant_shift(sigma: Sequence[int]) -> Optional[int]:
    """c with sigma(i) = i + c mod n for all i, if there is one."""
    n = len(sigma)
    c = sigma[0] % n
    if all((sigma[i] - i) % n == c for i in range(n)):
        return c
    return None


# -- specs and companion matrices ------------------------------------


class QuiverSpec:
    """Degree, permutation, potential, and shift power of one quiver."""

    __slots__ = ("n", "sigma", "f", "p")

    def __init__(self, n: int, sigma: Sequence[int], f: Series, p: int = 1):
        if n < 1:
            raise QuiverError("degree must be positive")
        sigma = _check_perm(n, sigma)
        if not isinstance(f, Series) or not f.is_laurent_polynomial():
            raise QuiverError("potential must be an exact unramified Laurent polynomial")
        if p < 1:
            raise QuiverError("shift power must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "p", int(p))

    def __setattr__(self, *_):
        raise AttributeError("QuiverSpec is immutable")

    @property
    def kind(self) -> str:
        return "string" if self.sigma == string_sigma(self.n) else "permutation"

    @classmethod
    def from_cycle(cls, n: int, cycle: Sequence[int], f: Series, p: int = 1):
        return cls(n, sigma_from_cycle(n, cycle), f, p)

    def __repr__(self):
        return f"<quiver n={self.n} {self.kind} p={self.p}>"


def validate_B(n, sigma, s, B) -> tuple[bool, list[str]]:
    """Check the congruence and top-coefficient conditions; list breaches.

    Slot (i, j) may only carry exponents congruent to sigma(i) - j mod n;
    the total degree must be exactly s, reached only in the slots whose
    congruence class is s mod n, all with one shared nonzero coefficient.
    """
    sigma = _check_perm(n, sigma)
    violations: list[str] = []
    rows = [list(r) for r in B]
    if len(rows) != n or any(len(r) != n for r in rows):
        return False, [f"matrix is not {n}x{n}"]
    if s < 0:
        return False, ["total degree must be nonnegative"]
    top: list[tuple[int, int, CycScalar]] = []
    for i in range(n):
        for j in range(n):
            e = rows[i][j]
            if not isinstance(e, Series) or not e.is_laurent_polynomial():
                violations.append(f"entry ({i + 1},{j + 1}) is not an exact polynomial")
                continue
            rep = (sigma[i] - j) % n
            for k, c in e.terms.items():
                if k < 0:
                    violations.append(
                        f"entry ({i + 1},{j + 1}): negative exponent {k}"
                    )
                if k > s:
                    violations.append(
                        f"entry ({i + 1},{j + 1}): exponent {k} above degree {s}"
                    )
                if k % n != rep:
                    violations.append(
                        f"entry ({i + 1},{j + 1}): exponent {k} not congruent to "
                        f"{rep} mod {n}"
                    )
            if rep == s % n:
                top.append((i, j, e.coeff(s)))
    if not top:
        violations.append(f"no slot admits the top degree {s}")
    else:
        b = top[0][2]
        if b.is_zero():
            violations.append("top coefficient vanishes; total degree is below s")
        for i, j, c in top[1:]:
            if c != b:
                violations.append(
                    f"entry ({i + 1},{j + 1}): top coefficient differs from "
                    f"entry ({top[0][0] + 1},{top[0][1] + 1})"
                )
    return not violations, violations


class CompanionMatrix:
    """A validated point of the (sigma, s) companion space."""

    __slots__ = ("n", "sigma", "s", "B", "top")

    def __init__(self, n: int, sigma: Sequence[int], s: int, B):
        ok, violations = validate_B(n, sigma, s, B)
        if not ok:
            raise InvalidCompanion("; ".join(violations))
        sigma = _check_perm(n, sigma)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "s", int(s))
        object.__setattr__(self, "B", tuple(tuple(r) for r in B))
        for j in range(n):
            if (sigma[0] - j) % n == s % n:
                object.__setattr__(self, "top", self.B[0][j].coeff(s))
                break

    def __setattr__(self, *_):
        raise AttributeError("CompanionMatrix is immutable")

    def __repr__(self):
        return f"<companion n={self.n} s={self.s}>"


class QuiverSolution:
    """Truncated flat-section data: one tail per vertex, plus the sheet."""

    __slots__ = ("phis", "order", "root_twist")

    def __init__(self, phis: Sequence[Series], order: int, root_twist: int):
        object.__setattr__(self, "phis", tuple(phis))
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "root_twist", int(root_twist))

    def __setattr__(self, *_):
        raise AttributeError("QuiverSolution is immutable")

    def __repr__(self):
        return f"<solution n={len(self.phis)} order={self.order} sheet={self.root_twist}>"


# -- congruence pattern ----------------------------------------------


def congruence_pattern(n: int, cycle: Sequence[int]) -> list[list[int]]:
    """Residue table of sigma(i) - j mod n, representatives in 1..n.

    The permutation comes in 1-based cycle notation, matching how these
    tables are usually displayed.
    """
    sigma = sigma_from_cycle(n, cycle)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            r = (sigma[i] - j) % n
            row.append(n if r == 0 else r)
        out.append(row)
    return out


# -- twisting --------------------------------------------------------


def twist_series(f: Series, n: int, k: int, i: int) -> Series:
    """zeta_n^{-ki} * f(zeta_n^i z)."""
    g = f.scale_substitute(zeta_pow(n, i % n))
    return g * zeta_pow(n, (-k * i) % n)


def twist_class(cls: OneDimClass, n: int, k: int, i: int) -> OneDimClass:
    """The same twist on class data; the residue picks up zeta^{(-1-k)i}."""
    return OneDimClass(
        twist_series(cls.polypart, n, k, i),
        cls.residue * zeta_pow(n, ((-1 - k) * i) % n),
    )


# -- normal forms ----------------------------------------------------


def ks_normal_form(spec: QuiverSpec) -> list[OneDimClass]:
    """Classes of a string quiver in closed form: zeta^i f(zeta^i z).

    This is the substitution route; it never touches a matrix, so it can
    cross-check the splitting route on companion input.
    """
    if spec.p != 1:
        raise UnsupportedP("closed-form classes are only available at p = 1")
    if spec.kind != "string":
        raise NotStringQuiver("closed-form classes need the string permutation")
    n = spec.n
    out = []
    for i in range(n):
        lam = twist_series(spec.f, n, -1, i)
        out.append(one_dim_class(lam))
    return out


def companion_connection(cm: CompanionMatrix) -> Connection:
    """The connection d/dz - B attached to a companion matrix."""
    ok, violations = validate_B(cm.n, cm.sigma, cm.s, cm.B)
    if not ok:
        raise InvalidCompanion("; ".join(violations))
    return Connection(tuple(tuple(-e for e in row) for row in cm.B))


def recover_potential(
    cm: CompanionMatrix, classes: Sequence[OneDimClass]
) -> tuple[Series, bool]:
    """Pick the distinguished class and read f off it.

    The class leading coefficients fan out as top * (root of unity), so
    exactly one of them equals the top constant itself; its polynomial
    part is f.  A nonzero residue is legal but worth surfacing: the
    returned flag marks that f had to absorb a z^-1 term.
    """
    hits = []
    for cls in classes:
        exp, lead = cls.polypart.leading()
        if exp == cm.s and lead == cm.top:
            hits.append(cls)
    if len(hits) != 1:
        raise QuiverError(
            f"expected one class with the top leading term, found {len(hits)}"
        )
    cls = hits[0]
    f = cls.polypart
    flagged = not cls.residue.is_zero()
    if flagged:
        f = f + Series({-1: cls.residue}, None, 1)
    return f, flagged


def companion_normal_form(
    cm: CompanionMatrix,
    f: Optional[Series] = None,
    depth: Optional[int] = None,
) -> tuple[OneDimClass, ...]:
    """Split the companion data into classes, certify, and self-check.

    The class data lives on the eigenvalue branches of B itself, so the
    split runs on d/dz + B; see the sign note on companion_connection's
    stored matrix.  When sigma is a constant-shift cycle the result is
    checked against the twist family of the recovered potential, and a
    supplied f must appear among the classes verbatim.
    """
    if not is_n_cycle(cm.sigma):
        raise QuiverError("companion normal form needs an n-cycle permutation")
    conn = Connection(cm.B)
    if depth is None:
        # every elimination pass at step k only touches exponents <= m-k,
        # so the diagonal through z^-1 is final once k passes m+1; depth 2
        # keeps a margin and the certificate below stays the arbiter
        depth = 2
    result = lt_split(conn, depth=depth)
    if not verify_split(conn, result):
        raise SplitError("gauge certificate rejected the split")
    classes = result.classes
    rec, _flagged = recover_potential(cm, classes)
    if f is not None:
        want = one_dim_class(f)
        if not any(cls == want for cls in classes):
            raise QuiverError("supplied potential is not among the classes")
    c = constant_shift(cm.sigma)
    if c is not None:
        base = one_dim_class(rec)
        family = [twist_class(base, cm.n, c, i) for i in range(cm.n)]
        if not class_multiset_equal(list(classes), family):
            raise QuiverError("classes do not form the twist family of f")
    return classes


# -- flat sections ---------------------------------------------------


def _coeff_matrices(cm: CompanionMatrix, f: Series) -> dict[int, list[list[CycScalar]]]:
    """Levels of f*Id - B, indexed by exponent."""
    n = cm.n
    out: dict[int, list[list[CycScalar]]] = {}

    def level(e):
        m = out.get(e)
        if m is None:
            m = [[CycScalar.zero() for _ in range(n)] for _ in range(n)]
            out[e] = m
        return m

    for e, c in f.terms.items():
        mat = level(e)
        for i in range(n):
            mat[i][i] = mat[i][i] + c
    for i in range(n):
        for j in range(n):
            for e, c in cm.B[i][j].terms.items():
                mat = level(e)
                mat[i][j] = mat[i][j] - c
    return {e: m for e, m in out.items() if any(not c.is_zero() for r in m for c in r)}


def _cycle_walk(cm: CompanionMatrix) -> list[int]:
    """Orbit of 0 under the top-slot permutation i -> sigma(i) - s."""
    n = cm.n
    pi = [(cm.sigma[i] - cm.s) % n for i in range(n)]
    walk, i = [0], pi[0]
    while i != 0:
        walk.append(i)
        i = pi[i]
    if len(walk) != n:
        raise IncompatibleLeading(
            "top permutation is not an n-cycle; no single-sheet leading data"
        )
    return walk


def solve_flat_section(
    cm: CompanionMatrix,
    f: Series,
    order: int,
    root_twist: int = 0,
) -> QuiverSolution:
    """Solve (d/dz + f*Id - B) phi = 0 down to z^-order, exactly.

    The top-level system is singular with a one-dimensional kernel (the
    sheet direction), so each new coefficient vector is determined only
    up to a kernel multiple; the missing scalars are pinned by the
    solvability conditions of later levels.  All of that is linear, so
    pending multiples ride along symbolically and a small elimination
    resolves them as their conditions arrive.  Multiples whose condition
    lies below the cutoff are set to zero, which is the normalization
    making the tail unique.
    """
    n = cm.n
    if order < 1:
        raise QuiverError("order must be positive")
    if not f.is_laurent_polynomial():
        raise QuiverError("potential must be an exact unramified Laurent polynomial")
    if f.terms and min(f.terms) < -1:
        raise QuiverError("potential may not go below z^-1")
    if not f.terms or max(f.terms) != cm.s:
        raise IncompatibleLeading("potential degree must match the matrix degree")
    t = root_twist % n
    b = cm.top
    if f.terms[cm.s] != b * zeta_pow(n, t):
        raise IncompatibleLeading(
            "leading coefficient of f is not top * zeta^root_twist"
        )

    walk = _cycle_walk(cm)
    # right kernel v and left kernel w of the top level, normalized at 0
    v = [CycScalar.zero()] * n
    w = [CycScalar.zero()] * n
    for m, i in enumerate(walk):
        v[i] = zeta_pow(n, (t * m) % n)
        w[i] = zeta_pow(n, (-t * m) % n)
    pi_of = {walk[m]: walk[(m + 1) % n] for m in range(n)}

    A = _coeff_matrices(cm, f)
    A.pop(cm.s, None)  # the singular top level is handled by hand
    binv = b.inverse()
    zt = zeta_pow(n, t)

    # the congruence shape leaves at most a B slot and a diagonal f term
    # per row and level, so matrices are kept as sparse rows
    Asp = {
        e: [
            [(j, c) for j, c in enumerate(row) if not c.is_zero()]
            for row in mat
        ]
        for e, mat in A.items()
    }
    zero = CycScalar.zero()

    def mat_vec(rows, vec):
        out = []
        for i in range(n):
            acc = zero
            for j, c in rows[i]:
                x = vec[j]
                if not x.is_zero():
                    acc = acc + c * x
            out.append(acc)
        return out

    def dot_w(vec):
        acc = CycScalar.zero()
        for i in range(n):
            if not vec[i].is_zero():
                acc = acc + w[i] * vec[i]
        return acc

    def solve_top(rhs):
        # particular solution of (top level) x = proj(rhs), walking the cycle
        r = list(rhs)
        r[0] = r[0] - dot_w(rhs)  # w[0] = 1, so this projects onto the range
        x = [CycScalar.zero()] * n
        for m in range(n - 1):
            i = walk[m]
            x[pi_of[i]] = zt * x[i] - binv * r[i]
        i = walk[n - 1]
        if b * (zt * x[i] - x[pi_of[i]]) != r[i]:
            raise Resonance("projected top-level system failed to close")
        return x

    # cs[m] maps symbol -> vector; symbol None is the known part, symbol u
    # is the coefficient of the still-free kernel multiple t_u
    cs: list[dict[Optional[int], list[CycScalar]]] = [{None: v}]
    pivots: dict[int, dict[Optional[int], CycScalar]] = {}
    solved: dict[int, CycScalar] = {}

    def reduce_row(row):
        for u in [u for u in row if u is not None]:
            piv = pivots.get(u)
            if piv is not None:
                c = row.pop(u, None)
                if c is not None and not c.is_zero():
                    for uu, cc in piv.items():
                        if uu == u:
                            continue
                        cur = row.get(uu, CycScalar.zero()) - c * cc
                        if cur.is_zero():
                            row.pop(uu, None)
                        else:
                            row[uu] = cur
        return {u: c for u, c in row.items() if not c.is_zero()}

    def settle():
        # substitute any pivot that became fully numeric into the tails
        progress = True
        while progress:
            progress = False
            for u, row in list(pivots.items()):
                if u in solved or any(uu is not None and uu != u for uu in row):
                    continue
                solved[u] = -row.get(None, CycScalar.zero())
                progress = True
        for vec in cs:
            for u in [u for u in vec if u is not None and u in solved]:
                col = vec.pop(u)
                val = solved[u]
                if not val.is_zero():
                    base = vec.get(None)
                    if base is None:
                        base = [CycScalar.zero()] * n
                        vec[None] = base
                    for i in range(n):
                        base[i] = base[i] + val * col[i]

    for m in range(1, order + 1):
        r: dict[Optional[int], list[CycScalar]] = {}
        for j in range(m):
            mat = Asp.get(cm.s - m + j)
            if mat is None:
                continue
            for u, vec in cs[j].items():
                img = mat_vec(mat, vec)
                acc = r.get(u)
                if acc is None:
                    r[u] = [-x for x in img]
                else:
                    for i in range(n):
                        acc[i] = acc[i] - img[i]
        j0 = m - cm.s - 1
        if 1 <= j0 < m:
            scale = CycScalar.rational(j0)
            for u, vec in cs[j0].items():
                acc = r.get(u)
                if acc is None:
                    r[u] = [scale * x for x in vec]
                else:
                    for i in range(n):
                        acc[i] = acc[i] + scale * vec[i]

        row = reduce_row({u: dot_w(vec) for u, vec in r.items()})
        unknowns = [u for u in row if u is not None]
        if unknowns:
            u0 = max(unknowns)
            inv = row[u0].inverse()
            newrow = {u: inv * c for u, c in row.items()}
            for piv in pivots.values():
                c = piv.pop(u0, None)
                if c is not None and not c.is_zero():
                    for uu, cc in newrow.items():
                        if uu == u0:
                            continue
                        cur = piv.get(uu, CycScalar.zero()) - c * cc
                        if cur.is_zero():
                            piv.pop(uu, None)
                        else:
                            piv[uu] = cur
            pivots[u0] = newrow
        elif not row.get(None, CycScalar.zero()).is_zero():
            raise Resonance(f"inconsistent level z^{cm.s - m}: f is not a branch")

        settle()
        new: dict[Optional[int], list[CycScalar]] = {
            u: solve_top(vec) for u, vec in r.items()
        }
        new[m] = v
        cs.append(new)

    settle()
    values: dict[int, CycScalar] = dict(solved)
    for u, row in pivots.items():
        if u not in values:
            # remaining entries are free symbols, normalized to zero
            values[u] = -row.get(None, CycScalar.zero())
    tails = []
    for vec in cs:
        total = list(vec.get(None, [CycScalar.zero()] * n))
        for u, col in vec.items():
            if u is None:
                continue
            val = values.get(u, CycScalar.zero())
            if not val.is_zero():
                for i in range(n):
                    total[i] = total[i] + val * col[i]
        tails.append(total)

    # independent residual check of every computed level
    full = dict(Asp)
    top_mat = [
        [b * (zt if i == j else CycScalar.zero()) for j in range(n)] for i in range(n)
    ]
    for m, i in enumerate(walk):
        top_mat[i][pi_of[i]] = top_mat[i][pi_of[i]] - b
    full[cm.s] = [
        [(j, c) for j, c in enumerate(row) if not c.is_zero()] for row in top_mat
    ]
    for l in range(cm.s - 1, cm.s - order - 1, -1):
        acc = [CycScalar.zero()] * n
        for e, mat in full.items():
            j = e - l
            if 0 <= j <= order:
                img = mat_vec(mat, tails[j])
                for i in range(n):
                    acc[i] = acc[i] + img[i]
        j0 = -l - 1
        if 1 <= j0 <= order:
            for i in range(n):
                acc[i] = acc[i] - CycScalar.rational(j0) * tails[j0][i]
        if any(not x.is_zero() for x in acc):
            raise Resonance(f"residual at level z^{l} after resolution")

    phis = []
    for i in range(n):
        terms = {}
        for m in range(order + 1):
            c = tails[m][i]
            if not c.is_zero():
                terms[-m] = c
        phis.append(Series(terms, -(order + 1), 1))
    return QuiverSolution(phis, order, t)


# -- verification ----------------------------------------------------


def _reduce_against(
    target: Series,
    j: int,
    phis: Sequence[Series],
    n: int,
    lead_inv: Optional[Sequence[CycScalar]] = None,
):
    """Greedy elimination of target against span(z^m phi_{j-m}).

    Relies on the big-cell shape: generator z^m phi_{j-m} leads with a
    nonzero constant times z^m, so exponents are killed from the top.
    Returns (floor exponent or None, worst surviving exponent or None).
    """
    floor = target.trunc_exp()
    if floor is not None and floor >= 0:
        return floor, "window"
    if lead_inv is None:
        lead_inv = [phi.coeff(0).inverse() for phi in phis]
    terms = dict(target.terms)
    ft = target.trunc  # raw key; generators shift their own trunc up by e
    top = max((k for k in terms if k >= 0), default=-1)
    for e in range(top, -1, -1):
        c = terms.get(e)
        if c is None or c.is_zero():
            continue
        idx = (j - e) % n
        phi = phis[idx]
        q = c * lead_inv[idx]
        for k, v in phi.terms.items():
            ke = k + e
            cur = terms.get(ke)
            terms[ke] = -(q * v) if cur is None else cur - q * v
        if phi.trunc is not None:
            gt = phi.trunc + e
            if ft is None or gt > ft:
                ft = gt
    bad = [k for k, c in terms.items() if not c.is_zero() and (ft is None or k > ft)]
    return (None if ft is None else Fraction(ft)), (max(bad) if bad else None)


def verify_quiver_solution(
    sol: QuiverSolution, spec: QuiverSpec, order: Optional[int] = None
) -> dict:
    """Constraint report for a claimed solution, independent of any matrix.

    Checks, per vertex i: the shift z^p phi_i lands in V_{i+1}; the
    operator (z^{1-p}/p) d/dz + f applied to phi_i lands in V_{sigma(i)};
    for string quivers the stabilization z^{kn+1} A V_i in V_i on the
    first n generators, k = 0, 1; and the sheet pattern of the constant
    terms.  Membership is greedy elimination against the big-cell
    generators.  The order argument is the demanded certification depth:
    every remainder must be provably zero on all exponents >= -order, so
    a solution whose tails are too short fails with a "window" entry
    rather than passing vacuously.
    """
    n = spec.n
    if order is None:
        order = sol.order
    report: dict = {"ok": True, "failures": [], "checks": 0, "floor": None}
    if len(sol.phis) != n:
        report["ok"] = False
        report["failures"].append((0, "shape", None))
        return report
    phis = sol.phis
    for i, phi in enumerate(phis):
        if phi.coeff(0).is_zero():
            report["ok"] = False
            report["failures"].append((i + 1, "unit-lead", 0))
            return report

    lead_inv = [phi.coeff(0).inverse() for phi in phis]

    def record(i, name, target, j):
        fl, bad = _reduce_against(target, j, phis, n, lead_inv)
        report["checks"] += 1
        if fl is not None and (report["floor"] is None or fl > report["floor"]):
            report["floor"] = fl
        if bad == "window" or (fl is not None and fl >= -order):
            report["ok"] = False
            report["failures"].append((i + 1, name + ":window", None))
            return
        if bad is not None:
            report["ok"] = False
            report["failures"].append((i + 1, name, bad))

    p = spec.p
    inv_p = CycScalar.rational(p).inverse()

    def apply_op(g: Series) -> Series:
        return g.derivative().shift(1 - p) * inv_p + spec.f * g

    for i in range(n):
        record(i, "shift", phis[i].shift(p), (i + 1) % n)
        record(i, "operator", apply_op(phis[i]), spec.sigma[i])
    if spec.kind == "string":
        for i in range(n):
            for m in range(n):
                h = apply_op(phis[(i - m) % n].shift(m))
                for k in (0, 1):
                    record(i, f"stabilization-{k}-{m}", h.shift(k * n + 1), i)

    if spec.f.terms:
        s = max(spec.f.terms)
        pi = [(spec.sigma[i] - s) % n for i in range(n)]
        walk, i = [0], pi[0]
        while i != 0 and len(walk) <= n:
            walk.append(i)
            i = pi[i]
        if len(walk) == n:
            t = sol.root_twist
            pattern_ok = all(
                phis[idx].coeff(0) == zeta_pow(n, (t * m) % n)
                for m, idx in enumerate(walk)
            )
            report["checks"] += 1
            if not pattern_ok:
                report["ok"] = False
                report["failures"].append((1, "sheet-pattern", 0))
    return report


def moduli_cover(cm: CompanionMatrix, f: Series, order: int = 10) -> list[QuiverSolution]:
    """All n flat-section sheets over one companion matrix.

    Sheet data: the potential twists through zeta^{-cj} f(zeta^j z) while
    B stays fixed, and the constant normalization walks the kernel
    directions.  Returned in root-twist order 0..n-1.

    Tails are computed with enough headroom that the full constraint set
    certifies at depth `order`; the string stabilization checks are the
    deepest consumers, needing s + 2n extra coefficients.
    """
    c = constant_shift(cm.sigma)
    if c is None:
        raise QuiverError("the cover is built from constant-shift permutations")
    n = cm.n
    headroom = cm.s + (2 * n if tuple(cm.sigma) == string_sigma(n) else 1)
    sols = []
    for j in range(n):
        fj = twist_series(f, n, c, j)
        tj = ((cm.s - c) * j) % n
        sols.append(solve_flat_section(cm, fj, order + headroom, root_twist=tj))
    sols.sort(key=lambda sol: sol.root_twist)
    if sorted(sol.root_twist for sol in sols) != list(range(n)):
        raise QuiverError("sheets do not exhaust the root twists")
    for a in range(n):
        for bb in range(a + 1, n):
            if sols[a].phis == sols[bb].phis:
                raise QuiverError("two sheets coincide")
    return sols


# -- curves and the potential dictionary -----------------------------


def classical_limit_curve(spec: QuiverSpec) -> dict[int, Series]:
    """prod_i (y - zeta^i f(zeta^i z)) as {y-degree: coefficient}.

    Galois symmetry of the product forces every coefficient down into the
    rationals; that is asserted, not assumed.
    """
    if spec.p != 1:
        raise UnsupportedP("curves are only defined at p = 1")
    if spec.kind != "string":
        raise NotStringQuiver("the curve formula needs the string permutation")
    n = spec.n
    poly = [Series.one()]
    for i in range(n):
        lam = twist_series(spec.f, n, -1, i)
        nxt = [Series.zero() for _ in range(len(poly) + 1)]
        for d, cser in enumerate(poly):
            nxt[d + 1] = nxt[d + 1] + cser
            nxt[d] = nxt[d] - lam * cser
        poly = nxt
    out = {}
    for d, cser in enumerate(poly):
        for k, c in cser.terms.items():
            if not c.is_rational():
                raise QuiverError(
                    f"curve coefficient at y^{d} z^{k} left the rationals"
                )
        out[d] = cser
    return out


def umm_ks_from_potential(t: dict) -> QuiverSpec:
    """Degree-2 string quiver from odd coupling data t_{2i+1}.

    The dictionary is a_{2i} = -(2i+1) t_{2i+1}: each odd coupling feeds
    the even coefficient one slot below it.
    """
    terms = {}
    for key, val in t.items():
        key = int(key)
        if key < 1 or key % 2 == 0:
            raise QuiverError(f"coupling index {key} is not a positive odd integer")
        c = CycScalar.rational(val) if not isinstance(val, CycScalar) else val
        if not c.is_rational():
            raise QuiverError("couplings must be rational")
        if not c.is_zero():
            terms[key - 1] = -c * CycScalar.rational(key)
    if not terms:
        raise EmptyPotential("all couplings vanish")
    f = Series(terms, None, 1)
    return QuiverSpec(2, string_sigma(2), f, 1)


# -- seeded generation -----------------------------------------------


def gen_valid_B(n: int, sigma: Sequence[int], s: int, seed) -> CompanionMatrix:
    """Random companion matrix: unit top, small rational lower slots.

    Every congruence-permitted slot below the top gets a coefficient
    uniform in -9..9 (zero allowed); the top congruence class gets the
    constant 1.  Deterministic per (seed, n, sigma, s).
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    sigma = _check_perm(n, sigma)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            rep = (sigma[i] - j) % n
            terms = {}
            e = rep
            while e <= s:
                if e == s:
                    terms[e] = CycScalar.one()
                else:
                    c = rng.randint(-9, 9)
                    if c:
                        terms[e] = CycScalar.rational(c)
                e += n
            row.append(Series(terms, None, 1))
        rows.append(row)
    return CompanionMatrix(n, sigma, s, rows)
