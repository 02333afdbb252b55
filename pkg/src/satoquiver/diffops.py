"""Normal-ordered differential operators over the exact scalars.

Elements are finite sums  c * h^e * z^a * D^b  with a in Z, b >= 0,
e >= 0, where D is d/dz and h is a central formal parameter.  Products
are rewritten into this normal order (all z-powers to the left of all
D-powers) with exact integer arithmetic.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Optional, Union

from .coeffs import CycScalar, RationalLike, render_scalar
from .series import Series

Key = tuple[int, int, int]  # (z-exponent, D-order, h-degree)


class OpError(ValueError):
    pass


class BadDegreeRange(OpError):
    pass


def _coerce(c) -> CycScalar:
    if isinstance(c, CycScalar):
        return c
    return CycScalar.rational(Fraction(c))


def _falling(a: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= a - j
    return out


class DiffOp:
    """Immutable normal-ordered operator; all arithmetic allocates."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Key, CycScalar]):
        clean = {}
        for (a, b, e), c in terms.items():
            if b < 0 or e < 0:
                raise OpError(f"bad term key ({a}, {b}, {e})")
            if not c.is_zero():
                clean[(int(a), int(b), int(e))] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *_):
        raise AttributeError("DiffOp is immutable")

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero() -> "DiffOp":
        return DiffOp({})

    @staticmethod
    def one() -> "DiffOp":
        return DiffOp({(0, 0, 0): CycScalar.one()})

    @staticmethod
    def scalar(c) -> "DiffOp":
        return DiffOp({(0, 0, 0): _coerce(c)})

    @staticmethod
    def z_pow(a: int, coeff=1) -> "DiffOp":
        return DiffOp({(a, 0, 0): _coerce(coeff)})

    @staticmethod
    def d_op(b: int = 1, coeff=1) -> "DiffOp":
        return DiffOp({(0, b, 0): _coerce(coeff)})

    @staticmethod
    def hbar(e: int = 1, coeff=1) -> "DiffOp":
        return DiffOp({(0, 0, e): _coerce(coeff)})

    @staticmethod
    def from_series(s: Series) -> "DiffOp":
        """Multiplication operator by an exact Laurent polynomial."""
        if not s.is_exact():
            raise OpError("multiplication operator needs an exact series")
        if s.ram != 1:
            raise OpError("multiplication operator needs integer exponents")
        return DiffOp({(k, 0, 0): c for k, c in s.terms.items()})

    # -- predicates --------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def hbar_component(self, e: int) -> "DiffOp":
        """Slice of exact h-degree e, with the h factor stripped."""
        return DiffOp(
            {(a, b, 0): c for (a, b, ee), c in self.terms.items() if ee == e}
        )

    def max_hbar_degree(self) -> int:
        return max((e for (_, _, e) in self.terms), default=0)

    # -- arithmetic --------------------------------------------------

    def __add__(self, other: "DiffOp") -> "DiffOp":
        if not isinstance(other, DiffOp):
            return NotImplemented
        terms = dict(self.terms)
        for k, c in other.terms.items():
            cur = terms.get(k)
            terms[k] = c if cur is None else cur + c
        return DiffOp(terms)

    def __neg__(self) -> "DiffOp":
        return DiffOp({k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self + (-other)

    def scalar_mul(self, c) -> "DiffOp":
        c = _coerce(c)
        return DiffOp({k: c * v for k, v in self.terms.items()})

    def __mul__(self, other: "DiffOp") -> "DiffOp":
        if not isinstance(other, DiffOp):
            return NotImplemented
        out: dict[Key, CycScalar] = {}
        for (a1, b1, e1), c1 in self.terms.items():
            for (a2, b2, e2), c2 in other.terms.items():
                c = c1 * c2
                e = e1 + e2
                # D^b1 z^a2 = sum_k C(b1,k) a2^(falling k) z^(a2-k) D^(b1-k)
                for k in range(b1 + 1):
                    w = comb(b1, k) * _falling(a2, k)
                    if w == 0:
                        continue
                    key = (a1 + a2 - k, b1 + b2 - k, e)
                    add = c * w
                    cur = out.get(key)
                    out[key] = add if cur is None else cur + add
        return DiffOp(out)

    def __pow__(self, n: int) -> "DiffOp":
        if n < 0:
            raise OpError("negative operator powers are not defined")
        out = DiffOp.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffOp):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"DiffOp({render_op(self)!r})"


def commutator(a: DiffOp, b: DiffOp) -> DiffOp:
    return a * b - b * a


def apply_op(op: DiffOp, s: Series, hbar: Optional[Union[CycScalar, RationalLike]] = None) -> Series:
    """Act on a series; the h parameter must be specialized if present."""
    if hbar is None and op.max_hbar_degree() > 0:
        raise OpError("operator carries h; supply a value to apply it")
    hv = None if hbar is None else _coerce(hbar)
    out = Series.zero()
    # cache D^b s across terms sharing b
    derivs: dict[int, Series] = {0: s}
    for (a, b, e), c in sorted(op.terms.items(), key=lambda kv: kv[0][1]):
        while b not in derivs:
            top = max(derivs)
            derivs[top + 1] = derivs[top].derivative()
        piece = derivs[b]
        coeff = c if e == 0 else c * hv**e
        out = out + piece.scalar_mul(coeff).shift(a)
    return out


# -- the named operators ---------------------------------------------


def kac_schwarz(p: int, q: int, a: Optional[Mapping[int, object]] = None) -> DiffOp:
    """(1/p) z^(1-p) D + (1-p)/(2p) z^(-p) + sum a_i z^i over -p < i <= q.

    With no coefficient map the top term defaults to z^q alone.
    """
    if p < 1:
        raise BadDegreeRange("p must be positive")
    if a is None:
        a = {q: 1}
    terms: dict[Key, CycScalar] = {
        (1 - p, 1, 0): CycScalar.rational(Fraction(1, p)),
    }
    if p != 1:
        terms[(-p, 0, 0)] = CycScalar.rational(Fraction(1 - p, 2 * p))
    for i, c in a.items():
        if not (-p < i <= q):
            raise BadDegreeRange(f"potential index {i} outside ({-p}, {q}]")
        c = _coerce(c)
        if c.is_zero():
            continue
        key = (i, 0, 0)
        cur = terms.get(key)
        terms[key] = c if cur is None else cur + c
    return DiffOp(terms)


def ks_commutator_identity(p: int, q: int, i: int) -> DiffOp:
    """[A, z^(p(i+1)) A/(i+1)] - z^(pi) A; identically zero."""
    A = kac_schwarz(p, q)
    lhs = commutator(A, (DiffOp.z_pow(p * (i + 1)) * A).scalar_mul(Fraction(1, i + 1)))
    return lhs - DiffOp.z_pow(p * i) * A


def witt_op(n: int) -> DiffOp:
    """l_n = -z^n (z D + (1+n)/2)."""
    return DiffOp(
        {
            (n + 1, 1, 0): CycScalar.rational(-1),
            (n, 0, 0): CycScalar.rational(Fraction(-(1 + n), 2)),
        }
    )


def witt_relation(m: int, n: int) -> DiffOp:
    """[l_m, l_n] - (m - n) l_{m+n}; identically zero."""
    return commutator(witt_op(m), witt_op(n)) - witt_op(m + n).scalar_mul(m - n)


# -- text form -------------------------------------------------------


def _render_factor(c: CycScalar, tail: str) -> str:
    body = render_scalar(c)
    if not tail:
        return body
    if body == "1":
        return tail
    if body == "-1":
        return "-" + tail
    if ("+" in body[1:] or "-" in body[1:]) or " " in body:
        body = f"({body})"
    return f"{body}*{tail}"


def render_op(op: DiffOp) -> str:
    if not op.terms:
        return "0"
    # highest derivative order first, then h-grading, then low z-powers
    keys = sorted(op.terms, key=lambda k: (-k[1], -k[2], k[0]))
    parts = []
    for a, b, e in keys:
        factors = []
        if a:
            factors.append("z" if a == 1 else f"z^{a}")
        if e:
            factors.append("h" if e == 1 else f"h^{e}")
        if b:
            factors.append("D" if b == 1 else f"D^{b}")
        text = _render_factor(op.terms[(a, b, e)], "*".join(factors))
        parts.append(text)
    out = parts[0]
    for p in parts[1:]:
        if p.startswith("-"):
            out += " - " + p[1:]
        else:
            out += " + " + p
    return out
