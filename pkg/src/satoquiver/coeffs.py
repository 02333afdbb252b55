"""Exact scalars: rationals and cyclotomic numbers.

Everything downstream (series, operators, connections) is built over the
field Q(zeta_n), represented as Q[x] modulo the n-th cyclotomic polynomial.
Coefficients are arbitrary-precision rationals (gmpy2.mpq in the power
basis, `fractions.Fraction` accepted everywhere on input); no floating
point is used anywhere.
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction
from typing import Iterable, Union

from gmpy2 import mpq, mpz

Rational = Fraction

MAX_ORDER = 360

RationalLike = Union[int, Fraction, mpq, mpz]


class CoeffError(ValueError):
    pass


class OrderMismatch(CoeffError):
    """Arithmetic between incompatible cyclotomic orders."""


class DivisionByZero(CoeffError, ZeroDivisionError):
    pass


def _divisors(n: int) -> list[int]:
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


def _polydiv_exact(num: list[int], den: tuple[int, ...]) -> list[int]:
    # den is monic; division must be exact (used for x^n - 1 by cyclotomic factors)
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        out[i - dd] = c
        if c:
            for j, dj in enumerate(den):
                num[i - dd + j] -= c * dj
    if any(num[:dd]):
        raise ArithmeticError("inexact cyclotomic division")
    return out


@functools.lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Monic integer coefficients of Phi_n, ascending degree."""
    if n < 1:
        raise CoeffError("order must be >= 1")
    if n > MAX_ORDER:
        raise CoeffError(f"order {n} above supported bound {MAX_ORDER}")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n)[:-1]:
        poly = _polydiv_exact(poly, cyclotomic_poly(d))
    return tuple(poly)


@functools.lru_cache(maxsize=None)
def _reduction_rows(n: int) -> tuple[tuple[int, ...], ...]:
    # row r = coefficients of x^(phi+r) mod Phi_n in the power basis
    phi = len(cyclotomic_poly(n)) - 1
    base = [-c for c in cyclotomic_poly(n)[:-1]]
    rows = [tuple(base)]
    for _ in range(1, phi):
        prev = rows[-1]
        shifted = [0] + list(prev[:-1])
        top = prev[-1]
        if top:
            for j in range(phi):
                shifted[j] += top * base[j]
        rows.append(tuple(shifted))
    return tuple(rows)


def _phi_deg(n: int) -> int:
    return len(cyclotomic_poly(n)) - 1


@functools.lru_cache(maxsize=None)
def _trace_weight(d: int) -> mpq:
    # mu(d)/phi(d) = normalized trace of a primitive d-th root of unity
    mu, phi, m, p = 1, 1, d, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return mpq(0)
            mu = -mu
            phi *= p - 1
        else:
            p += 1
    if m > 1:
        mu = -mu
        phi *= m - 1
    return mpq(mu, phi)


_ZERO = mpq(0)
_ONE = mpq(1)

_ZERO_TUPLES = tuple((_ZERO,) * k for k in range(8))


def _zeros(k: int) -> tuple:
    if k < 8:
        return _ZERO_TUPLES[k]
    return (_ZERO,) * k


class CycScalar:
    """Element of Q(zeta_n) in the power basis of Q[x]/Phi_n(x).

    `order` is n and `coeffs` has length deg Phi_n.  Two scalars of the
    same order are equal iff their coefficient vectors are equal; the
    basis representation is canonical.  Rational values promote freely
    into any order, but arithmetic between non-rational scalars of
    different orders raises OrderMismatch rather than guessing an
    implicit compositum.
    """

    __slots__ = ("order", "coeffs", "_rat")

    def __init__(self, order: int, coeffs: Iterable[RationalLike]):
        phi = _phi_deg(order)
        cs = [c if type(c) is mpq else mpq(c) for c in coeffs]
        if len(cs) > phi:
            cs = _reduce_mod_phi(order, cs)
        cs += [_ZERO] * (phi - len(cs))
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "_rat", cs[0] if not any(cs[1:]) else None)

    def __setattr__(self, *_):
        raise AttributeError("CycScalar is immutable")

    @staticmethod
    def _make(order: int, coeffs: tuple) -> "CycScalar":
        # raw constructor: coeffs must already be a full-length tuple of
        # mpq rationals in the power basis, reduced mod Phi_n
        self = object.__new__(CycScalar)
        sa = object.__setattr__
        sa(self, "order", order)
        sa(self, "coeffs", coeffs)
        rat = coeffs[0]
        for c in coeffs[1:]:
            if c:
                rat = None
                break
        sa(self, "_rat", rat)
        return self

    @staticmethod
    def _make_known(order: int, coeffs: tuple, rat) -> "CycScalar":
        # like _make but the caller already knows the rational value (or None)
        self = object.__new__(CycScalar)
        sa = object.__setattr__
        sa(self, "order", order)
        sa(self, "coeffs", coeffs)
        sa(self, "_rat", rat)
        return self

    def _scaled(self, q: mpq) -> "CycScalar":
        if q == 1:
            return self
        phi = len(self.coeffs)
        if not q:
            return CycScalar._make_known(self.order, _zeros(phi), _ZERO)
        r = self._rat
        if r is not None:
            v = r * q
            return CycScalar._make_known(self.order, (v,) + _zeros(phi - 1), v)
        return CycScalar._make_known(
            self.order, tuple([x * q if x else _ZERO for x in self.coeffs]), None
        )

    # -- constructors ------------------------------------------------

    @staticmethod
    def rational(value: RationalLike) -> "CycScalar":
        return CycScalar(1, [mpq(value)])

    @staticmethod
    def zero(order: int = 1) -> "CycScalar":
        return CycScalar(order, [])

    @staticmethod
    def one(order: int = 1) -> "CycScalar":
        return CycScalar(order, [_ONE])

    # -- predicates --------------------------------------------------

    def is_zero(self) -> bool:
        return self._rat is not None and not self._rat

    def is_rational(self) -> bool:
        return self._rat is not None

    def is_integer(self) -> bool:
        return self._rat is not None and self._rat.denominator == 1

    def as_fraction(self) -> Fraction:
        if self._rat is None:
            raise CoeffError(f"{self} is not rational")
        return Fraction(int(self._rat.numerator), int(self._rat.denominator))

    # -- promotion ---------------------------------------------------

    def to_order(self, m: int) -> "CycScalar":
        """Re-express in Q(zeta_m); requires order | m."""
        n = self.order
        if m == n:
            return self
        if self.is_rational():
            return CycScalar(m, [self.coeffs[0]])
        if m % n != 0:
            raise OrderMismatch(f"cannot embed order {n} into order {m}")
        step = m // n
        acc = CycScalar.zero(m)
        for k, c in enumerate(self.coeffs):
            if c:
                acc = acc + zeta_pow(m, k * step) * c
        return acc

    def _pair(self, other) -> tuple["CycScalar", "CycScalar"]:
        if isinstance(other, (int, Fraction, mpq, mpz)):
            other = CycScalar(self.order, [mpq(other)])
        if not isinstance(other, CycScalar):
            return NotImplemented, NotImplemented
        if self.order == other.order:
            return self, other
        if self.is_rational():
            return CycScalar(other.order, [self.coeffs[0]]), other
        if other.is_rational():
            return self, CycScalar(self.order, [other.coeffs[0]])
        raise OrderMismatch(
            f"orders {self.order} and {other.order}: promote explicitly via to_order"
        )

    # -- arithmetic --------------------------------------------------

    def __add__(self, other):
        t = type(other)
        if t is CycScalar:
            ra, rb = self._rat, other._rat
            if other.order == self.order:
                if ra is not None and rb is not None:
                    v = ra + rb
                    return CycScalar._make_known(
                        self.order, (v,) + _zeros(len(self.coeffs) - 1), v
                    )
                return CycScalar._make(
                    self.order,
                    tuple([x + y for x, y in zip(self.coeffs, other.coeffs)]),
                )
            if rb is not None:
                if not rb:
                    return self
                cs = list(self.coeffs)
                cs[0] = cs[0] + rb
                return CycScalar._make_known(
                    self.order, tuple(cs), None if ra is None else cs[0]
                )
            if ra is not None:
                if not ra:
                    return other
                cs = list(other.coeffs)
                cs[0] = cs[0] + ra
                return CycScalar._make_known(other.order, tuple(cs), None)
            raise OrderMismatch(
                f"orders {self.order} and {other.order}: promote explicitly via to_order"
            )
        if t is int or t is mpq or t is Fraction or t is mpz:
            if not other:
                return self
            cs = list(self.coeffs)
            cs[0] = cs[0] + (mpq(other) if t is Fraction else other)
            return CycScalar._make_known(
                self.order, tuple(cs), None if self._rat is None else cs[0]
            )
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        return CycScalar(a.order, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        r = self._rat
        return CycScalar._make_known(
            self.order,
            tuple([-x if x else _ZERO for x in self.coeffs]),
            None if r is None else -r,
        )

    def __sub__(self, other):
        t = type(other)
        if t is CycScalar:
            if other.order == self.order:
                ra, rb = self._rat, other._rat
                if ra is not None and rb is not None:
                    v = ra - rb
                    return CycScalar._make_known(
                        self.order, (v,) + _zeros(len(self.coeffs) - 1), v
                    )
                return CycScalar._make(
                    self.order,
                    tuple([x - y for x, y in zip(self.coeffs, other.coeffs)]),
                )
            return self + (-other)
        if t is int or t is mpq or t is Fraction or t is mpz:
            if not other:
                return self
            cs = list(self.coeffs)
            cs[0] = cs[0] - (mpq(other) if t is Fraction else other)
            return CycScalar._make_known(
                self.order, tuple(cs), None if self._rat is None else cs[0]
            )
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        return CycScalar(a.order, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        t = type(other)
        if t is CycScalar:
            if other._rat is not None:
                if self._rat is not None:
                    n = other.order if self.order != other.order else self.order
                    phi = len(other.coeffs) if n == other.order else len(self.coeffs)
                    v = self._rat * other._rat
                    return CycScalar._make_known(n, (v,) + _zeros(phi - 1), v)
                return self._scaled(other._rat)
            if self._rat is not None:
                return other._scaled(self._rat)
            if self.order != other.order:
                raise OrderMismatch(
                    f"orders {self.order} and {other.order}: promote explicitly via to_order"
                )
            return CycScalar._make(
                self.order, _conv_reduce(self.order, self.coeffs, other.coeffs)
            )
        if t is int or t is mpq or t is Fraction or t is mpz:
            if not other:
                phi = len(self.coeffs)
                return CycScalar._make_known(self.order, _zeros(phi), _ZERO)
            return self._scaled(other if t is mpq else mpq(other))
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        if a.order == 1:
            return CycScalar(1, [a.coeffs[0] * b.coeffs[0]])
        ac, bc = a.coeffs, b.coeffs
        phi = len(ac)
        prod = [_ZERO] * (2 * phi - 1)
        for i, x in enumerate(ac):
            if x:
                for j, y in enumerate(bc):
                    if y:
                        prod[i + j] += x * y
        return CycScalar(a.order, _reduce_mod_phi(a.order, prod))

    __rmul__ = __mul__

    def inverse(self) -> "CycScalar":
        if self._rat is not None:
            if not self._rat:
                raise DivisionByZero("inverse of zero")
            v = 1 / self._rat
            return CycScalar._make_known(
                self.order, (v,) + _zeros(len(self.coeffs) - 1), v
            )
        nz = [(k, c) for k, c in enumerate(self.coeffs) if c]
        if len(nz) == 1:
            # monomial c*zeta^k: invert by the conjugate power, no Euclid
            k, c = nz[0]
            return zeta_pow(self.order, self.order - k)._scaled(1 / c)
        inv = _invert_mod_phi(self.order, list(self.coeffs))
        return CycScalar(self.order, inv)

    def __truediv__(self, other):
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        if b.is_zero():
            raise DivisionByZero("division by zero scalar")
        return a * b.inverse()

    def __rtruediv__(self, other):
        return CycScalar(self.order, [mpq(other)]) / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = CycScalar.one(self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- comparison and hashing --------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, mpq, mpz)):
            return self._rat is not None and self._rat == mpq(other)
        if not isinstance(other, CycScalar):
            return NotImplemented
        if self.order == other.order:
            return self.coeffs == other.coeffs
        if self.is_rational() or other.is_rational():
            return (
                self.is_rational()
                and other.is_rational()
                and self.coeffs[0] == other.coeffs[0]
            )
        # equality is mathematical, not representational: the same number
        # reached through different towers (say zeta_20^4 vs zeta_5) must
        # compare equal, so promote both to the joint order
        m = lcm_order(self.order, other.order)
        if m > MAX_ORDER:
            return False
        return self.to_order(m).coeffs == other.to_order(m).coeffs

    def _normalized_trace(self) -> mpq:
        # Tr(a)/phi(order): stable under embedding into larger orders,
        # which makes it a legal hash ingredient for cross-order equality
        n = self.order
        t = mpq(0)
        for k, c in enumerate(self.coeffs):
            if c:
                t += c * _trace_weight(n // math.gcd(n, k))
        return t

    def __hash__(self):
        return hash(self._normalized_trace())

    def __bool__(self):
        return not self.is_zero()

    # -- text --------------------------------------------------------

    def __repr__(self):
        return f"CycScalar({self.order}, {render_scalar(self)!r})"

    def __str__(self):
        return render_scalar(self)

    def key(self):
        """Canonical sortable key: rationals collapse to order 1."""
        if self.is_rational():
            c = self.coeffs[0]
            return (1, ((int(c.numerator), int(c.denominator)),))
        return (
            self.order,
            tuple((int(c.numerator), int(c.denominator)) for c in self.coeffs),
        )


def _conv_reduce(n: int, ac: tuple, bc: tuple) -> tuple:
    # multiply two reduced power-basis vectors: convolve, then fold the
    # overflow degrees back with the precomputed integer rows
    phi = len(ac)
    prod = [_ZERO] * (2 * phi - 1)
    for i, x in enumerate(ac):
        if x:
            for j, y in enumerate(bc):
                if y:
                    prod[i + j] += x * y
    rows = _reduction_rows(n)
    out = prod[:phi]
    for d in range(phi, 2 * phi - 1):
        c = prod[d]
        if c:
            row = rows[d - phi]
            for j in range(phi):
                if row[j]:
                    out[j] += c * row[j]
    return tuple(out)


def _reduce_mod_phi(n: int, prod: list[mpq]) -> list[mpq]:
    phi = _phi_deg(n)
    if len(prod) <= phi:
        return prod
    rows = list(_reduction_rows(n))
    while len(rows) < len(prod) - phi:
        # extend the x^(phi+r) table past the precomputed window
        prev = rows[-1]
        shifted = [0] + list(prev[:-1])
        top = prev[-1]
        if top:
            base = rows[0]
            for j in range(phi):
                shifted[j] += top * base[j]
        rows.append(tuple(shifted))
    out = list(prod[:phi]) + [_ZERO] * (phi - len(prod))
    for d in range(phi, len(prod)):
        c = prod[d]
        if c:
            row = rows[d - phi]
            for j in range(phi):
                if row[j]:
                    out[j] += c * row[j]
    return out


def _invert_mod_phi(n: int, a: list[mpq]) -> list[mpq]:
    # extended Euclid in Q[x] against Phi_n; Phi_n is irreducible over Q,
    # so any nonzero a is invertible
    def trim(p):
        while p and p[-1] == 0:
            p.pop()
        return p

    def polymod(p, q):
        p = list(p)
        dq = len(q) - 1
        inv_lead = 1 / q[-1]
        while len(p) - 1 >= dq and p:
            c = p[-1] * inv_lead
            shift = len(p) - 1 - dq
            for j in range(len(q)):
                p[shift + j] -= c * q[j]
            trim(p)
            if not p:
                break
        return p

    def polymul(p, q):
        out = [_ZERO] * (len(p) + len(q) - 1)
        for i, x in enumerate(p):
            if x:
                for j, y in enumerate(q):
                    if y:
                        out[i + j] += x * y
        return trim(out)

    def polysub(p, q):
        out = [_ZERO] * max(len(p), len(q))
        for i, x in enumerate(p):
            out[i] += x
        for i, y in enumerate(q):
            out[i] -= y
        return trim(out)

    def polydivmod(p, q):
        p = list(p)
        dq = len(q) - 1
        if len(p) - 1 < dq:
            return [], p
        quot = [_ZERO] * (len(p) - dq)
        inv_lead = 1 / q[-1]
        for i in range(len(p) - 1, dq - 1, -1):
            if i >= len(p):
                continue
            if i - dq < 0:
                break
            c = p[i] * inv_lead
            if c:
                quot[i - dq] = c
                for j in range(len(q)):
                    p[i - dq + j] -= c * q[j]
        return trim(quot), trim(p)

    phi_poly = [mpq(c) for c in cyclotomic_poly(n)]
    r0, r1 = phi_poly, trim(list(a))
    s0, s1 = [], [_ONE]
    while r1:
        q, r = polydivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, polysub(s0, polymul(q, s1))
    # r0 = gcd (a nonzero constant, Phi_n irreducible), s0 * a = r0 mod Phi_n
    if len(r0) != 1:
        raise DivisionByZero("scalar is a zero divisor; Phi_n reduction broken")
    c = 1 / r0[0]
    inv = [x * c for x in s0]
    return polymod(inv, phi_poly) or [_ZERO]


@functools.lru_cache(maxsize=None)
def zeta_pow(n: int, k: int) -> CycScalar:
    """zeta_n^k as an exact CycScalar of order n."""
    k %= n
    coeffs = [_ZERO] * (k + 1)
    coeffs[k] = _ONE
    return CycScalar(n, coeffs)


def lcm_order(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def common_order(x: CycScalar, y: CycScalar) -> int:
    """Smallest working order containing both of two scalars."""
    ox = 1 if x.is_rational() else x.order
    oy = 1 if y.is_rational() else y.order
    return lcm_order(ox, oy)


# -- text forms ------------------------------------------------------


def render_rational(q: RationalLike) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def render_scalar(a: CycScalar) -> str:
    """Human form like '1/2 + 3*z5^2'; zN stands for a primitive N-th root."""
    if a.is_zero():
        return "0"
    parts = []
    for k, c in enumerate(a.coeffs):
        if c == 0:
            continue
        if k == 0:
            body = render_rational(abs(c))
        else:
            zk = f"z{a.order}" if k == 1 else f"z{a.order}^{k}"
            body = zk if abs(c) == 1 else f"{render_rational(abs(c))}*{zk}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def parse_scalar(text: str, order: int | None = None) -> CycScalar:
    """Parse 'a0 + a1*zN + a2*zN^2' (or a bare rational)."""
    text = text.strip()
    if not text:
        raise CoeffError("empty scalar")
    chunks: list[tuple[int, str]] = []
    cur_sign = 1
    # split on top-level + and - (no parens inside scalar text)
    buf = ""
    for ch in text:
        if ch in "+-" and buf.strip():
            chunks.append((cur_sign, buf.strip()))
            cur_sign = 1 if ch == "+" else -1
            buf = ""
        elif ch in "+-" and not buf.strip():
            cur_sign *= 1 if ch == "+" else -1
        else:
            buf += ch
    if buf.strip():
        chunks.append((cur_sign, buf.strip()))
    found_order = order
    terms: list[tuple[Fraction, int]] = []
    for sgn, chunk in chunks:
        coeff = Fraction(1)
        power = 0
        for factor in chunk.split("*"):
            factor = factor.strip()
            if factor.startswith("z") and factor[1:].replace("^", "").replace("-", "").isdigit():
                if "^" in factor:
                    zpart, kpart = factor.split("^")
                    power += int(kpart)
                else:
                    zpart = factor
                    power += 1
                this_order = int(zpart[1:])
                if found_order is None:
                    found_order = this_order
                elif found_order != this_order and this_order != 1:
                    raise OrderMismatch(
                        f"mixed orders {found_order} and {this_order} in {text!r}"
                    )
            else:
                coeff *= Fraction(factor)
        terms.append((Fraction(sgn) * coeff, power))
    n = found_order or 1
    acc = CycScalar.zero(n)
    for coeff, power in terms:
        acc = acc + zeta_pow(n, power) * coeff
    return acc
