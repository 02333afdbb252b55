"""Truncated Laurent and Puiseux series with exact coefficients.

Series here live at infinity: they descend in powers of 1/z, and a
truncation marker L means "exact for all exponents > L".  Exponents may
be fractional with a fixed ramification index e, in which case they lie
in (1/e)Z.  Internally an exponent q is stored as the integer key q*e,
so arithmetic never touches Fraction exponents in hot loops.

All coefficient arithmetic is exact (rational or cyclotomic); there is
deliberately no floating point anywhere in this module.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional, Union

from .coeffs import (
    CoeffError,
    CycScalar,
    DivisionByZero,
    render_rational,
    parse_scalar,
    zeta_pow,
)

ScalarLike = Union[int, Fraction, CycScalar]


class SeriesError(ValueError):
    pass


class ZeroScale(SeriesError):
    """Substitution z -> c*z with c = 0."""


class NotInvertible(SeriesError):
    """No compositional inverse in the supported cases."""


class ZeroSeries(SeriesError):
    """Leading term requested of a series with no visible terms."""


def _scalar(c: ScalarLike) -> CycScalar:
    if isinstance(c, CycScalar):
        return c
    return CycScalar.rational(Fraction(c))


class Series:
    """Sparse exact series sum_q c_q z^q, descending, possibly truncated.

    terms maps scaled exponents (q*ram) to nonzero CycScalar values and
    trunc is a scaled lower bound or None for a fully exact series.
    """

    __slots__ = ("ram", "terms", "trunc")

    def __init__(
        self,
        terms: dict[int, CycScalar] | None = None,
        trunc: int | None = None,
        ram: int = 1,
    ):
        if ram < 1:
            raise SeriesError("ramification index must be >= 1")
        cleaned = {}
        if terms:
            for k, v in terms.items():
                if trunc is not None and k <= trunc:
                    continue
                if isinstance(v, CycScalar):
                    if not v.is_zero():
                        cleaned[k] = v
                else:
                    v = _scalar(v)
                    if not v.is_zero():
                        cleaned[k] = v
        # reduce the ramification index when every key allows it
        if ram > 1:
            g = ram
            for k in cleaned:
                g = math.gcd(g, k)
                if g == 1:
                    break
            if g > 1 and trunc is not None:
                g = math.gcd(g, trunc)
            if g > 1:
                cleaned = {k // g: v for k, v in cleaned.items()}
                if trunc is not None:
                    trunc //= g
                ram //= g
        object.__setattr__(self, "ram", ram)
        object.__setattr__(self, "terms", cleaned)
        object.__setattr__(self, "trunc", trunc)

    def __setattr__(self, *_):
        raise AttributeError("Series is immutable")

    # -- constructors ------------------------------------------------

    @staticmethod
    def zero(trunc: int | None = None, ram: int = 1) -> "Series":
        return Series({}, trunc, ram)

    @staticmethod
    def one() -> "Series":
        return Series({0: CycScalar.one()})

    @staticmethod
    def monomial(exp: Union[int, Fraction], coeff: ScalarLike = 1) -> "Series":
        exp = Fraction(exp)
        ram = exp.denominator
        return Series({exp.numerator: _scalar(coeff)}, None, ram)

    @staticmethod
    def from_pairs(
        pairs: Iterable[tuple[Union[int, Fraction], ScalarLike]],
        trunc: Union[int, Fraction, None] = None,
    ) -> "Series":
        pairs = [(Fraction(e), _scalar(c)) for e, c in pairs]
        ram = 1
        for e, _ in pairs:
            ram = ram * e.denominator // math.gcd(ram, e.denominator)
        if trunc is not None:
            t = Fraction(trunc)
            ram = ram * t.denominator // math.gcd(ram, t.denominator)
            trunc = int(t * ram)
        terms: dict[int, CycScalar] = {}
        for e, c in pairs:
            k = int(e * ram)
            terms[k] = terms.get(k, CycScalar.zero()) + c
        return Series(terms, trunc, ram)

    # -- views -------------------------------------------------------

    def exponents(self) -> list[Fraction]:
        return sorted((Fraction(k, self.ram) for k in self.terms), reverse=True)

    def trunc_exp(self) -> Optional[Fraction]:
        return None if self.trunc is None else Fraction(self.trunc, self.ram)

    def is_zero(self) -> bool:
        return not self.terms and self.trunc is None

    def is_exact(self) -> bool:
        return self.trunc is None

    def coeff(self, exp: Union[int, Fraction]) -> CycScalar:
        """Coefficient at an exponent known to be above the truncation."""
        e = Fraction(exp)
        if self.trunc is not None and e <= self.trunc_exp():
            raise SeriesError(f"coefficient at z^{e} is below the truncation")
        k = e * self.ram
        if k.denominator != 1:
            return CycScalar.zero()
        return self.terms.get(int(k), CycScalar.zero())

    def leading(self) -> tuple[Fraction, CycScalar]:
        """(exponent, coefficient) of the highest-order visible term."""
        if not self.terms:
            raise ZeroSeries("series has no visible terms")
        k = max(self.terms)
        return Fraction(k, self.ram), self.terms[k]

    def is_laurent_polynomial(self) -> bool:
        return self.trunc is None and self.ram == 1

    def is_polynomial(self) -> bool:
        return self.is_laurent_polynomial() and all(k >= 0 for k in self.terms)

    def degree(self) -> Fraction:
        return self.leading()[0]

    # -- ram handling ------------------------------------------------

    @classmethod
    def _mk(cls, terms, trunc, ram) -> "Series":
        # construction without the ram-reduction pass; keys must already
        # be consistent with the stated ram
        obj = object.__new__(cls)
        object.__setattr__(obj, "ram", ram)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "trunc", trunc)
        return obj

    def with_ram(self, ram: int) -> "Series":
        """Re-express with a finer ramification; keys rescale, value fixed."""
        if ram == self.ram:
            return self
        if ram % self.ram != 0:
            raise SeriesError(f"cannot coarsen ramification {self.ram} -> {ram}")
        f = ram // self.ram
        return Series._mk(
            {k * f: v for k, v in self.terms.items()},
            None if self.trunc is None else self.trunc * f,
            ram,
        )

    def _common(self, other: "Series") -> tuple["Series", "Series"]:
        r = self.ram * other.ram // math.gcd(self.ram, other.ram)
        return self.with_ram(r), other.with_ram(r)

    # -- arithmetic --------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction, CycScalar)):
            other = Series({0: _scalar(other)})
        if not isinstance(other, Series):
            return NotImplemented
        a, b = self._common(other)
        trunc = _max_trunc(a.trunc, b.trunc)
        terms = dict(a.terms)
        for k, v in b.terms.items():
            s = terms.get(k)
            terms[k] = v if s is None else s + v
        return Series(terms, trunc, a.ram)

    __radd__ = __add__

    def __neg__(self):
        return Series({k: -v for k, v in self.terms.items()}, self.trunc, self.ram)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, CycScalar)):
            other = Series({0: _scalar(other)})
        if not isinstance(other, Series):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, CycScalar)):
            return self.scalar_mul(_scalar(other))
        if not isinstance(other, Series):
            return NotImplemented
        a, b = self._common(other)
        trunc = _mul_trunc(a, b)
        terms: dict[int, CycScalar] = {}
        bt = list(b.terms.items())
        for ka, va in a.terms.items():
            for kb, vb in bt:
                k = ka + kb
                if trunc is not None and k <= trunc:
                    continue
                p = va * vb
                s = terms.get(k)
                terms[k] = p if s is None else s + p
        return Series(terms, trunc, a.ram)

    __rmul__ = __mul__

    def scalar_mul(self, c: CycScalar) -> "Series":
        if c.is_zero():
            return Series({}, self.trunc, self.ram)
        return Series({k: v * c for k, v in self.terms.items()}, self.trunc, self.ram)

    def __pow__(self, k: int):
        if k < 0:
            return self.mul_inverse() ** (-k)
        out = Series.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift(self, exp: Union[int, Fraction]) -> "Series":
        """Multiply by the monomial z^exp."""
        e = Fraction(exp)
        r = self.ram * e.denominator // math.gcd(self.ram, e.denominator)
        s = self.with_ram(r)
        k0 = int(e * r)
        return Series(
            {k + k0: v for k, v in s.terms.items()},
            None if s.trunc is None else s.trunc + k0,
            r,
        )

    def truncate(self, trunc: Union[int, Fraction]) -> "Series":
        """Forget everything at exponents <= trunc."""
        t = Fraction(trunc)
        r = self.ram * t.denominator // math.gcd(self.ram, t.denominator)
        s = self.with_ram(r)
        k = int(t * r)
        new = k if s.trunc is None else max(s.trunc, k)
        return Series(s.terms, new, r)

    def derivative(self) -> "Series":
        """d/dz, exact on visible terms; truncation drops by one order."""
        e = self.ram
        terms = {}
        for k, v in self.terms.items():
            if k != 0:
                terms[k - e] = v * Fraction(k, e)
        trunc = None if self.trunc is None else self.trunc - e
        return Series(terms, trunc, e)

    def scale_substitute(
        self, c: ScalarLike, root_of_c: ScalarLike | None = None
    ) -> "Series":
        """Substitute z -> c*z.

        For a ramified series an explicit e-th root of c must be given;
        the fractional powers c^(k/e) are then read off that choice.
        """
        c = _scalar(c)
        if c.is_zero():
            raise ZeroScale("substitution z -> 0*z")
        if self.ram == 1:
            powers: dict[int, CycScalar] = {}
            cinv = None
            terms = {}
            for k, v in self.terms.items():
                p = powers.get(k)
                if p is None:
                    if k >= 0:
                        p = c**k
                    else:
                        if cinv is None:
                            cinv = c.inverse()
                        p = cinv ** (-k)
                    powers[k] = p
                terms[k] = v * p
            return Series(terms, self.trunc, 1)
        if root_of_c is None:
            raise SeriesError("ramified substitution needs an explicit root of c")
        r = _scalar(root_of_c)
        if r**self.ram != c:
            raise SeriesError("root_of_c is not an actual ram-th root of c")
        rinv = None
        terms = {}
        for k, v in self.terms.items():
            if k >= 0:
                p = r**k
            else:
                if rinv is None:
                    rinv = r.inverse()
                p = rinv ** (-k)
            terms[k] = v * p
        return Series(terms, self.trunc, self.ram)

    def map_coeffs(self, fn) -> "Series":
        return Series({k: fn(v) for k, v in self.terms.items()}, self.trunc, self.ram)

    def to_order(self, m: int) -> "Series":
        return self.map_coeffs(lambda v: v.to_order(m))

    # -- multiplicative inverse --------------------------------------

    def mul_inverse(self, depth: int | None = None) -> "Series":
        """1/self as a descending series.

        Needs a visible leading term with invertible coefficient.  For an
        exact input, `depth` sets how many orders below the leading term
        of the inverse are produced before truncating (default 32).
        """
        if not self.terms:
            raise ZeroSeries("cannot invert a series with no visible terms")
        k0 = max(self.terms)
        c0 = self.terms[k0]
        tail = Series(
            {k - k0: v for k, v in self.terms.items() if k != k0},
            None if self.trunc is None else self.trunc - k0,
            self.ram,
        ).scalar_mul(c0.inverse())
        # self = c0 z^{k0/e} (1 + tail); invert the unit by a geometric sum
        if self.trunc is not None:
            floor = self.trunc - k0
        else:
            floor = -(depth if depth is not None else 32) * self.ram
            tail = tail.truncate(Fraction(floor, self.ram))
        acc = Series.one().truncate(Fraction(floor, self.ram))
        power = Series.one()
        if tail.terms:
            step = max(tail.terms)  # < 0
            j = 1
            while j * step > floor:
                power = power * (-tail)
                acc = acc + power
                j += 1
        inv0 = c0.inverse()
        return acc.scalar_mul(inv0).shift(Fraction(-k0, self.ram))

    # -- comparison --------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, CycScalar)):
            other = Series({0: _scalar(other)})
        if not isinstance(other, Series):
            return NotImplemented
        a, b = self._common(other)
        return a.terms == b.terms and a.trunc == b.trunc

    def same_visible(self, other: "Series") -> bool:
        """Agreement of all coefficients above the coarser truncation."""
        a, b = self._common(other)
        t = _max_trunc(a.trunc, b.trunc)
        for k in set(a.terms) | set(b.terms):
            if t is not None and k <= t:
                continue
            if a.terms.get(k, CycScalar.zero()) != b.terms.get(k, CycScalar.zero()):
                return False
        return True

    def __repr__(self):
        return f"Series({render_series(self)!r})"

    def __str__(self):
        return render_series(self)


def _max_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _mul_trunc(a: Series, b: Series) -> int | None:
    cands = []
    if a.trunc is not None:
        if b.terms:
            cands.append(a.trunc + max(b.terms))
        if b.trunc is not None:
            cands.append(a.trunc + b.trunc)
    if b.trunc is not None and a.terms:
        cands.append(b.trunc + max(a.terms))
    return max(cands) if cands else None


# -- composition and compositional inverses --------------------------


def compose_polynomial(f: Series, g: Series) -> "Series":
    """f(g) for an exact Laurent polynomial f (negative part via 1/g)."""
    if not f.is_laurent_polynomial():
        raise SeriesError("composition target must be an exact Laurent polynomial")
    pos: list[tuple[int, CycScalar]] = sorted(
        ((k, v) for k, v in f.terms.items() if k >= 0), reverse=True
    )
    neg: list[tuple[int, CycScalar]] = sorted(
        ((k, v) for k, v in f.terms.items() if k < 0)
    )
    out = Series.zero()
    if pos:
        acc = Series.zero()
        prev = None
        for k, v in pos:
            if prev is not None:
                acc = acc * g ** (prev - k)
            acc = acc + v
            prev = k
        if prev:
            acc = acc * g**prev
        out = out + acc
    if neg:
        ginv = g.mul_inverse()
        acc = Series.zero()
        prev = None
        for k, v in sorted(((-k, v) for k, v in neg), reverse=True):
            if prev is not None:
                acc = acc * ginv ** (prev - k)
            acc = acc + v
            prev = k
        if prev:
            acc = acc * ginv**prev
        out = out + acc
    return out


def compositional_inverse(f: Series, order: int = 12) -> "Series":
    """Compositional inverse g with f(g(w)) = w.

    Two supported shapes.  A series of valuation exactly 1 (lowest term
    c*z with c != 0) inverts into an ascending polynomial carrying the
    first `order` coefficients, all exact.  A polynomial of degree r >= 1
    whose lowest exponent is not 1 inverts at infinity in the ramified
    variable w^(1/r); the branch takes the principal root of the leading
    coefficient.  Everything else raises NotInvertible.
    """
    g, _root = _compositional_inverse_full(f, order)
    return g


def _compositional_inverse_full(f: Series, order: int) -> tuple["Series", CycScalar]:
    if not f.terms:
        raise NotInvertible("zero series has no compositional inverse")
    if not f.is_laurent_polynomial():
        raise NotInvertible("compositional inverse needs an exact Laurent polynomial")
    kmin = min(f.terms)
    kmax = max(f.terms)
    if kmin == 1:
        return _inverse_valuation_one(f, order), CycScalar.one()
    if kmin >= 0 and kmax >= 2:
        return _inverse_at_infinity(f, order)
    raise NotInvertible(
        "supported shapes: valuation-1 series, or polynomials of degree >= 2"
    )


def inverse_at_infinity(f: Series, order: int = 12) -> tuple["Series", CycScalar]:
    """Compositional inverse of a polynomial, expanded around infinity.

    Always uses the ramified large-argument expansion, regardless of the
    valuation: for deg f = r the result descends from w^(1/r) and carries
    about `order` coefficients.  Returns (g, branch) where branch is the
    principal r-th root of 1/lead(f) that fixes the sheet.
    """
    if not f.terms:
        raise NotInvertible("zero series has no compositional inverse")
    if not f.is_polynomial() or max(f.terms) < 1:
        raise NotInvertible("inversion at infinity needs a polynomial of degree >= 1")
    return _inverse_at_infinity(f, order)


def _inverse_valuation_one(f: Series, order: int) -> "Series":
    # fixed-point iteration g <- g - (f(g) - w)/a1, one exact order per pass
    a1 = f.terms[1]
    a1inv = a1.inverse()
    cap = order + 1
    coeffs = sorted(f.terms.items(), reverse=True)  # descending degree

    def mul_cap(p: dict[int, CycScalar], q: dict[int, CycScalar]) -> dict:
        out: dict[int, CycScalar] = {}
        for ka, va in p.items():
            for kb, vb in q.items():
                k = ka + kb
                if k > cap:
                    continue
                s = out.get(k)
                out[k] = va * vb if s is None else s + va * vb
        return {k: v for k, v in out.items() if not v.is_zero()}

    def f_of(g: dict[int, CycScalar]) -> dict:
        acc: dict[int, CycScalar] = {}
        prev = None
        for k, v in coeffs:
            if prev is not None:
                for _ in range(prev - k):
                    acc = mul_cap(acc, g)
            acc = dict(acc)
            acc[0] = acc.get(0, CycScalar.zero()) + v
            acc = {kk: vv for kk, vv in acc.items() if not vv.is_zero()}
            prev = k
        if prev:
            for _ in range(prev):
                acc = mul_cap(acc, g)
        return acc

    g = {1: a1inv}
    for _ in range(order):
        err = f_of(g)
        err[1] = err.get(1, CycScalar.zero()) - CycScalar.one()
        err = {k: v for k, v in err.items() if not v.is_zero()}
        if not err:
            break
        for k, v in err.items():
            g[k] = g.get(k, CycScalar.zero()) - v * a1inv
        g = {k: v for k, v in g.items() if not v.is_zero() and k <= order}
    return Series({k: v for k, v in g.items() if k <= order})


def nth_root_rational(q: Fraction, r: int) -> Fraction | None:
    """Exact r-th root of a positive rational, if one exists."""
    if q <= 0:
        return None

    def iroot(m: int) -> int | None:
        if m == 0:
            return 0
        x = round(m ** (1.0 / r))
        for c in (x - 1, x, x + 1, x + 2):
            if c >= 0 and c**r == m:
                return c
        # pure-integer fallback for huge inputs
        lo, hi = 0, 1
        while hi**r < m:
            hi *= 2
        while lo < hi:
            mid = (lo + hi) // 2
            if mid**r < m:
                lo = mid + 1
            else:
                hi = mid
        return lo if lo**r == m else None

    a = iroot(q.numerator)
    b = iroot(q.denominator)
    if a is None or b is None:
        return None
    return Fraction(a, b)


def principal_root(c: CycScalar, r: int) -> CycScalar:
    """Principal r-th root of c when c = rho * zeta, rho in Q, zeta a root of unity.

    The result lives in Q(zeta_N) for N = lcm(order(c), 2r*order(c)); a
    leading coefficient outside this shape has no representable root and
    raises NotInvertible.
    """
    if c.is_zero():
        raise DivisionByZero("root of zero")
    if r == 1:
        return c
    n = c.order
    for j in range(n):
        cand = c * zeta_pow(n, -j)
        if cand.is_rational():
            rho = cand.as_fraction()
            sign_half = 0
            if rho < 0:
                rho = -rho
                sign_half = 1
            root_rho = nth_root_rational(rho, r)
            if root_rho is None:
                raise NotInvertible(
                    f"no exact rational {r}-th root of {rho}; branch not representable"
                )
            # c = rho * zeta_{2n}^{2j + n*sign_half}; take the principal r-th root
            s = (2 * j + n * sign_half) % (2 * n)
            big = 2 * r * n
            return zeta_pow(big, s) * root_rho
    raise NotInvertible(
        "leading coefficient is not rational-times-root-of-unity; no representable root"
    )


def _inverse_at_infinity(f: Series, order: int) -> tuple["Series", CycScalar]:
    # g(w) = gamma w^{1/r} (1 + ...) with f(g(w)) = w, inverted by Newton steps
    r = max(f.terms)
    t_r = f.terms[r]
    gamma = principal_root(t_r.inverse(), r)
    big = max(gamma.order, max((v.order for v in f.terms.values()), default=1))
    if big % gamma.order or any(big % v.order for v in f.terms.values()):
        # promote everything into one common order
        big = gamma.order
        for v in f.terms.values():
            big = big * v.order // math.gcd(big, v.order)
    gamma = gamma.to_order(big)
    fb = f.map_coeffs(lambda v: v.to_order(big))
    floor = Fraction(1 - (order + 2), r)
    target = Series.monomial(1)
    g = Series.monomial(Fraction(1, r), gamma).truncate(floor)
    fprime = fb.derivative()
    steps = max(3, (order + 3).bit_length() + 1)
    for _ in range(steps):
        err = compose_polynomial(fb, g) - target
        if not err.terms:
            break
        corr = err * compose_polynomial(fprime, g).mul_inverse()
        g = (g - corr).truncate(floor)
    err = compose_polynomial(fb, g) - target
    if err.terms:
        raise NotInvertible("inversion at infinity failed to converge")
    return g, gamma


# -- text forms ------------------------------------------------------


def _render_exp(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})"


def _render_coeff(c: CycScalar) -> tuple[str, str]:
    """(sign, body) with cyclotomic coefficients parenthesized."""
    from .coeffs import render_scalar

    if c.is_rational():
        q = c.as_fraction()
        sign = "-" if q < 0 else "+"
        return sign, render_rational(abs(q))
    return "+", f"({render_scalar(c)})"


def render_series(s: Series) -> str:
    parts: list[tuple[str, str]] = []
    for k in sorted(s.terms, reverse=True):
        q = Fraction(k, s.ram)
        sign, body = _render_coeff(s.terms[k])
        if q == 0:
            parts.append((sign, body))
            continue
        zpart = "z" if q == 1 else f"z^{_render_exp(q)}"
        if body == "1":
            parts.append((sign, zpart))
        else:
            parts.append((sign, f"{body}*{zpart}"))
    if not parts and s.trunc is None:
        return "0"
    if parts:
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
    else:
        out = ""
    if s.trunc is not None:
        tail = f"O(z^{_render_exp(s.trunc_exp())})"
        out = f"{out} + {tail}" if out else tail
    return out


def parse_series(text: str) -> Series:
    """Parse the render_series format back into a Series."""
    text = text.strip()
    if text == "0" or not text:
        return Series.zero()
    chunks: list[str] = []
    depth = 0
    buf = ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and buf and buf[-1] not in "^(":
            chunks.append(buf)
            buf = ch
        else:
            buf += ch
    if buf.strip():
        chunks.append(buf)
    pairs: list[tuple[Fraction, CycScalar]] = []
    trunc: Fraction | None = None
    for chunk in chunks:
        chunk = chunk.strip()
        sign = 1
        while chunk and chunk[0] in "+-":
            if chunk[0] == "-":
                sign = -sign
            chunk = chunk[1:].strip()
        if chunk.startswith("O(") and chunk.endswith(")"):
            inner = chunk[2:-1].strip()
            if not inner.startswith("z^"):
                raise SeriesError(f"bad truncation marker {chunk!r}")
            trunc = _parse_exp(inner[2:])
            continue
        coeff: CycScalar = CycScalar.one()
        exp = Fraction(0)
        for factor in _split_factors(chunk):
            factor = factor.strip()
            if factor == "z":
                exp += 1
            elif factor.startswith("z^"):
                exp += _parse_exp(factor[2:])
            elif factor.startswith("(") and factor.endswith(")"):
                coeff = coeff * parse_scalar(factor[1:-1])
            else:
                coeff = coeff * parse_scalar(factor)
        pairs.append((exp, coeff * sign))
    return Series.from_pairs(pairs, trunc)


def _split_factors(chunk: str) -> list[str]:
    out, depth, buf = [], 0, ""
    for ch in chunk:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            out.append(buf)
            buf = ""
        else:
            buf += ch
    if buf:
        out.append(buf)
    return out


def _parse_exp(text: str) -> Fraction:
    text = text.strip()
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    return Fraction(text)
