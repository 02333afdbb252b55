"""Transform at infinity for rank-1 classes of the twisted family.

A member zeta_n^i f(zeta_n^i z) of a degree-r family transforms into a
class built from the compositional inverse of f expanded at infinity:
the new eigenvalue is zeta_n^i f^{-1}(zeta_n^i z) shifted by a fixed
rational multiple of z^-1 that depends only on r.  For r >= 2 the
inverse lives on the degree-r cover, so the output is ramified; the
branch of the leading root is the principal one, and every sheet-level
statement below is quantified over the cover's sheets.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Union

from .coeffs import CycScalar, lcm_order, render_scalar, zeta_pow
from .connections import (
    OneDimClass,
    RamifiedClass,
    one_dim_class,
    ramified_class,
)
from .series import (
    Series,
    inverse_at_infinity,
    principal_root,
    render_series,
)


class FourierError(ValueError):
    pass


class LftInput:
    """One member of a twisted polynomial family: f, its index, the order."""

    __slots__ = ("f", "twist", "n")

    def __init__(self, f: Series, twist: int = 0, n: int = 1):
        if not isinstance(f, Series) or not f.is_polynomial():
            raise FourierError("potential must be an exact polynomial")
        if not f.terms or max(f.terms) < 1:
            raise FourierError("potential degree must be at least 1")
        if n < 1:
            raise FourierError("family order must be positive")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "twist", int(twist) % n)
        object.__setattr__(self, "n", int(n))

    def __setattr__(self, *_):
        raise AttributeError("LftInput is immutable")

    @property
    def r(self) -> int:
        return int(max(self.f.terms))

    def __repr__(self):
        return f"<lft input r={self.r} twist={self.twist} n={self.n}>"


def polar_shift(r: int) -> Fraction:
    """The z^-1 coefficient attached to slope r, as a positive rational."""
    return Fraction(1 + r, 2 * r)


def _joint_order(*items) -> int:
    # smallest cyclotomic order holding every listed coefficient; ints
    # are taken as orders directly
    m = 1
    for it in items:
        if isinstance(it, int):
            m = lcm_order(m, it)
        elif isinstance(it, CycScalar):
            if not it.is_rational():
                m = lcm_order(m, it.order)
        else:
            for c in it.terms.values():
                if not c.is_rational():
                    m = lcm_order(m, c.order)
    return m


def lft_series(inp: LftInput, order: int = 12) -> Series:
    """The transformed eigenvalue as a truncated series.

    -(1+r)/(2r) z^-1 + zeta_n^i f^{-1}(zeta_n^i z), with f^{-1} the
    inverse at infinity; ramified by r whenever r >= 2.
    """
    if order < 1:
        raise FourierError("order must be positive")
    f, n, i, r = inp.f, inp.n, inp.twist, inp.r
    g, _branch = inverse_at_infinity(f, order)
    if i == 0:
        sub = g
    else:
        root = zeta_pow(g.ram * n, i)
        m = _joint_order(g, root, n)
        g = g.to_order(m)
        root = root.to_order(m)
        if g.ram == 1:
            sub = g.scale_substitute(zeta_pow(n, i).to_order(m))
        else:
            sub = g.scale_substitute(root ** g.ram, root)
    zi = zeta_pow(n, i)
    if not zi.is_rational():
        zi = zi.to_order(_joint_order(sub, zi))
        sub = sub.to_order(zi.order)
    lam = sub.scalar_mul(zi)
    return lam - Series.monomial(-1, polar_shift(r))


def lft_infty_infty(
    inp: LftInput, order: int = 12
) -> Union[OneDimClass, RamifiedClass]:
    """Class of the transformed connection; unramified exactly when r = 1."""
    lam = lft_series(inp, order)
    if lam.ram == 1:
        return one_dim_class(lam)
    return ramified_class(lam)


def g_series(inp: LftInput) -> Series:
    """zeta^-1 zeta_n^i f(zeta_n^i zeta^-1), exact in the small coordinate."""
    f, n, i = inp.f, inp.n, inp.twist
    zi = zeta_pow(n, i)
    if not zi.is_rational():
        m = _joint_order(f, zi)
        f = f.to_order(m)
        zi = zi.to_order(m)
    A = f.scale_substitute(zi)
    flipped = Series({-k: v for k, v in A.terms.items()}, None, 1)
    return flipped.shift(-1).scalar_mul(zi)


def _binomial_unit_root(w: Series, r: int, floor: Fraction) -> Series:
    # (1 + w)^(1/r) for strictly descending w, truncated at floor
    acc = Series.one().truncate(floor)
    power = Series.one()
    c = Fraction(1)
    step = max(w.terms) if w.terms else None
    m = 1
    while step is not None and m * step > floor:
        power = (power * w).truncate(floor)
        c = c * (Fraction(1, r) - (m - 1)) / m
        if not power.terms:
            break
        acc = acc + power.scalar_mul(CycScalar.rational(c))
        m += 1
    return acc


def gh_consistency(
    inp: LftInput, order: int = 10, shift_const: Optional[Fraction] = None
) -> bool:
    """Re-derive the transformed eigenvalue from the direct route.

    In the large coordinate the direct route reads h = shift - z * (zeta_n^i
    f(zeta_n^i z)); the transform route gives h as -z*lam pulled back
    through z -> zeta_n^-i f(zeta_n^i z)/(leading monomial scale).  The two
    must agree termwise to the working order on some sheet of the cover.
    `shift_const` overrides the built-in (1+r)/(2r), for perturbation
    tests only.
    """
    f, n, i, r = inp.f, inp.n, inp.twist, inp.r
    const = polar_shift(r) if shift_const is None else Fraction(shift_const)
    lam = lft_series(inp, order)
    h_out = -(lam.shift(1))

    zi = zeta_pow(n, i)
    m0 = _joint_order(f, zi)
    fz = f.to_order(m0)
    if not zi.is_rational():
        zi = zi.to_order(m0)
    A = fz.scale_substitute(zi) if i else fz  # f(zeta^i z)
    h_g = Series({0: CycScalar.rational(const)}) - A.shift(1).scalar_mul(zi)
    u = A.scalar_mul(zeta_pow(n, -i % n).to_order(m0)) if i else A

    C = u.coeff(r)
    base = principal_root(C, r)
    big = _joint_order(h_out, h_g, u, base, r)
    h_out = h_out.to_order(big)
    h_g = h_g.to_order(big)
    base = base.to_order(big)

    fl = Fraction(-(order + r + 3))
    # u = C z^r (1 + w) with w strictly descending
    w = u.scalar_mul(C.inverse()).shift(-r) - Series.one()
    unit_root = _binomial_unit_root(w, r, fl).to_order(big)
    # a term hidden below h_out's truncation at z^e lands at exponent r*e,
    # so that is as far down as the composition can be trusted
    lim = h_out.trunc_exp()

    keys = sorted(h_out.terms, reverse=True)
    if not keys:
        return False
    for sheet in range(r):
        rt = base * zeta_pow(r, sheet).to_order(big)
        uroot = unit_root.scalar_mul(rt).shift(1).truncate(fl)
        uinv = uroot.mul_inverse()
        composed = Series.zero()
        cur = None
        cur_k = None
        for k in keys:
            if cur is None:
                cur = uroot ** k if k >= 0 else uinv ** (-k)
            else:
                for _ in range(cur_k - k):
                    cur = (cur * uinv).truncate(fl)
            cur_k = k
            composed = composed + cur.scalar_mul(h_out.terms[k])
        if lim is not None:
            composed = composed.truncate(r * lim)
        if composed.same_visible(h_g):
            return True
    return False


def report(inp: LftInput, order: int = 12) -> dict:
    """Transform summary with rendered series, ready for serialization."""
    out = lft_infty_infty(inp, order)
    if isinstance(out, OneDimClass):
        payload = {
            "ram": 1,
            "polypart": render_series(out.polypart),
            "residue": render_scalar(out.residue),
        }
    else:
        payload = {
            "ram": out.ram,
            "polypart": render_series(out.polypart),
            "subpolar": render_series(out.subpolar),
            "residue": render_scalar(out.residue),
        }
    return {
        "f": render_series(inp.f),
        "r": inp.r,
        "twist": inp.twist,
        "n": inp.n,
        "output": payload,
    }
