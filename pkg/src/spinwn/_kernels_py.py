"""Pure-Python reference kernels for fermionic string products.

Strings are stored as ``(cre_mask, ann_mask)`` pairs meaning the normal-ordered
product of creators (ascending) followed by annihilators (ascending).  Products
are formed in a mode-ordered frame where every mode carries one local factor
from {1, a^+, a, n, h}; local products never branch, so a product of two strings
is a single string up to the expansion ``h = 1 - n``.
"""

from __future__ import annotations

_ZERO_TOL = 1e-14


def _popcount(x: int) -> int:
    return bin(x).count("1")


def mode_sign(cre: int, ann: int) -> int:
    """Sign relating the normal-ordered string to its mode-ordered form."""
    inv = 0
    c = cre
    while c:
        low = c & -c
        i = low.bit_length() - 1
        inv += _popcount(ann & ((1 << i) - 1))
        c ^= low
    return -1 if inv & 1 else 1


def mul_strings(xc: int, xa: int, yc: int, ya: int):
    """Product of two normal-ordered strings.

    Returns a list of ``((cre, ann), sign)`` pairs, empty when the product
    vanishes.
    """
    xn = xc & xa
    xc_ = xc & ~xn
    xa_ = xa & ~xn
    yn = yc & ya
    yc_ = yc & ~yn
    ya_ = ya & ~yn
    if (xc_ & yc_) | (xc_ & yn) | (xa_ & ya_) | (xn & ya_):
        return []
    sign = mode_sign(xc, xa) * mode_sign(yc, ya)
    ux = xc | xa
    uy = yc | ya
    rc = (xc_ & ~uy) | (yc_ & ~ux) | (xn & yc_)
    ra = (xa_ & ~uy) | (ya_ & ~ux) | (xa_ & yn)
    rn = (xn & ~uy) | (yn & ~ux) | (xc_ & ya_) | (xn & yn)
    rh = xa_ & yc_
    odd_x = xc_ | xa_
    odd_y = yc_ | ya_
    inv = 0
    m = odd_y
    while m:
        low = m & -m
        i = low.bit_length() - 1
        inv += _popcount(odd_x >> (i + 1))
        m ^= low
    if inv & 1:
        sign = -sign
    out = []
    sub = rh
    while True:
        # h_S = sum over T subset S of (-1)^|T| n_T
        n_mask = rn | sub
        cre = rc | n_mask
        ann = ra | n_mask
        s = sign * mode_sign(cre, ann)
        if _popcount(sub) & 1:
            s = -s
        out.append(((cre, ann), s))
        if sub == 0:
            break
        sub = (sub - 1) & rh
    return out


def mul_terms(x: dict, y: dict) -> dict:
    """Product of two term maps ``{(cre, ann): coeff}``."""
    out: dict = {}
    get = out.get
    for (xc, xa), cx in x.items():
        for (yc, ya), cy in y.items():
            for key, s in mul_strings(xc, xa, yc, ya):
                out[key] = get(key, 0.0) + s * cx * cy
    return {k: v for k, v in out.items() if abs(v) >= _ZERO_TOL}


def commutator_terms(x: dict, y: dict) -> dict:
    """Term map of ``xy - yx``."""
    out = dict(mul_terms(x, y))
    for k, v in mul_terms(y, x).items():
        out[k] = out.get(k, 0.0) - v
    return {k: v for k, v in out.items() if abs(v) >= _ZERO_TOL}
