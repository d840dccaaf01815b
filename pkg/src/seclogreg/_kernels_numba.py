"""numba @njit versions of the two-limb ring kernels.

Same signatures and semantics as ``_kernels_numpy``; loops are fused per
element so a product costs one pass instead of ~20 temporaries.
"""
import numpy as np
from numba import njit

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_ZERO = np.uint64(0)
_TWO64 = 18446744073709551616.0


@njit(cache=True, inline="always")
def _mulhi(a, b):
    a0 = a & _M32
    a1 = a >> _S32
    b0 = b & _M32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> _S32) + (p01 & _M32) + (p10 & _M32)
    return p11 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)


@njit(cache=True)
def add(a, b, mlo, mhi):
    n = a.shape[0]
    out = np.empty((n, 2), dtype=np.uint64)
    for i in range(n):
        lo = a[i, 0] + b[i, 0]
        carry = _ONE if lo < a[i, 0] else _ZERO
        out[i, 0] = lo & mlo
        out[i, 1] = (a[i, 1] + b[i, 1] + carry) & mhi
    return out


@njit(cache=True)
def sub(a, b, mlo, mhi):
    n = a.shape[0]
    out = np.empty((n, 2), dtype=np.uint64)
    for i in range(n):
        borrow = _ONE if a[i, 0] < b[i, 0] else _ZERO
        out[i, 0] = (a[i, 0] - b[i, 0]) & mlo
        out[i, 1] = (a[i, 1] - b[i, 1] - borrow) & mhi
    return out


@njit(cache=True)
def neg(a, mlo, mhi):
    n = a.shape[0]
    out = np.empty((n, 2), dtype=np.uint64)
    for i in range(n):
        borrow = _ONE if a[i, 0] != _ZERO else _ZERO
        out[i, 0] = (_ZERO - a[i, 0]) & mlo
        out[i, 1] = (_ZERO - a[i, 1] - borrow) & mhi
    return out


@njit(cache=True)
def mul(a, b, mlo, mhi):
    n = a.shape[0]
    out = np.empty((n, 2), dtype=np.uint64)
    for i in range(n):
        alo = a[i, 0]
        blo = b[i, 0]
        out[i, 0] = (alo * blo) & mlo
        out[i, 1] = (_mulhi(alo, blo) + alo * b[i, 1] + a[i, 1] * blo) & mhi
    return out


@njit(cache=True)
def _sign_one(lo, hi, bits):
    if bits > 64:
        return (hi >> np.uint64(bits - 65)) & _ONE
    return (lo >> np.uint64(bits - 1)) & _ONE


@njit(cache=True)
def sign(a, bits):
    n = a.shape[0]
    out = np.empty(n, dtype=np.uint8)
    for i in range(n):
        out[i] = np.uint8(_sign_one(a[i, 0], a[i, 1], bits))
    return out


@njit(cache=True)
def sar(a, f, bits, mlo, mhi):
    n = a.shape[0]
    out = np.empty((n, 2), dtype=np.uint64)
    if f == 0:
        out[:, :] = a
        return out
    wide = f >= 64
    sf = np.uint64(f % 64)
    sl = np.uint64((64 - f) % 64)
    for i in range(n):
        lo = a[i, 0]
        hi = a[i, 1]
        if _sign_one(lo, hi, bits) == _ONE:
            lo = lo | ~mlo
            hi = hi | ~mhi
        if wide:
            out[i, 0] = np.uint64(np.int64(hi) >> np.int64(f - 64)) & mlo
            out[i, 1] = np.uint64(np.int64(hi) >> np.int64(63)) & mhi
        else:
            out[i, 0] = ((lo >> sf) | (hi << sl)) & mlo
            out[i, 1] = np.uint64(np.int64(hi) >> np.int64(f)) & mhi
    return out


@njit(cache=True)
def sum_rows(a, mlo, mhi):
    m = a.shape[0]
    k = a.shape[1]
    out = np.empty((m, 2), dtype=np.uint64)
    for i in range(m):
        lo = _ZERO
        hi = _ZERO
        for j in range(k):
            nlo = lo + a[i, j, 0]
            if nlo < lo:
                hi += _ONE
            hi += a[i, j, 1]
            lo = nlo
        out[i, 0] = lo & mlo
        out[i, 1] = hi & mhi
    return out


@njit(cache=True)
def encode(x, f, mlo, mhi):
    n = x.shape[0]
    out = np.empty((n, 2), dtype=np.uint64)
    scale = 2.0 ** f
    for i in range(n):
        v = np.rint(x[i] * scale)
        m = abs(v)
        hi_f = np.floor(m / _TWO64)
        lo = np.uint64(m - hi_f * _TWO64)
        hi = np.uint64(hi_f)
        if v < 0:
            borrow = _ONE if lo != _ZERO else _ZERO
            lo = _ZERO - lo
            hi = _ZERO - hi - borrow
        out[i, 0] = lo & mlo
        out[i, 1] = hi & mhi
    return out


@njit(cache=True)
def decode(a, f, bits, mlo, mhi):
    n = a.shape[0]
    out = np.empty(n, dtype=np.float64)
    scale = 2.0 ** f
    for i in range(n):
        lo = a[i, 0]
        hi = a[i, 1]
        negative = _sign_one(lo, hi, bits) == _ONE
        if negative:
            borrow = _ONE if lo != _ZERO else _ZERO
            lo = (_ZERO - lo) & mlo
            hi = (_ZERO - hi - borrow) & mhi
        val = (np.float64(hi) * _TWO64 + np.float64(lo)) / scale
        out[i] = -val if negative else val
    return out
