"""Pure-numpy two-limb ring kernels.

Every ring array is a C-contiguous ``(N, 2)`` uint64 array of ``[lo, hi]``
limbs of an integer modulo ``2**bits`` (``bits <= 128``).  ``mlo``/``mhi``
are the limb masks of the modulus.  All functions are elementwise over N.
"""
import numpy as np

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_ONE = np.uint64(1)
_TWO64 = 18446744073709551616.0


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


def add(a, b, mlo, mhi):
    lo = a[:, 0] + b[:, 0]
    carry = (lo < a[:, 0]).astype(np.uint64)
    hi = a[:, 1] + b[:, 1] + carry
    return np.stack([lo & mlo, hi & mhi], axis=1)


def sub(a, b, mlo, mhi):
    lo = a[:, 0] - b[:, 0]
    borrow = (a[:, 0] < b[:, 0]).astype(np.uint64)
    hi = a[:, 1] - b[:, 1] - borrow
    return np.stack([lo & mlo, hi & mhi], axis=1)


def neg(a, mlo, mhi):
    return sub(np.zeros_like(a), a, mlo, mhi)


def mul(a, b, mlo, mhi):
    alo, ahi = a[:, 0], a[:, 1]
    blo, bhi = b[:, 0], b[:, 1]
    lo = alo * blo
    hi = _mulhi(alo, blo) + alo * bhi + ahi * blo
    return np.stack([lo & mlo, hi & mhi], axis=1)


def sign(a, bits):
    """1 where the element is negative under the signed embedding."""
    if bits > 64:
        return ((a[:, 1] >> np.uint64(bits - 65)) & _ONE).astype(np.uint8)
    return ((a[:, 0] >> np.uint64(bits - 1)) & _ONE).astype(np.uint8)


def sar(a, f, bits, mlo, mhi):
    """Floor division by 2**f of the signed value, wrapped back into the ring."""
    if f == 0:
        return a.copy()
    negative = sign(a, bits).astype(bool)
    lo = a[:, 0].copy()
    hi = a[:, 1].copy()
    lo[negative] |= ~mlo
    hi[negative] |= ~mhi
    shi = hi.view(np.int64)
    if f >= 64:
        out_lo = (shi >> np.int64(f - 64)).view(np.uint64)
        out_hi = (shi >> np.int64(63)).view(np.uint64)
    else:
        out_lo = (lo >> np.uint64(f)) | (hi << np.uint64(64 - f))
        out_hi = (shi >> np.int64(f)).view(np.uint64)
    return np.stack([out_lo & mlo, out_hi & mhi], axis=1)


def sum_rows(a, mlo, mhi):
    """Reduce ``(M, K, 2)`` to ``(M, 2)`` by ring addition along K."""
    m, k = a.shape[0], a.shape[1]
    lo = np.zeros(m, dtype=np.uint64)
    hi = np.zeros(m, dtype=np.uint64)
    for j in range(k):
        nlo = lo + a[:, j, 0]
        hi = hi + a[:, j, 1] + (nlo < lo).astype(np.uint64)
        lo = nlo
    return np.stack([lo & mlo, hi & mhi], axis=1)


def encode(x, f, mlo, mhi):
    """Round ``x * 2**f`` to the nearest integer and embed it (caller checks range)."""
    v = np.rint(x * (2.0 ** f))
    m = np.abs(v)
    hi_f = np.floor(m / _TWO64)
    lo_f = m - hi_f * _TWO64
    out = np.stack([lo_f.astype(np.uint64), hi_f.astype(np.uint64)], axis=1)
    negative = v < 0
    if negative.any():
        out[negative] = neg(out[negative], mlo, mhi)
    out[:, 0] &= mlo
    out[:, 1] &= mhi
    return out


def decode(a, f, bits, mlo, mhi):
    negative = sign(a, bits).astype(bool)
    mag = a.copy()
    if negative.any():
        mag[negative] = neg(a[negative], mlo, mhi)
    val = mag[:, 1].astype(np.float64) * _TWO64 + mag[:, 0].astype(np.float64)
    val = val / (2.0 ** f)
    return np.where(negative, -val, val)
