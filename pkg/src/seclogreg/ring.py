"""Signed fixed-point values embedded in the ring Z_B with B = 2**modulus_bits.

Ring elements are stored as pairs of uint64 limbs ``[lo, hi]`` in the last
axis of an array, which allows moduli up to 2**128 without Python integers
in the hot path.  Arithmetic goes through :mod:`seclogreg.kernels`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

_U64 = (1 << 64) - 1


class RingOverflowError(ValueError):
    """A real value does not fit the codec's representable range."""


@dataclass(frozen=True)
class FixedPointCodec:
    modulus_bits: int = 128
    frac_bits: int = 24
    mlo: np.uint64 = field(init=False, repr=False, compare=False)
    mhi: np.uint64 = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        bits, f = self.modulus_bits, self.frac_bits
        if not 8 <= bits <= 128:
            raise ValueError(f"modulus_bits must be in [8, 128], got {bits}")
        if not 0 <= f < bits / 2:
            raise ValueError(f"frac_bits must satisfy 0 <= f < modulus_bits/2, got {f}")
        if bits >= 64:
            lo, hi = _U64, (1 << (bits - 64)) - 1
        else:
            lo, hi = (1 << bits) - 1, 0
        object.__setattr__(self, "mlo", np.uint64(lo))
        object.__setattr__(self, "mhi", np.uint64(hi))

    @property
    def modulus(self) -> int:
        return 1 << self.modulus_bits

    @property
    def ulp(self) -> float:
        return 2.0 ** -self.frac_bits

    @property
    def max_abs(self) -> float:
        """Exclusive bound on representable magnitudes."""
        return 2.0 ** (self.modulus_bits - self.frac_bits - 1)

    @property
    def width(self) -> int:
        """Bytes per ring element on the wire."""
        return (self.modulus_bits + 7) // 8

    # -- construction -------------------------------------------------

    def encode(self, x) -> "RingTensor":
        arr = np.asarray(x, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise RingOverflowError("cannot encode non-finite value")
        if arr.size and np.max(np.abs(arr)) >= self.max_abs:
            raise RingOverflowError(
                f"value {np.max(np.abs(arr))!r} outside representable range +-{self.max_abs!r}")
        flat = np.ascontiguousarray(arr.reshape(-1))
        data = kernels.encode(flat, self.frac_bits, self.mlo, self.mhi)
        return RingTensor(data.reshape(arr.shape + (2,)), self)

    def decode(self, t: "RingTensor") -> np.ndarray:
        flat = t.flat()
        out = kernels.decode(flat, self.frac_bits, self.modulus_bits, self.mlo, self.mhi)
        return out.reshape(t.shape)

    def from_ints(self, values) -> "RingTensor":
        """Embed Python integers (any sign, any size) by reduction mod B."""
        obj = np.asarray(values, dtype=object)
        shape = obj.shape
        data = np.empty((obj.size, 2), dtype=np.uint64)
        mod = self.modulus
        for i, v in enumerate(obj.reshape(-1)):
            v = int(v) % mod
            data[i, 0] = v & _U64
            data[i, 1] = v >> 64
        return RingTensor(data.reshape(shape + (2,)), self)

    def zeros(self, shape=()) -> "RingTensor":
        shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
        return RingTensor(np.zeros(shape + (2,), dtype=np.uint64), self)

    def random(self, shape, rng: np.random.Generator) -> "RingTensor":
        """Uniform elements of Z_B."""
        shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
        size = int(np.prod(shape, dtype=np.int64))
        raw = rng.bit_generator.random_raw(2 * size).astype(np.uint64).reshape(size, 2)
        raw[:, 0] &= self.mlo
        raw[:, 1] &= self.mhi
        return RingTensor(raw.reshape(shape + (2,)), self)

    def public(self, x) -> "RingTensor":
        """Alias of encode used where a value is a public constant."""
        return self.encode(x)


class RingTensor:
    """An array of ring elements sharing one codec.

    A 0-d tensor plays the role of a single ring element; ``int(t)`` gives
    its integer value in [0, B).
    """

    __slots__ = ("data", "codec")
    __array_priority__ = 100

    def __init__(self, data: np.ndarray, codec: FixedPointCodec):
        if data.dtype != np.uint64 or data.shape[-1:] != (2,):
            raise TypeError("ring data must be uint64 with trailing limb axis of size 2")
        self.data = data
        self.codec = codec

    # -- shape plumbing --------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.data.ndim - 1

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def __len__(self):
        return self.shape[0]

    def flat(self) -> np.ndarray:
        return np.ascontiguousarray(self.data.reshape(-1, 2))

    def _wrap(self, flat, shape) -> "RingTensor":
        return RingTensor(flat.reshape(tuple(shape) + (2,)), self.codec)

    def __getitem__(self, idx) -> "RingTensor":
        # leading-axis indexing only; the limb axis always survives
        return RingTensor(self.data[idx], self.codec)

    def __setitem__(self, idx, value: "RingTensor"):
        self.data[idx] = value.data

    def reshape(self, *shape) -> "RingTensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return RingTensor(self.data.reshape(tuple(shape) + (2,)), self.codec)

    def transpose(self, *axes) -> "RingTensor":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return RingTensor(self.data.transpose(tuple(axes) + (self.ndim,)), self.codec)

    @property
    def T(self) -> "RingTensor":
        return self.transpose()

    def broadcast_to(self, shape) -> "RingTensor":
        return RingTensor(np.broadcast_to(self.data, tuple(shape) + (2,)), self.codec)

    def copy(self) -> "RingTensor":
        return RingTensor(self.data.copy(), self.codec)

    # -- arithmetic -----------------------------------------------------

    def _binary(self, other, fn) -> "RingTensor":
        other = self._coerce(other)
        shape = np.broadcast_shapes(self.shape, other.shape)
        a = np.ascontiguousarray(np.broadcast_to(self.data, shape + (2,))).reshape(-1, 2)
        b = np.ascontiguousarray(np.broadcast_to(other.data, shape + (2,))).reshape(-1, 2)
        return self._wrap(fn(a, b, self.codec.mlo, self.codec.mhi), shape)

    def _coerce(self, other) -> "RingTensor":
        if isinstance(other, RingTensor):
            if other.codec != self.codec:
                raise ValueError("codec mismatch")
            return other
        if isinstance(other, (int, np.integer)):
            return self.codec.from_ints(int(other))
        raise TypeError(f"cannot combine RingTensor with {type(other).__name__}")

    def __add__(self, other):
        return self._binary(other, kernels.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, kernels.sub)

    def __rsub__(self, other):
        return self._coerce(other)._binary(self, kernels.sub)

    def __neg__(self):
        return self._wrap(kernels.neg(self.flat(), self.codec.mlo, self.codec.mhi), self.shape)

    def __mul__(self, other):
        # raw ring product: two fixed-point operands give a result at 2f
        return self._binary(other, kernels.mul)

    __rmul__ = __mul__

    def mul_int(self, k) -> "RingTensor":
        """Multiply by a public integer (no rescaling needed)."""
        return self * self.codec.from_ints(k)

    def truncate(self, bits=None) -> "RingTensor":
        """Signed floor shift right by ``bits`` (default f)."""
        f = self.codec.frac_bits if bits is None else bits
        c = self.codec
        return self._wrap(kernels.sar(self.flat(), f, c.modulus_bits, c.mlo, c.mhi), self.shape)

    def truncate_ceil(self, bits=None) -> "RingTensor":
        """Signed ceiling shift: -floor(-x / 2**bits)."""
        return -((-self).truncate(bits))

    def sum(self, axis=None) -> "RingTensor":
        c = self.codec
        if axis is None:
            flat = self.flat()
            return self._wrap(kernels.sum_rows(flat.reshape(1, -1, 2), c.mlo, c.mhi), ())
        axis = axis % self.ndim
        moved = np.moveaxis(self.data, axis, -2)
        out_shape = moved.shape[:-2]
        stacked = np.ascontiguousarray(moved).reshape(-1, moved.shape[-2], 2)
        return self._wrap(kernels.sum_rows(stacked, c.mlo, c.mhi), out_shape)

    def sign(self) -> np.ndarray:
        """Boolean array, True where the signed value is negative."""
        return kernels.sign(self.flat(), self.codec.modulus_bits).reshape(self.shape).astype(bool)

    # -- conversion -----------------------------------------------------

    def decode(self) -> np.ndarray:
        return self.codec.decode(self)

    def to_ints(self) -> np.ndarray:
        flat = self.flat()
        out = np.empty(flat.shape[0], dtype=object)
        for i in range(flat.shape[0]):
            out[i] = int(flat[i, 0]) | (int(flat[i, 1]) << 64)
        return out.reshape(self.shape)

    def to_signed_ints(self) -> np.ndarray:
        half, mod = self.codec.modulus >> 1, self.codec.modulus
        return np.vectorize(lambda v: v - mod if v >= half else v, otypes=[object])(self.to_ints())

    def to_bytes(self) -> np.ndarray:
        """Little-endian wire bytes, shape ``(size, width)``."""
        flat = self.flat().astype("<u8", copy=False)
        return np.ascontiguousarray(flat).view(np.uint8).reshape(-1, 16)[:, : self.codec.width]

    def __int__(self):
        if self.shape != ():
            raise TypeError("only 0-d ring tensors convert to int")
        return int(self.data[0]) | (int(self.data[1]) << 64)

    def equals(self, other: "RingTensor") -> bool:
        return (self.codec == other.codec and self.shape == other.shape
                and bool(np.array_equal(self.data, other.data)))

    def __repr__(self):
        return f"RingTensor(shape={self.shape}, bits={self.codec.modulus_bits}, f={self.codec.frac_bits})"


def stack(tensors, axis=0) -> RingTensor:
    tensors = list(tensors)
    codec = tensors[0].codec
    axis = axis % (tensors[0].ndim + 1)
    return RingTensor(np.stack([t.data for t in tensors], axis=axis), codec)


def concatenate(tensors, axis=0) -> RingTensor:
    tensors = list(tensors)
    axis = axis % tensors[0].ndim
    return RingTensor(np.concatenate([t.data for t in tensors], axis=axis), tensors[0].codec)


def eye(d: int, codec: FixedPointCodec, value: RingTensor = None) -> RingTensor:
    """Identity (or ``value`` times identity for a 0-d ring value), unscaled."""
    out = codec.zeros((d, d))
    diag = codec.encode(1.0) if value is None else value
    for i in range(d):
        out.data[i, i] = diag.data
    return out
