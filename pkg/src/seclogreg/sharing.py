"""Additive secret sharing over Z_B and linear algebra on shares.

A :class:`Shared` value keeps every party's share in one stacked ring
tensor of shape ``(P, ...)``.  Row j is party j's share and is only ever
combined with other rows through the message bus or an ideal functionality;
local operations act row by row.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import MessageBus
from .primitives import collapse_to_two, ole_eval
from .ring import FixedPointCodec, RingTensor, stack as ring_stack


@dataclass(frozen=True)
class PartyShare:
    """One party's share of a vector or matrix."""

    party_id: int
    value: RingTensor

    @property
    def codec(self):
        return self.value.codec

    @property
    def shape(self):
        return self.value.shape


class Shared:
    """All parties' additive shares of one array."""

    __slots__ = ("stack",)

    def __init__(self, stack: RingTensor):
        if stack.ndim < 1 or stack.shape[0] < 2:
            raise ValueError("a sharing needs a leading party axis with P >= 2")
        self.stack = stack

    @classmethod
    def from_parties(cls, shares) -> "Shared":
        shares = sorted(shares, key=lambda s: s.party_id)
        if [s.party_id for s in shares] != list(range(len(shares))):
            raise ValueError("need exactly one share per party 0..P-1")
        shapes = {s.shape for s in shares}
        codecs = {s.codec for s in shares}
        if len(shapes) != 1 or len(codecs) != 1:
            raise ValueError("shares disagree on shape or codec")
        return cls(ring_stack([s.value for s in shares]))

    @classmethod
    def zeros(cls, P: int, shape, codec: FixedPointCodec) -> "Shared":
        shape = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
        return cls(codec.zeros((P,) + shape))

    @classmethod
    def public(cls, value, P: int, codec: FixedPointCodec) -> "Shared":
        """Trivial sharing of a public value: party 0 holds it, others zero."""
        enc = codec.encode(value)
        out = cls.zeros(P, enc.shape, codec)
        out.stack[0] = enc
        return out

    @property
    def P(self) -> int:
        return self.stack.shape[0]

    @property
    def codec(self) -> FixedPointCodec:
        return self.stack.codec

    @property
    def shape(self) -> tuple:
        return self.stack.shape[1:]

    def party(self, j: int) -> PartyShare:
        return PartyShare(j, self.stack[j])

    def __getitem__(self, idx) -> "Shared":
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Shared(RingTensor(self.stack.data[(slice(None),) + idx], self.codec))

    def reshape(self, *shape) -> "Shared":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Shared(self.stack.reshape((self.P,) + tuple(shape)))

    @property
    def T(self) -> "Shared":
        axes = (0,) + tuple(reversed(range(1, self.stack.ndim)))
        return Shared(self.stack.transpose(*axes))

    def broadcast_to(self, shape) -> "Shared":
        return Shared(self.stack.broadcast_to((self.P,) + tuple(shape)))

    def copy(self) -> "Shared":
        return Shared(self.stack.copy())

    def sum(self, axis=-1) -> "Shared":
        """Local sum along a value axis (no communication)."""
        ax = axis % len(self.shape) + 1
        return Shared(self.stack.sum(axis=ax))

    def __add__(self, other):
        return add_local(self, other)

    def __sub__(self, other):
        return sub_local(self, other)

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        return f"Shared(P={self.P}, shape={self.shape})"


# -- creation / opening -------------------------------------------------

def split(clear, P: int, codec: FixedPointCodec, rng: np.random.Generator) -> Shared:
    """Split ``clear`` into P additive shares; the first P-1 are uniform on Z_B."""
    if P < 2:
        raise ValueError("P must be at least 2")
    enc = codec.encode(clear)
    parts = [codec.random(enc.shape, rng) for _ in range(P - 1)]
    last = enc
    for p in parts:
        last = last - p
    return Shared(ring_stack(parts + [last]))


def split_ring(value: RingTensor, P: int, rng: np.random.Generator) -> Shared:
    """Split an already-encoded ring tensor."""
    codec = value.codec
    parts = [codec.random(value.shape, rng) for _ in range(P - 1)]
    last = value
    for p in parts:
        last = last - p
    return Shared(ring_stack(parts + [last]))


def reconstruct_ring(shared: Shared) -> RingTensor:
    return shared.stack.sum(axis=0)


def reconstruct(shared) -> np.ndarray:
    """Sum all shares mod B and decode.  Accepts a Shared or a list of PartyShares."""
    if not isinstance(shared, Shared):
        shared = Shared.from_parties(shared)
    return reconstruct_ring(shared).decode()


def reveal(shared: Shared, bus: MessageBus) -> np.ndarray:
    """Every party sends its share to every other party; all learn the value."""
    P = shared.P
    for j in range(P):
        for k in range(P):
            if j != k:
                bus.send_ring(j, k, "REVEAL", shared.stack[j])
                bus.recv(j, k, "REVEAL")
    return reconstruct(shared)


def reshare_inputs(shared: Shared, bus: MessageBus) -> Shared:
    """Canonical re-sharing: party j >= 1 keeps a fresh r_j and sends s_j - r_j to party 0.

    The resulting sharing depends only on the shared total and the parties'
    seeds, not on how the total was originally split.
    """
    codec = shared.codec
    out = shared.stack.copy()
    acc = out[0]
    for j in range(1, shared.P):
        r = codec.random(shared.shape, bus.party_rng[j])
        bus.send_ring(j, 0, "RESHARE", shared.stack[j] - r)
        acc = acc + bus.recv(j, 0, "RESHARE")
        out[j] = r
    out[0] = acc
    return Shared(out)


# -- local operations ----------------------------------------------------

def _check(a: Shared, b: Shared):
    if a.P != b.P or a.codec != b.codec:
        raise ValueError("operands differ in party count or codec")


def add_local(a: Shared, b: Shared) -> Shared:
    _check(a, b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return Shared(a.stack + b.stack)


def sub_local(a: Shared, b: Shared) -> Shared:
    _check(a, b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return Shared(a.stack - b.stack)


def neg(a: Shared) -> Shared:
    return Shared(-a.stack)


def add_public(a: Shared, value) -> Shared:
    """Add a public real; only party 0 changes its share."""
    out = a.stack.copy()
    out[0] = out[0] + a.codec.encode(np.broadcast_to(np.asarray(value, dtype=float), a.shape))
    return Shared(out)


def mul_public_int(a: Shared, k) -> Shared:
    """Multiply by a public integer; exact, no truncation."""
    return Shared(a.stack.mul_int(k))


def scale_public(a: Shared, c, bus: MessageBus) -> Shared:
    """Multiply by a public real (encoded at f bits) and truncate."""
    enc = a.codec.encode(np.asarray(c, dtype=float))
    return truncate(Shared(a.stack * enc), bus)


def rerandomize(a: Shared, bus: MessageBus) -> Shared:
    """Add a pseudo-random zero sharing from pairwise seeds (no messages)."""
    out = a.stack.copy()
    codec = a.codec
    for (i, j), rng in bus.pair_rng.items():
        r = codec.random(a.shape, rng)
        out[i] = out[i] + r
        out[j] = out[j] - r
    return Shared(out)


def truncate(a: Shared, bus: MessageBus, bits=None) -> Shared:
    """Drop ``bits`` (default f) fractional bits from a shared value.

    Two share-holders shift locally (party 0 floors, party 1 ceils), giving an
    error of at most one ulp; extra parties first hand their shares to party 1.
    The result is re-randomized so all shares are uniform again.
    """
    two = collapse_to_two(a, bus)
    out = two.stack.copy()
    out[0] = two.stack[0].truncate(bits)
    out[1] = two.stack[1].truncate_ceil(bits)
    return rerandomize(Shared(out), bus)


# -- products ---------------------------------------------------------------

def mul_raw(a: Shared, b: Shared, bus: MessageBus) -> Shared:
    """Elementwise (broadcasting) product at doubled precision, no truncation.

    Party j ends with c_j = a_j b_j + sum_{k != j} (n_{k,j} - r_{j,k}), where
    n_{k,j} = a_k b_j + r_{k,j} is delivered to j by oblivious evaluation.
    """
    _check(a, b)
    shape = np.broadcast_shapes(a.shape, b.shape)
    P, codec = a.P, a.codec
    a_s = [a.stack[j].broadcast_to(shape) for j in range(P)]
    b_s = [b.stack[j].broadcast_to(shape) for j in range(P)]
    c = [a_s[j] * b_s[j] for j in range(P)]
    for j in range(P):
        for k in range(P):
            if j == k:
                continue
            r = codec.random(shape, bus.party_rng[j])
            c[k] = c[k] + ole_eval(j, k, a_s[j], b_s[k], r, bus)
            c[j] = c[j] - r
    return Shared(ring_stack(c))


def mul_shares(a: Shared, b: Shared, bus: MessageBus, truncate_result=True) -> Shared:
    raw = mul_raw(a, b, bus)
    return truncate(raw, bus) if truncate_result else raw


def inner_product(a: Shared, b: Shared, bus: MessageBus) -> Shared:
    """Contract the last axis of two equally shaped sharings."""
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"inner dimension mismatch {a.shape} vs {b.shape}")
    return truncate(mul_raw(a, b, bus).sum(axis=-1), bus)


def matvec(A: Shared, v: Shared, bus: MessageBus) -> Shared:
    if A.shape[-1] != v.shape[0] or len(v.shape) != 1:
        raise ValueError(f"cannot multiply {A.shape} by {v.shape}")
    lead = (1,) * (len(A.shape) - 1)
    return inner_product(A, v.reshape(lead + v.shape).broadcast_to(A.shape), bus)


def matmul(A: Shared, B: Shared, bus: MessageBus) -> Shared:
    if len(A.shape) != 2 or len(B.shape) != 2 or A.shape[1] != B.shape[0]:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    m, p = A.shape
    q = B.shape[1]
    left = A.reshape(m, p, 1).broadcast_to((m, p, q))
    right = B.reshape(1, p, q).broadcast_to((m, p, q))
    return truncate(mul_raw(left, right, bus).sum(axis=1), bus)


def outer_product(u: Shared, v: Shared, bus: MessageBus) -> Shared:
    (m,), (q,) = u.shape, v.shape
    left = u.reshape(m, 1).broadcast_to((m, q))
    right = v.reshape(1, q).broadcast_to((m, q))
    return mul_shares(left, right, bus)


def xor_to_additive(o_1, o_2, bus: MessageBus, codec: FixedPointCodec, P: int = None) -> Shared:
    """Additive shares of the Hamming weight of ``o_1 xor o_2`` along the last axis.

    ``o_1`` is held by party 0 and ``o_2`` by party 1.  Uses
    sum(o1 ^ o2) = sum o1 + sum o2 - 2 o1.o2 with one secure inner product;
    o1 enters as a raw integer so the product needs no truncation and the
    count is exact.
    """
    o_1 = np.asarray(o_1, dtype=np.uint8)
    o_2 = np.asarray(o_2, dtype=np.uint8)
    if o_1.shape != o_2.shape:
        raise ValueError(f"bit vectors differ in shape {o_1.shape} vs {o_2.shape}")
    P = bus.P if P is None else P
    shape = o_1.shape
    left = Shared.zeros(P, shape, codec)
    raw = np.zeros(shape + (2,), dtype=np.uint64)
    raw[..., 0] = o_1
    left.stack[0] = RingTensor(raw, codec)
    right = Shared.zeros(P, shape, codec)
    right.stack[1] = codec.encode(o_2.astype(float))
    cross = mul_raw(left, right, bus).sum(axis=-1)
    out = mul_public_int(cross, -2)
    st = out.stack.copy()
    st[0] = st[0] + codec.encode(o_1.sum(axis=-1).astype(float))
    st[1] = st[1] + codec.encode(o_2.sum(axis=-1).astype(float))
    return Shared(st)
