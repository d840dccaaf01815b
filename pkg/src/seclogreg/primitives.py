"""Ideal functionalities: oblivious linear evaluation and greater-than.

Both are trusted-dealer stand-ins for the cryptographic sub-protocols.  Each
delivers exactly what its leakage contract allows and records the delivery
on the bus transcript.  The comparison predicates act on the signed reading
of ring values, so ``gt_xor`` compares the two sides' encoded reals.
"""
from __future__ import annotations

import numpy as np

from .network import MessageBus
from .ring import RingTensor


def ole_eval(j: int, k: int, a_j: RingTensor, b_k: RingTensor, r_jk: RingTensor,
             bus: MessageBus) -> RingTensor:
    """Party k learns ``a_j * b_k + r_jk`` elementwise and nothing else.

    Party j supplies the coefficient and the fresh mask; it receives nothing.
    One transcript entry per scalar evaluation.
    """
    if j == k:
        raise ValueError("oblivious evaluation needs two distinct parties")
    n = a_j * b_k + r_jk
    bus.send_ring(j, k, "OLE", n)
    return bus.recv(j, k, "OLE")


def gt_xor(u: RingTensor, v: RingTensor, bus: MessageBus, sides=(0, 1)):
    """xor-shared bit of ``u >= v``; side A holds u, side B holds v.

    The functionality draws a fresh uniform mask per comparison: side A gets
    the mask, side B gets mask xor result, so each bit alone is uniform.
    """
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch {u.shape} vs {v.shape}")
    a, b = sides
    res = (~(u - v).sign()).astype(np.uint8)
    mask = bus.func_rng.integers(0, 2, size=res.shape, dtype=np.uint8)
    out_a = mask
    out_b = mask ^ res
    payload = np.stack([out_a.reshape(-1), out_b.reshape(-1)], axis=1)
    bus.send(a, b, "GT", payload, obj=(out_a, out_b))
    return bus.recv(a, b, "GT")


def collapse_to_two(shared, bus: MessageBus):
    """Move the shares of parties 2..P-1 onto party 1 (one AGG message each).

    Returns a new sharing held by parties 0 and 1 only; no-op for P = 2.
    """
    P = shared.P
    if P == 2:
        return shared
    stack = shared.stack.copy()
    acc = stack[1]
    for j in range(2, P):
        bus.send_ring(j, 1, "AGG", stack[j])
        acc = acc + bus.recv(j, 1, "AGG")
        stack[j] = shared.codec.zeros(shared.shape)
    stack[1] = acc
    return type(shared)(stack)


def interval_check(shared, c: float, bus: MessageBus):
    """xor shares (party 0, party 1) of ``1{a >= c}`` for a shared ``a`` and public ``c``."""
    two = collapse_to_two(shared, bus)
    codec = shared.codec
    u = two.stack[0]
    v = codec.encode(np.broadcast_to(np.asarray(c, dtype=float), shared.shape)) - two.stack[1]
    return gt_xor(u, v, bus)


def reveal_bit(o_a, o_b, bus: MessageBus, kind: str = "bit", sides=(0, 1)) -> bool:
    """Both holders broadcast their xor share; everyone learns the bit."""
    a, b = sides
    o_a = np.asarray(o_a, dtype=np.uint8)
    o_b = np.asarray(o_b, dtype=np.uint8)
    for holder, bits in ((a, o_a), (b, o_b)):
        for r in range(bus.P):
            if r != holder:
                bus.send(holder, r, "REVEAL_BIT", bits.reshape(-1, 1))
                bus.recv(holder, r, "REVEAL_BIT")
    value = bool(np.all((o_a ^ o_b) == 1)) if o_a.size == 1 else None
    if value is None:
        raise ValueError("reveal_bit reveals a single control bit")
    return bus.decide(kind, value)
