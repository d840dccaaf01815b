"""Division-free reciprocal and matrix inverse on shares.

The matrix inverse is the coupled Newton-Schulz iteration

    X_{s+1} = 2 X_s - X_s M_s,   M_{s+1} = 2 M_s - M_s^2,

started from X_0 = I / c and M_0 = A / c with c = trace(A).  For a symmetric
positive definite A every eigenvalue of M_s lies in (0, 1] and tends to 1, so
the iteration stops once tr(M_s) >= d - eps, tested with one comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import MessageBus
from .primitives import interval_check, reveal_bit
from .sharing import (Shared, add_public, matmul, mul_public_int, mul_shares, reconstruct,
                      sub_local)


class ConvergenceError(RuntimeError):
    """An iteration hit its budget; ``trace`` holds per-iteration diagnostics."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass
class InversionResult:
    inverse_shares: Shared
    iterations: int
    residual_trace: list = field(default_factory=list)


def reciprocal_iterations(frac_bits: int, x0: float, a_min: float) -> int:
    """Public iteration budget for x <- x(2 - a x) starting at x0 with a >= a_min."""
    growth = max(0, math.ceil(math.log2(1.0 / (a_min * x0))))
    return growth + math.ceil(math.log2(frac_bits + 1)) + 1


def sec_reciprocal(a: Shared, bus: MessageBus, x0=None, eps=None, a_min=0.25,
                   iterations=None, check=True, max_iter=64) -> Shared:
    """Shares of 1/a for a shared positive scalar a.

    Runs a fixed, public number of Newton steps (so the message pattern does
    not depend on a).  With ``check`` a final comparison confirms
    |a x - 1| <= eps on the shares and raises if not.
    """
    codec = a.codec
    f = codec.frac_bits
    x0 = 2.0 ** (-f + 1) if x0 is None else float(x0)
    eps = 1e-4 if eps is None else eps
    if x0 <= 0:
        raise ValueError("initial value must be positive")
    n_iter = reciprocal_iterations(f, x0, a_min) if iterations is None else int(iterations)
    if n_iter > max_iter:
        raise ConvergenceError(f"reciprocal needs {n_iter} iterations, budget is {max_iter}")
    x = Shared.public(np.full(a.shape, x0), a.P, codec)
    for _ in range(n_iter):
        ax = mul_shares(a, x, bus)
        x = mul_shares(x, add_public(-ax, 2.0), bus)
    if check:
        err = add_public(mul_shares(a, x, bus), -1.0)
        # both one-sided tests: -eps <= a x - 1 <= eps
        lo = reveal_bit(*interval_check(err, -eps, bus), bus, kind="reciprocal")
        hi = reveal_bit(*interval_check(-err, -eps, bus), bus, kind="reciprocal")
        if not (lo and hi):
            raise ConvergenceError(f"reciprocal not within {eps} after {n_iter} iterations")
    return x


def _trace(A: Shared) -> Shared:
    d = A.shape[0]
    idx = np.arange(d)
    return Shared(type(A.stack)(A.stack.data[:, idx, idx], A.codec)).sum(axis=-1)


def sec_matrix_inverse(A: Shared, bus: MessageBus, eps=1e-3, max_iter=64,
                       a_min=0.25, peek=False) -> InversionResult:
    """Shares of A^{-1} for a shared symmetric positive definite A.

    ``peek`` records the reconstructed residual max|M_s - I| per iteration
    (test instrumentation only; nothing is sent for it).
    """
    if len(A.shape) != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"need a square matrix, got {A.shape}")
    d = A.shape[0]
    P, codec = A.P, A.codec
    c = _trace(A)
    c_inv = sec_reciprocal(c, bus, a_min=a_min, check=False)
    # X_0 = I / c: each party puts its share of 1/c on the diagonal
    X = Shared.zeros(P, (d, d), codec)
    for i in range(d):
        X.stack.data[:, i, i] = c_inv.stack.data
    M = mul_shares(A, c_inv.reshape(1, 1).broadcast_to((d, d)), bus)
    residuals = []
    for s in range(1, max_iter + 1):
        X_next = sub_local(mul_public_int(X, 2), matmul(X, M, bus))
        M = sub_local(mul_public_int(M, 2), matmul(M, M, bus))
        X = X_next
        if peek:
            residuals.append(float(np.max(np.abs(reconstruct(M) - np.eye(d)))))
        done = reveal_bit(*interval_check(_trace(M), d - eps, bus), bus, kind="inversion")
        if done:
            return InversionResult(X, s, residuals)
    raise ConvergenceError(f"matrix inversion did not converge in {max_iter} iterations", residuals)
