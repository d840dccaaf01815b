"""Logistic regression on shares using only sums and products.

Instead of evaluating the sigmoid, the protocol tracks approximate values
sigma_hat_i and moves them along with beta: after each step Delta the
predictors change by X Delta, and sigma_hat follows the ODE s' = s(1 - s)
over that change, integrated with k Euler steps.  The only comparisons are
in the one-off matrix inversion and in the stopping test
||X'(y - sigma_hat)||^2 <= b^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import choose_k, data_radius, log_likelihood
from .data import combine, stack_inputs
from .matinv import sec_matrix_inverse
from .network import MessageBus
from .outputs import FitOutput, FitTrace
from .primitives import interval_check, reveal_bit
from .protocol1 import NonConvergenceError
from .sharing import (Shared, add_public, add_local, inner_product, matvec, mul_public_int,
                      mul_shares, neg, reconstruct, reshare_inputs, reveal, scale_public,
                      sub_local)

EULER_C = 0.125


@dataclass
class Protocol2Config:
    k: int = 10
    b_threshold: float | None = None
    radius: float | None = None
    tau_floor: float = 1e-3
    max_outer: int = 200
    seed: int = 0
    inv_eps: float = 1e-5
    mode: str = "trace"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.b_threshold is not None and self.b_threshold <= 0:
            raise ValueError("b_threshold must be positive")
        if self.mode not in ("trace", "strict"):
            raise ValueError("mode must be 'trace' or 'strict'")

    def resolve_b(self, n, radius=None) -> float:
        """Stopping level b; default n R c tau_floor with c = 1/8."""
        if self.b_threshold is not None:
            return self.b_threshold
        R = self.radius if self.radius is not None else radius
        if R is None:
            raise ValueError("strict mode needs b_threshold or radius in the config")
        return n * R * EULER_C * self.tau_floor


def gtilde_k(sigma_hat: Shared, step: Shared, k: int, bus: MessageBus) -> Shared:
    """k Euler steps sigma_hat += (step / k) * sigma_hat (1 - sigma_hat).

    Each step costs one product per case for g = s(1 - s) and one more to
    apply the scaled step.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    with bus.in_phase("euler_scale"):
        h = scale_public(step, 1.0 / k, bus) if k > 1 else step
    s = sigma_hat
    for _ in range(k):
        with bus.in_phase("euler_g"):
            g = mul_shares(s, add_public(neg(s), 1.0), bus)
        with bus.in_phase("euler_scale"):
            s = add_local(s, mul_shares(h, g, bus))
    return s


def fit_protocol2(party_inputs, config: Protocol2Config | None = None,
                  bus: MessageBus | None = None) -> FitOutput:
    """Coupled Euler iteration from beta = 0, sigma_hat = 1/2."""
    config = config or Protocol2Config()
    P = len(party_inputs)
    bus = bus or MessageBus(P, seed=config.seed)
    X, y = stack_inputs(party_inputs)
    codec = X.codec
    n, d = X.shape
    if config.k > 2 ** (codec.frac_bits // 2):
        raise ValueError(f"k={config.k} exceeds 2^(f/2); 1/k would not be representable")
    tracing = config.mode == "trace"
    clear = combine(party_inputs) if (tracing or (config.b_threshold is None and config.radius is None)) else None
    if config.mode == "strict" and config.b_threshold is None and config.radius is None:
        raise ValueError("strict mode needs b_threshold or radius in the config")
    b = config.resolve_b(n, data_radius(clear.X) if clear is not None else None)
    trace = FitTrace() if tracing else None

    bus.round = 0
    with bus.in_phase("input"):
        X = reshare_inputs(X, bus)
        y = reshare_inputs(y, bus)
    with bus.in_phase("gram"):
        G = inner_product(X.T.reshape(d, 1, n).broadcast_to((d, d, n)),
                          X.T.reshape(1, d, n).broadcast_to((d, d, n)), bus)
    with bus.in_phase("inversion"):
        inv = sec_matrix_inverse(G, bus, eps=config.inv_eps)
    H_inv = mul_public_int(inv.inverse_shares, 4)

    beta = Shared.zeros(P, d, codec)
    sigma_hat = Shared.public(np.full(n, 0.5), P, codec)
    for t in range(1, config.max_outer + 1):
        bus.round = t
        with bus.in_phase("gradient"):
            g = inner_product(X.T, sub_local(y, sigma_hat).reshape(1, n).broadcast_to((d, n)), bus)
        if tracing:
            b_now = reconstruct(beta)
            trace.betas.append(b_now)
            trace.loglik.append(log_likelihood(clear.X, clear.y, b_now))
            trace.sigma_hat.append(reconstruct(sigma_hat))
            gv = reconstruct(g)
            trace.grad_norm_sq.append(float(gv @ gv))
        with bus.in_phase("stopping"):
            gg = inner_product(g, g, bus)
            halt = reveal_bit(*interval_check(neg(gg), -b * b, bus), bus, kind="converged")
        if halt:
            break
        with bus.in_phase("step"):
            delta = matvec(H_inv, g, bus)
        beta = beta + delta
        with bus.in_phase("predictor"):
            xd = matvec(X, delta, bus)
        if tracing:
            xdv = reconstruct(xd)
            trace.xdelta.append(xdv)
            trace.max_step.append(float(np.max(np.abs(xdv))) / config.k)
        sigma_hat = gtilde_k(sigma_hat, xd, config.k, bus)
    else:
        raise NonConvergenceError(f"no convergence within {config.max_outer} rounds",
                                  trace.loglik if tracing else [])

    with bus.in_phase("output"):
        beta_clear = reveal(beta, bus)
    return FitOutput(beta_clear, t, inv.iterations, (inv.iterations,), trace)


__all__ = ["Protocol2Config", "fit_protocol2", "gtilde_k", "choose_k", "EULER_C"]
