"""Logistic regression on shares with an empirical-CDF sigmoid.

Each round evaluates F_L(x_i' beta) for every case by comparing the shared
predictor against L frozen logistic samples (nL comparisons), assembles the
gradient (and, in full Newton mode, the Hessian) from secure products, takes
a Newton-type step, and stops when the shared Newton decrement
lambda^2 = grad' Delta falls to eps.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import default_eps_conv, log_likelihood
from .data import combine, stack_inputs
from .matinv import ConvergenceError, sec_matrix_inverse
from .network import MessageBus
from .outputs import FitOutput, FitTrace
from .primitives import collapse_to_two, gt_xor, interval_check, reveal_bit
from .sharing import (Shared, add_public, inner_product, matvec, mul_public_int, mul_raw,
                      mul_shares, neg, reconstruct, reshare_inputs, reveal,
                      sub_local, truncate, xor_to_additive)

HESSIAN_MODES = ("hessian_lb", "full_newton")
SAMPLE_STREAM = 0x51  # seed-sequence key of the logistic sample draw


class NonConvergenceError(ConvergenceError):
    """The outer loop exhausted max_outer."""


@dataclass
class Protocol1Config:
    L: int = 200
    eps_conv: float | None = None  # None -> 4 n / L^2
    hessian_mode: str = "hessian_lb"
    max_outer: int = 100
    seed: int = 0
    inv_eps: float = 1e-5
    L_schedule: tuple = ()
    mode: str = "trace"

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be at least 1")
        if self.eps_conv is not None and self.eps_conv <= 0:
            raise ValueError("eps_conv must be positive")
        if self.hessian_mode not in HESSIAN_MODES:
            raise ValueError(f"hessian_mode must be one of {HESSIAN_MODES}")
        if self.mode not in ("trace", "strict"):
            raise ValueError("mode must be 'trace' or 'strict'")
        self.L_schedule = tuple(int(v) for v in self.L_schedule)

    def stages(self):
        return self.L_schedule or (self.L,)


@dataclass(frozen=True)
class LogisticSampleSet:
    z: np.ndarray = field(repr=False)

    @property
    def L(self):
        return len(self.z)


def draw_logistic_samples(L: int, rng: np.random.Generator) -> LogisticSampleSet:
    """L i.i.d. standard logistic draws z = log(u / (1 - u))."""
    if L < 1:
        raise ValueError("L must be at least 1")
    u = rng.random(L)
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    return LogisticSampleSet(np.log(u) - np.log1p(-u))


def sample_sets(config: Protocol1Config):
    """The sample sets a fit uses, one per stage, drawn by party 1's side."""
    rng = np.random.default_rng([config.seed, SAMPLE_STREAM])
    return [draw_logistic_samples(L, rng) for L in config.stages()]


def ecdf_sigmoid_shares(inner: Shared, z: LogisticSampleSet, bus: MessageBus, scale=True) -> Shared:
    """Shares of F_L(a_i) = L^{-1} #{l : a_i >= z_l} for each shared a_i.

    Side A (party 0) compares its share against z_l minus side B's share,
    which is the same test as a_i >= z_l.  With ``scale`` False the exact
    integer counts are returned (at fixed-point scale).
    """
    codec = inner.codec
    (n,) = inner.shape
    L = z.L
    two = collapse_to_two(inner, bus)
    zt = codec.encode(z.z)
    u = two.stack[0].reshape(n, 1).broadcast_to((n, L)).copy()
    v = zt.reshape(1, L) - two.stack[1].reshape(n, 1)
    o_a, o_b = gt_xor(u, v, bus)
    counts = xor_to_additive(o_a, o_b, bus, codec, P=inner.P)
    if not scale:
        return counts
    # counts are exact integers: scale by 1/L with s guard bits so the
    # rounding of 1/L does not grow with the count
    f = codec.frac_bits
    s = max(0, min(f, codec.modulus_bits - 2 * f - L.bit_length() - 2))
    K = round(2 ** (f + s) / L)
    return truncate(mul_public_int(counts, K), bus, bits=f + s)


def gradient_shares(X: Shared, y: Shared, sigma: Shared, bus: MessageBus) -> Shared:
    """Shares of sum_i x_i (y_i - sigma_i); n d products."""
    r = sub_local(y, sigma)
    n, d = X.shape
    return inner_product(X.T, r.reshape(1, n).broadcast_to((d, n)), bus)


def case_outer_products(X: Shared, bus: MessageBus) -> Shared:
    """Shares of x_i x_i' for every case (fixed data, computed once)."""
    n, d = X.shape
    left = X.reshape(n, d, 1).broadcast_to((n, d, d))
    right = X.reshape(n, 1, d).broadcast_to((n, d, d))
    return mul_shares(left, right, bus)


def hessian_shares(X: Shared, sigma: Shared, bus: MessageBus, outer: Shared | None = None) -> Shared:
    """Shares of -grad^2 l = sum_i sigma_i (1 - sigma_i) x_i x_i'.

    One product per case for the weight and d^2 per case for the weighted
    outer products.
    """
    n, d = X.shape
    if outer is None:
        outer = case_outer_products(X, bus)
    w = mul_shares(sigma, add_public(neg(sigma), 1.0), bus)
    weighted = mul_raw(w.reshape(n, 1, 1).broadcast_to((n, d, d)), outer, bus)
    return truncate(weighted.sum(axis=0), bus)


def convergence_check(grad: Shared, delta: Shared, eps: float, bus: MessageBus) -> bool:
    """Revealed bit of lambda^2 = grad' delta <= eps."""
    lam = inner_product(grad, delta, bus)
    return reveal_bit(*interval_check(neg(lam), -eps, bus), bus, kind="converged")


def _peek(s: Shared):
    return reconstruct(s)


def fit_protocol1(party_inputs, config: Protocol1Config | None = None,
                  bus: MessageBus | None = None) -> FitOutput:
    """Fit on the parties' additive inputs; returns the output triple.

    beta starts at 0.  In hessian_lb mode (X'X)^{-1} is inverted once and
    every round steps beta += 4 (X'X)^{-1} grad; in full_newton mode the
    Hessian is rebuilt and inverted each round.
    """
    config = config or Protocol1Config()
    P = len(party_inputs)
    bus = bus or MessageBus(P, seed=config.seed)
    X, y = stack_inputs(party_inputs)
    codec = X.codec
    n, d = X.shape
    tracing = config.mode == "trace"
    trace = FitTrace() if tracing else None
    clear = combine(party_inputs) if tracing else None

    bus.round = 0
    with bus.in_phase("input"):
        X = reshare_inputs(X, bus)
        y = reshare_inputs(y, bus)
    schedule = []
    H_inv = outer = None
    if config.hessian_mode == "hessian_lb":
        with bus.in_phase("gram"):
            G = inner_product(X.T.reshape(d, 1, n).broadcast_to((d, d, n)),
                              X.T.reshape(1, d, n).broadcast_to((d, d, n)), bus)
        with bus.in_phase("inversion"):
            inv = sec_matrix_inverse(G, bus, eps=config.inv_eps)
        H_inv = mul_public_int(inv.inverse_shares, 4)
        schedule.append(inv.iterations)
    else:
        with bus.in_phase("outer"):
            outer = case_outer_products(X, bus)

    beta = Shared.zeros(P, d, codec)
    rnd = 0
    for stage, z in enumerate(sample_sets(config)):
        eps = config.eps_conv if config.eps_conv is not None else default_eps_conv(n, z.L)
        for _ in range(config.max_outer):
            rnd += 1
            bus.round = rnd
            with bus.in_phase("predictor"):
                a = matvec(X, beta, bus)
            with bus.in_phase("sigmoid"):
                sigma = ecdf_sigmoid_shares(a, z, bus)
            with bus.in_phase("gradhess"):
                g = gradient_shares(X, y, sigma, bus)
                if config.hessian_mode == "full_newton":
                    H = hessian_shares(X, sigma, bus, outer=outer)
            if config.hessian_mode == "full_newton":
                with bus.in_phase("inversion"):
                    inv = sec_matrix_inverse(H, bus, eps=config.inv_eps)
                H_inv = inv.inverse_shares
                schedule.append(inv.iterations)
            with bus.in_phase("step"):
                delta = matvec(H_inv, g, bus)
            if tracing:
                b_now = _peek(beta)
                trace.betas.append(b_now)
                trace.loglik.append(log_likelihood(clear.X, clear.y, b_now))
                gv, dv = _peek(g), _peek(delta)
                trace.lambda_sq.append(float(gv @ dv))
                trace.grad_norm_sq.append(float(gv @ gv))
            with bus.in_phase("convergence"):
                halt = convergence_check(g, delta, eps, bus)
            if halt:
                break
            beta = beta + delta
        else:
            raise NonConvergenceError(
                f"no convergence within {config.max_outer} rounds (stage L={z.L}); "
                "raise max_outer, or check for separable data",
                trace.loglik if tracing else [])

    with bus.in_phase("output"):
        beta_clear = reveal(beta, bus)
    return FitOutput(beta_clear, rnd, sum(schedule), tuple(schedule), trace)
