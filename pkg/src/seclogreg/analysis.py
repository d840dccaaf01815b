"""Clear-computation baselines, float shadows of the secure protocols, and
error-bound calculators.

The shadows run the same algorithms as the secure fits in float64 on the
same quantized inputs, so a secure fit can be checked against them directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .matinv import ConvergenceError
from .ring import FixedPointCodec

# sigma(a*) where sigma'' of the logistic attains its minimum
SIGMA_AT_ASTAR = (6.0 + math.sqrt(12.0)) / 12.0


def sigmoid(a):
    return expit(a)


def sigma_second(s):
    """sigma'' written in terms of s = sigma(a)."""
    return s * (1.0 - s) * (1.0 - 2.0 * s)


def log_likelihood(X, y, beta) -> float:
    a = np.asarray(X) @ np.asarray(beta)
    return float(np.sum(y * a - np.logaddexp(0.0, a)))


def gradient(X, y, beta):
    return X.T @ (y - sigmoid(X @ beta))


@dataclass
class ClearFit:
    beta: np.ndarray
    iterations: int
    loglik: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    inversion_iterations: int = 0
    inversion_schedule: tuple = ()
    xdelta: list = field(default_factory=list)
    sigma_hat: list = field(default_factory=list)
    max_step: list = field(default_factory=list)


def exact_newton_raphson(X, y, eps=1e-12, max_iter=100) -> ClearFit:
    """Newton-Raphson with exact sigmoids; stops when grad' H^{-1} grad <= eps."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X.shape[1])
    fit = ClearFit(beta, 0)
    for t in range(max_iter):
        p = sigmoid(X @ beta)
        g = X.T @ (y - p)
        H = (X * (p * (1 - p))[:, None]).T @ X
        fit.loglik.append(log_likelihood(X, y, beta))
        fit.betas.append(beta.copy())
        delta = np.linalg.solve(H, g)
        if g @ delta <= eps:
            fit.beta, fit.iterations = beta, t + 1
            return fit
        beta = beta + delta
    raise ConvergenceError(f"Newton-Raphson did not converge in {max_iter} iterations", fit.loglik)


def hessian_lb_clear(X, y, eps=1e-12, max_iter=10000) -> ClearFit:
    """Fixed-curvature ascent beta += 4 (X'X)^{-1} grad with exact sigmoids."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    H = 4.0 * np.linalg.inv(X.T @ X)
    beta = np.zeros(X.shape[1])
    fit = ClearFit(beta, 0)
    for t in range(max_iter):
        g = gradient(X, y, beta)
        fit.loglik.append(log_likelihood(X, y, beta))
        fit.betas.append(beta.copy())
        delta = H @ g
        if g @ delta <= eps:
            fit.beta, fit.iterations = beta, t + 1
            return fit
        beta = beta + delta
    raise ConvergenceError(f"Hessian-bound iteration did not converge in {max_iter} iterations",
                           fit.loglik)


# -- clear versions of the secure building blocks ----------------------------

def clear_reciprocal(a, x0, iterations):
    x = x0
    for _ in range(iterations):
        x = x * (2.0 - a * x)
    return x


def clear_newton_schulz(A, eps=1e-3, max_iter=64):
    """Coupled Newton-Schulz in floats with the same stopping rule as the secure one.

    Returns (inverse, iterations, residuals) with residual max|M_s - I|.
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    c = np.trace(A)
    X = np.eye(d) / c
    M = A / c
    residuals = []
    for s in range(1, max_iter + 1):
        X, M = 2 * X - X @ M, 2 * M - M @ M
        residuals.append(float(np.max(np.abs(M - np.eye(d)))))
        if np.trace(M) >= d - eps:
            return X, s, residuals
    raise ConvergenceError(f"Newton-Schulz did not converge in {max_iter} iterations", residuals)


def quantize(x, codec: FixedPointCodec):
    """Round to the codec's fixed-point grid, as encoding does."""
    return np.rint(np.asarray(x, dtype=float) * 2.0 ** codec.frac_bits) / 2.0 ** codec.frac_bits


def ecdf(z_sorted, a):
    """F_L(a) = #{l : a >= z_l} / L."""
    return np.searchsorted(z_sorted, a, side="right") / len(z_sorted)


def default_eps_conv(n, L):
    return 4.0 * n / float(L) ** 2


def clear_oracle_protocol1(X, y, z, config, codec: FixedPointCodec | None = None) -> ClearFit:
    """Float shadow of the first protocol with the same samples and settings."""
    codec = codec or FixedPointCodec()
    X = quantize(X, codec)
    y = quantize(y, codec)
    zs = np.sort(quantize(z, codec))
    n, d = X.shape
    eps = config.eps_conv if config.eps_conv is not None else default_eps_conv(n, len(zs))
    beta = np.zeros(d)
    fit = ClearFit(beta, 0)
    schedule = []
    if config.hessian_mode == "hessian_lb":
        inv, it, _ = clear_newton_schulz(X.T @ X, eps=config.inv_eps)
        H_inv = 4.0 * inv
        schedule.append(it)
    for t in range(config.max_outer):
        F = ecdf(zs, X @ beta)
        g = X.T @ (y - F)
        if config.hessian_mode == "full_newton":
            w = F * (1 - F)
            H_inv, it, _ = clear_newton_schulz((X * w[:, None]).T @ X, eps=config.inv_eps)
            schedule.append(it)
        delta = H_inv @ g
        lam = float(g @ delta)
        fit.betas.append(beta.copy())
        fit.loglik.append(log_likelihood(X, y, beta))
        if lam <= eps:
            fit.beta, fit.iterations = beta, t + 1
            fit.inversion_schedule = tuple(schedule)
            fit.inversion_iterations = sum(schedule)
            return fit
        beta = beta + delta
    raise ConvergenceError(f"protocol-1 shadow did not converge in {config.max_outer} rounds",
                           fit.loglik)


def clear_oracle_protocol2(X, y, config, codec: FixedPointCodec | None = None, b_threshold=None) -> ClearFit:
    """Float shadow of the coupled Euler iteration."""
    codec = codec or FixedPointCodec()
    X = quantize(X, codec)
    y = quantize(y, codec)
    n, d = X.shape
    b = b_threshold if b_threshold is not None else config.resolve_b(n, data_radius(X))
    inv, inv_it, _ = clear_newton_schulz(X.T @ X, eps=config.inv_eps)
    H_inv = 4.0 * inv
    beta = np.zeros(d)
    s = np.full(n, 0.5)
    k = config.k
    fit = ClearFit(beta, 0, inversion_iterations=inv_it, inversion_schedule=(inv_it,))
    for t in range(config.max_outer):
        g = X.T @ (y - s)
        fit.betas.append(beta.copy())
        fit.loglik.append(log_likelihood(X, y, beta))
        fit.sigma_hat.append(s.copy())
        if g @ g <= b * b:
            fit.beta, fit.iterations = beta, t + 1
            return fit
        delta = H_inv @ g
        beta = beta + delta
        xd = X @ delta
        fit.xdelta.append(xd)
        step = xd / k
        fit.max_step.append(float(np.max(np.abs(step))))
        for _ in range(k):
            s = s + step * (s * (1 - s))
    raise ConvergenceError(f"protocol-2 shadow did not converge in {config.max_outer} rounds",
                           fit.loglik)


# -- bounds ------------------------------------------------------------------

def dkw_sample_size(eps, alpha) -> int:
    """Smallest L with P(sup|F_L - F| > eps) <= alpha by the DKW inequality."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    return max(0, math.ceil(-0.5 * eps ** -2 * math.log(alpha / 2.0)))


def param_error_bound(R, L, sup_err, lambda_min_hat) -> float:
    if lambda_min_hat <= 0:
        raise ValueError("lambda_min_hat must be positive")
    if R < 0 or sup_err < 0 or L <= 0:
        raise ValueError("R, L and sup_err must be non-negative (L positive)")
    inv_L = 0.0 if math.isinf(L) else 1.0 / L
    return R * (inv_L + sup_err) / lambda_min_hat


def euler_error_bound(tau) -> float:
    """Worst-case drift of the tracked sigmoid for inner steps of size tau."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    s2 = sigma_second(SIGMA_AT_ASTAR)
    return 0.5 * tau * (0.25 - 2.0 * tau * s2)


def sigma_param_bound(R, tau, lambda_min_hat, c=0.125) -> float:
    """Distance bound 2 R c tau / lambda for the Euler-coupled fit."""
    if lambda_min_hat <= 0:
        raise ValueError("lambda_min_hat must be positive")
    return 2.0 * R * c * tau / lambda_min_hat


def choose_k(n, tau, frac_bits=None) -> int:
    """ceil(sqrt(n) / tau), optionally capped at 2**(frac_bits/2)."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    if n < 1:
        raise ValueError("n must be at least 1")
    k = math.ceil(math.sqrt(n) / tau)
    if frac_bits is not None:
        k = min(k, 2 ** (frac_bits // 2))
    return k


def ecdf_sup_error(z, grid=None) -> float:
    """sup |F_L - sigma|.

    Without ``grid`` the supremum is exact: it is attained at a jump, on one
    side or the other.  With ``grid`` (an array, or True for 1e5 points on
    [-10, 10]) it is the maximum over the grid points.
    """
    zs = np.sort(np.asarray(z, dtype=float))
    L = len(zs)
    if grid is None:
        s = sigmoid(zs)
        l = np.arange(1, L + 1)
        return float(max(np.max(np.abs(l / L - s)), np.max(np.abs((l - 1) / L - s))))
    if grid is True:
        grid = np.linspace(-10.0, 10.0, 100_000)
    return float(np.max(np.abs(ecdf(zs, grid) - sigmoid(grid))))


def euler_sup_error(a_end, k):
    """Max deviation of k Euler steps of s' = s(1-s) from 0 to a_end versus the sigmoid."""
    s = 0.5
    h = a_end / k
    worst = 0.0
    for i in range(1, k + 1):
        s = s + h * s * (1 - s)
        worst = max(worst, abs(s - sigmoid(i * h)))
    return worst


def fisher_min_eigenvalue(X, beta) -> float:
    """Smallest eigenvalue of the per-case Fisher information at beta."""
    X = np.asarray(X, dtype=float)
    p = sigmoid(X @ beta)
    info = (X * (p * (1 - p))[:, None]).T @ X / X.shape[0]
    return float(np.linalg.eigvalsh(info)[0])


def data_radius(X) -> float:
    return float(np.max(np.linalg.norm(np.asarray(X, dtype=float), axis=1)))


@dataclass
class BoundReport:
    R: float = 0.0
    lambda_min_hat: float = 0.0
    dkw_eps: float = 0.0
    L: float = 0.0
    alpha: float = 0.0
    tau: float = 0.0
    k: float = 0.0
    bound_value: float = 0.0

    def __post_init__(self):
        if self.bound_value < 0:
            raise ValueError("bound_value must be non-negative")

    def to_text(self) -> str:
        return "".join(f"{k}={v!r}\n" for k, v in self.__dict__.items())

    @classmethod
    def from_text(cls, text):
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)
        return cls(**{k: float(v) for k, v in kv.items()})
