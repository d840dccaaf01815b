import numpy as np
import pytest

from seclogreg.analysis import clear_newton_schulz
from seclogreg.matinv import (ConvergenceError, reciprocal_iterations, sec_matrix_inverse,
                              sec_reciprocal)
from seclogreg.network import MessageBus
from seclogreg.sharing import reconstruct, split


def random_spd(rng, d, cond=100.0):
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    eig = np.exp(rng.uniform(0, np.log(cond), size=d))
    eig[0], eig[-1] = 1.0, cond  # pin the condition number
    return (Q * eig) @ Q.T


def test_reciprocal_fixed_points(codec, rng):
    bus = MessageBus(2)
    assert abs(reconstruct(sec_reciprocal(split(1.0, 2, codec, rng), bus)) - 1.0) <= 1e-4
    assert abs(reconstruct(sec_reciprocal(split(4.0, 2, codec, rng), bus, x0=0.01)) - 0.25) <= 1e-4 / 4


def test_reciprocal_random(codec):
    for seed in range(100):
        r = np.random.default_rng(seed)
        a = r.uniform(0.5, 100)
        x = reconstruct(sec_reciprocal(split(a, 2, codec, r), MessageBus(2, seed)))
        assert abs(x * a - 1) <= 1e-4


def test_reciprocal_budget_is_public(codec, rng):
    n = reciprocal_iterations(24, 2.0 ** -23, 0.25)
    for a in (0.5, 50.0):
        bus = MessageBus(2)
        sec_reciprocal(split(a, 2, codec, rng), bus, check=False)
        assert bus.transcript.count(tag="OLE") == 2 * n * 2


def test_reciprocal_check_rejects_bad_start(codec, rng):
    # x0 above 2/a diverges; the final check must catch it
    with pytest.raises(ConvergenceError):
        sec_reciprocal(split(4.0, 2, codec, rng), MessageBus(2), x0=0.6, iterations=10)


@pytest.mark.parametrize("scale", [1.0, 2.0])
def test_inverse_of_scaled_identity(codec, rng, scale):
    d = 2 if scale == 2.0 else 4
    res = sec_matrix_inverse(split(scale * np.eye(d), 2, codec, rng), MessageBus(2))
    np.testing.assert_allclose(reconstruct(res.inverse_shares), np.eye(d) / scale, atol=1e-3)
    assert res.iterations >= 1


def test_random_spd_5x5(codec):
    for seed in range(50):
        r = np.random.default_rng(seed)
        A = random_spd(r, 5)
        res = sec_matrix_inverse(split(A, 2, codec, r), MessageBus(2, seed))
        X = reconstruct(res.inverse_shares)
        assert np.max(np.abs(X @ A - np.eye(5))) <= 1e-3
        assert res.iterations <= 30


def test_cost_per_iteration(codec, rng):
    d, P = 4, 3
    bus = MessageBus(P)
    res = sec_matrix_inverse(split(random_spd(rng, d, 10), P, codec, rng), bus)
    recip = reciprocal_iterations(codec.frac_bits, 2.0 ** (-codec.frac_bits + 1), 0.25)
    products = 2 * recip + d * d + res.iterations * 2 * d ** 3
    assert bus.transcript.count(tag="OLE") == products * P * (P - 1)
    assert bus.transcript.count(tag="GT") == res.iterations


def test_shadow_residual_monotone(rng):
    for _ in range(10):
        _, its, resid = clear_newton_schulz(random_spd(rng, 6), eps=1e-3)
        assert all(b < a for a, b in zip(resid, resid[1:]))


def test_iterations_grow_slowly_with_d(rng):
    its = []
    for d in (4, 8, 16):
        A = random_spd(rng, d, 10)
        its.append(clear_newton_schulz(A, eps=1e-3)[1])
    # trace scaling costs about log2(d) extra steps per doubling
    assert all(b - a <= 3 for a, b in zip(its, its[1:]))


def test_secure_tracks_clear_iterations(codec):
    for seed in range(10):
        r = np.random.default_rng(seed)
        A = random_spd(r, 6)
        res = sec_matrix_inverse(split(A, 2, codec, r), MessageBus(2, seed))
        assert abs(res.iterations - clear_newton_schulz(A, eps=1e-3)[1]) <= 2


def test_indefinite_matrix_fails_loudly(codec, rng):
    A = np.diag([1.0, -3.0, 1.0])
    with pytest.raises(ConvergenceError):
        sec_matrix_inverse(split(A, 2, codec, rng), MessageBus(2), max_iter=20)
