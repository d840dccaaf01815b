import numpy as np
import pytest

from seclogreg.analysis import (clear_oracle_protocol1, ecdf_sup_error, exact_newton_raphson,
                                fisher_min_eigenvalue, data_radius, param_error_bound)
from seclogreg.data import Dataset, partition
from seclogreg.network import MessageBus
from seclogreg.protocol1 import (LogisticSampleSet, NonConvergenceError, Protocol1Config,
                                 convergence_check, draw_logistic_samples, ecdf_sigmoid_shares,
                                 fit_protocol1, gradient_shares, hessian_shares, sample_sets)
from seclogreg.sharing import reconstruct, split

from conftest import synth_inputs


def test_samples_deterministic_and_logistic():
    a = draw_logistic_samples(100_000, np.random.default_rng(5))
    b = draw_logistic_samples(100_000, np.random.default_rng(5))
    np.testing.assert_array_equal(a.z, b.z)
    assert abs(np.median(a.z)) <= 0.02
    assert abs(np.mean(a.z <= 0) - 0.5) <= 0.005
    with pytest.raises(ValueError):
        draw_logistic_samples(0, np.random.default_rng(0))


def test_config_validation():
    with pytest.raises(ValueError):
        Protocol1Config(L=0)
    with pytest.raises(ValueError):
        Protocol1Config(eps_conv=0.0)
    with pytest.raises(ValueError):
        Protocol1Config(hessian_mode="bfgs")
    assert sample_sets(Protocol1Config(seed=3))[0].z.tolist() == sample_sets(Protocol1Config(seed=3))[0].z.tolist()


def test_ecdf_shares_extremes_and_exactness(codec, rng):
    z = draw_logistic_samples(100, np.random.default_rng(1))
    a = np.concatenate([[z.z.max() + 1, z.z.min() - 1], rng.normal(scale=2, size=30)])
    for P in (2, 3):
        bus = MessageBus(P, seed=P)
        sh = split(a, P, codec, rng)
        counts = reconstruct(ecdf_sigmoid_shares(sh, z, bus, scale=False))
        # oracle: indicator counts on the fixed-point values
        zq = np.sort(codec.encode(z.z).decode())
        want = np.searchsorted(zq, codec.encode(a).decode(), side="right")
        np.testing.assert_array_equal(counts, want)
        F = reconstruct(ecdf_sigmoid_shares(sh, z, bus))
        assert F[0] == pytest.approx(1.0, abs=2 * codec.ulp) and abs(F[1]) <= 2 * codec.ulp
        np.testing.assert_allclose(F, want / z.L, atol=2 * codec.ulp)
        assert bus.transcript.count(tag="GT") == 2 * len(a) * z.L


def test_gradient_shares(codec, rng):
    bus = MessageBus(2)
    X = rng.normal(size=(20, 3))
    y = (rng.random(20) < 0.5).astype(float)
    g = gradient_shares(split(X, 2, codec, rng), split(y, 2, codec, rng), split(y, 2, codec, rng), bus)
    assert np.max(np.abs(reconstruct(g))) <= 1e-5
    half = np.full(20, 0.5)
    g = gradient_shares(split(X, 2, codec, rng), split(y, 2, codec, rng), split(half, 2, codec, rng), bus)
    np.testing.assert_allclose(reconstruct(g), X.T @ (y - 0.5), atol=1e-5)
    g = gradient_shares(split(np.array([[1.0, 0.0]]), 2, codec, rng), split(np.ones(1), 2, codec, rng),
                        split(np.array([0.25]), 2, codec, rng), bus)
    np.testing.assert_allclose(reconstruct(g), [0.75, 0.0], atol=1e-6)


def test_hessian_shares(codec, rng):
    bus = MessageBus(2)
    X = rng.normal(size=(15, 3))
    Xs = split(X, 2, codec, rng)
    H = reconstruct(hessian_shares(Xs, split(rng.integers(0, 2, 15).astype(float), 2, codec, rng), bus))
    assert np.max(np.abs(H)) <= 1e-5
    H = reconstruct(hessian_shares(Xs, split(np.full(15, 0.5), 2, codec, rng), bus))
    np.testing.assert_allclose(H, 0.25 * X.T @ X, atol=1e-5)
    s = rng.uniform(0.05, 0.95, 15)
    H = reconstruct(hessian_shares(Xs, split(s, 2, codec, rng), bus))
    np.testing.assert_allclose(H, (X * (s * (1 - s))[:, None]).T @ X, atol=1e-3)


def test_convergence_check(codec, rng):
    bus = MessageBus(2)
    zero = split(np.zeros(3), 2, codec, rng)
    assert convergence_check(zero, split(np.ones(3), 2, codec, rng), 1e-6, bus) is True
    # lambda^2 = 0.5 exactly against eps = 0.5: inclusive
    g, dlt = split(np.array([0.5, 0.0]), 2, codec, rng), split(np.array([1.0, 0.0]), 2, codec, rng)
    assert convergence_check(g, dlt, 0.5, bus) is True
    for _ in range(20):
        gv, dv = rng.normal(size=3), rng.normal(size=3)
        eps = abs(rng.normal())
        got = convergence_check(split(gv, 2, codec, rng), split(dv, 2, codec, rng), eps, bus)
        assert got == (gv @ dv <= eps) or abs(gv @ dv - eps) < 1e-5


def test_matches_shadow_oracle():
    for seed in range(3):
        ds, inputs = synth_inputs(seed)
        cfg = Protocol1Config(L=200, seed=seed)
        out = fit_protocol1(inputs, cfg)
        shadow = clear_oracle_protocol1(ds.X, ds.y, sample_sets(cfg)[0].z, cfg)
        assert np.max(np.abs(out.beta - shadow.beta)) <= 1e-3
        assert out.outer_iterations == shadow.iterations
        assert out.inversion_iterations == shadow.inversion_iterations


def test_within_parameter_error_bound():
    ds, inputs = synth_inputs(11, d=3)
    cfg = Protocol1Config(L=500, seed=11)
    out = fit_protocol1(inputs, cfg)
    nr = exact_newton_raphson(ds.X, ds.y)
    sup = ecdf_sup_error(sample_sets(cfg)[0].z, grid=True)
    lam = fisher_min_eigenvalue(ds.X, nr.beta)
    bound = param_error_bound(data_radius(ds.X), cfg.L, sup, 0.5 * lam)
    assert np.linalg.norm(out.beta - nr.beta) <= bound


def test_full_newton_mode():
    ds, inputs = synth_inputs(2, n=80, d=3)
    cfg = Protocol1Config(L=100, hessian_mode="full_newton", seed=2)
    out = fit_protocol1(inputs, cfg)
    shadow = clear_oracle_protocol1(ds.X, ds.y, sample_sets(cfg)[0].z, cfg)
    assert np.max(np.abs(out.beta - shadow.beta)) <= 1e-3
    assert len(out.inversion_schedule) == out.outer_iterations
    assert "inversion_schedule=" in out.to_text()


def test_likelihood_nearly_monotone():
    ds, inputs = synth_inputs(6)
    cfg = Protocol1Config(L=200, seed=6)
    out = fit_protocol1(inputs, cfg)
    ll = out.trace.loglik
    # ECDF noise allows small dips; the bulk of the climb is monotone
    assert ll[-1] > ll[0]
    assert min(np.diff(ll)) >= -0.05 * (ll[-1] - ll[0])


def test_strict_mode_has_no_trace():
    _, inputs = synth_inputs(1, n=60)
    out = fit_protocol1(inputs, Protocol1Config(L=50, mode="strict"))
    assert out.trace is None
    assert set(k.split("=")[0] for k in out.to_text().split()) == {"beta", "outer_iterations",
                                                                  "inversion_iterations"}


def test_separable_data_fails_cleanly(codec):
    x = np.linspace(-2, 2, 20)
    ds = Dataset(np.column_stack([np.ones(20), x]), (x > 0).astype(float), ["i", "x"])
    inputs = partition(ds, "horizontal", 2, codec=codec)
    with pytest.raises(NonConvergenceError):
        fit_protocol1(inputs, Protocol1Config(L=500, max_outer=5))


def test_logistic_sample_set_is_frozen():
    s = LogisticSampleSet(np.zeros(3))
    with pytest.raises(Exception):
        s.z = np.ones(3)
