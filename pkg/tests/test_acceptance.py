"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are printed in the
terminal summary (and immediately with ``-s``).
"""
import time

import numpy as np

from seclogreg import analysis as an
from seclogreg.cli import main
from seclogreg.data import partition
from seclogreg.matinv import sec_matrix_inverse
from seclogreg.network import MessageBus
from seclogreg.protocol1 import Protocol1Config, fit_protocol1, sample_sets
from seclogreg.protocol2 import Protocol2Config, fit_protocol2
from seclogreg.ring import FixedPointCodec
from seclogreg.security import mults, protocol2_round_counts
from seclogreg.sharing import reconstruct, split

from conftest import ACCEPTANCE_LINES, synth_dataset, synth_inputs
from test_matinv import random_spd

SLACK = 2.0 ** -20


def record(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_secure_vs_clear():
    worst1 = worst2 = slowest = 0.0
    counts_ok = True
    for seed in range(10):
        ds, inputs = synth_inputs(seed, n=200, d=4, P=2, scheme="horizontal")
        c1 = Protocol1Config(L=200, seed=seed)
        t0 = time.perf_counter()
        o1 = fit_protocol1(inputs, c1)
        slowest = max(slowest, time.perf_counter() - t0)
        s1 = an.clear_oracle_protocol1(ds.X, ds.y, sample_sets(c1)[0].z, c1)
        worst1 = max(worst1, np.max(np.abs(o1.beta - s1.beta)))
        c2 = Protocol2Config(k=10, seed=seed)
        t0 = time.perf_counter()
        o2 = fit_protocol2(inputs, c2)
        slowest = max(slowest, time.perf_counter() - t0)
        s2 = an.clear_oracle_protocol2(ds.X, ds.y, c2)
        worst2 = max(worst2, np.max(np.abs(o2.beta - s2.beta)))
        counts_ok &= o1.outer_iterations == s1.iterations and o2.outer_iterations == s2.iterations
    ok = worst1 <= 1e-3 and worst2 <= 1e-3 and slowest < 60
    record(1, ok, f"max|P1-shadow|={worst1:.2e} max|P2-shadow|={worst2:.2e} "
                  f"slowest_fit={slowest:.2f}s iteration_counts_equal={counts_ok}")


def test_criterion_02_error_bounds_vs_exact_nr():
    ratio1 = ratio2 = 0.0
    for i in range(20):
        ds, inputs = synth_inputs(100 + i)
        nr = an.exact_newton_raphson(ds.X, ds.y)
        R = an.data_radius(ds.X)
        lam = an.fisher_min_eigenvalue(ds.X, nr.beta)
        c1 = Protocol1Config(L=200, seed=i)
        o1 = fit_protocol1(inputs, c1)
        sup = an.ecdf_sup_error(sample_sets(c1)[0].z, grid=True)
        b1 = an.param_error_bound(R, c1.L, sup, 0.5 * lam)
        ratio1 = max(ratio1, np.linalg.norm(o1.beta - nr.beta) / b1)
        o2 = fit_protocol2(inputs, Protocol2Config(k=10, seed=i))
        tau = max(o2.trace.max_step)
        b2 = an.sigma_param_bound(R, tau, lam, c=0.125)
        ratio2 = max(ratio2, np.linalg.norm(o2.beta - nr.beta) / b2)
    record(2, ratio1 <= 1 and ratio2 <= 1,
           f"worst error/bound: protocol1={ratio1:.3f} protocol2={ratio2:.3f} (20 instances each)")


def test_criterion_03_L_scaling():
    ds, inputs = synth_inputs(7)
    betas = {}
    for L, base in ((100, 0), (500, 1000)):
        betas[L] = np.array([fit_protocol1(inputs, Protocol1Config(L=L, seed=base + r, mode="strict")).beta
                             for r in range(30)])
    ratio = betas[100].std(axis=0, ddof=1) / betas[500].std(axis=0, ddof=1)
    ok = bool(np.all((ratio >= 1.5) & (ratio <= 3.0)))
    record(3, ok, "sd(L=100)/sd(L=500) per coordinate = " + ",".join(f"{r:.2f}" for r in ratio))


def test_criterion_04_k_scaling():
    worst_rel = 0.0
    monotone = True
    for seed in range(5):
        ds, inputs = synth_inputs(200 + seed)
        base = an.hessian_lb_clear(ds.X, ds.y).loglik[-1]
        gaps = []
        for k in (5, 10, 50):
            out = fit_protocol2(inputs, Protocol2Config(k=k, seed=seed, mode="strict",
                                                        radius=an.data_radius(ds.X)))
            gaps.append(abs(base - an.log_likelihood(ds.X, ds.y, out.beta)))
        monotone &= gaps[0] >= gaps[1] >= gaps[2]
        worst_rel = max(worst_rel, gaps[2] / abs(base))
    record(4, monotone and worst_rel <= 1e-3,
           f"gap non-increasing in k on all datasets={monotone} worst relative gap at k=50={worst_rel:.2e}")


def test_criterion_05_euler_invariants():
    rounds = sign_bad = range_bad = contr_bad = 0
    worst_sign = 0.0
    for i in range(20):
        _, inputs = synth_inputs(300 + i)
        out = fit_protocol2(inputs, Protocol2Config(k=10, seed=i))
        xd = out.trace.xdelta
        for a, b in zip(xd, xd[1:]):
            rounds += 1
            prod = a * b
            if np.any(prod < -SLACK):
                sign_bad += 1
                worst_sign = max(worst_sign, float(-prod.min()))
            if not np.linalg.norm(b) < np.linalg.norm(a) + SLACK:
                contr_bad += 1
        for s in out.trace.sigma_hat:
            range_bad += int(not np.all((s > -SLACK) & (s < 1 + SLACK)))
    ok = sign_bad == 0 and range_bad == 0 and contr_bad == 0
    record(5, ok, f"round pairs={rounds} same-sign violations={sign_bad} (worst {worst_sign:.1e}) "
                  f"range violations={range_bad} contraction violations={contr_bad}")


def test_criterion_06_dkw_coverage():
    L = an.dkw_sample_size(0.05, 0.05)
    rng = np.random.default_rng(606)
    grid = np.linspace(-10.0, 10.0, 100_000)
    exceed = 0
    for _ in range(200):
        u = rng.random(L)
        z = np.log(u) - np.log1p(-u)
        exceed += an.ecdf_sup_error(z, grid=grid) > 0.05
    frac = exceed / 200
    limit = 0.05 + 3 * np.sqrt(0.05 * 0.95 / 200)
    record(6, L == 738 and frac <= limit, f"L={L} exceed fraction={frac:.3f} limit={limit:.3f}")


def test_criterion_07_complexity():
    configs = [(30, 2, 20, 3), (50, 3, 40, 5), (40, 4, 25, 8)]
    details, ok = [], True
    for n, d, L, k in configs:
        _, inputs = synth_inputs(n + d, n=n, d=d)
        bus = MessageBus(2, seed=1)
        fit_protocol1(inputs, Protocol1Config(L=L, hessian_mode="full_newton", mode="strict",
                                              eps_conv=1e-2), bus)
        t = bus.transcript
        rounds = [r for r in t.rounds() if r >= 1]
        p1 = all(t.count(tag="GT", round=r, phase="sigmoid") == n * L
                 and mults(t, 2, r, {"gradhess"}) == n * (1 + d + d * d) for r in rounds)
        bus = MessageBus(2, seed=1)
        fit_protocol2(inputs, Protocol2Config(k=k, mode="strict", b_threshold=1.0), bus)
        rows = protocol2_round_counts(bus.transcript, 2, n, d, k)
        p2 = bool(rows) and all(mul == exp for _, exp, mul, _ in rows)
        ok &= p1 and p2
        details.append(f"(n={n},d={d},L={L},k={k}) P1 rounds={len(rounds)}:{p1} P2 rounds={len(rows)}:{p2}")
    record(7, ok, "; ".join(details))


def test_criterion_08_security_harness(tmp_path, capsys):
    ds = synth_dataset(808, n=60, d=3)
    path = tmp_path / "d.csv"
    with open(path, "w") as fh:
        fh.write("a,b,y\n")
        for r, t in zip(ds.X[:, 1:], ds.y):
            fh.write(f"{r[0]:.5f},{r[1]:.5f},{int(t)}\n")
    results = []
    for P in (2, 3):
        parts = tmp_path / f"p{P}"
        assert main(["partition", str(path), "--scheme", "additive_random", "--parties", str(P),
                     "--seed", str(P), "--outdir", str(parts)]) == 0
        for method, extra in (("protocol1", ["--L", "30"]), ("protocol2", ["--k", "5"])):
            code = main(["security-check", "--parties-dir", str(parts), "--method", method, *extra])
            report = capsys.readouterr().out
            gt_free = method == "protocol1" or "PASS counts.round_body_gt_free" in report
            results.append((P, method, code == 0 and gt_free, report.count("FAIL")))
    ok = all(r[2] for r in results)
    record(8, ok, " ".join(f"P={P}/{m}:{'ok' if good else 'fail'}" for P, m, good, _ in results))


def test_criterion_09_matrix_inversion():
    codec = FixedPointCodec()
    worst_row = worst_entry = 0.0
    max_its = 0
    max_diff = 0
    for seed in range(50):
        rng = np.random.default_rng(9000 + seed)
        d = int(rng.integers(2, 9))
        A = random_spd(rng, d, float(rng.uniform(1.0, 100.0)))
        # trace test at eps/sqrt(d) bounds the row-sum norm of XA - I by eps
        eps = 1e-3 / np.sqrt(d)
        res = sec_matrix_inverse(split(A, 2, codec, rng), MessageBus(2, seed), eps=eps)
        E = reconstruct(res.inverse_shares) @ A - np.eye(d)
        worst_row = max(worst_row, float(np.max(np.abs(E).sum(axis=1))))
        worst_entry = max(worst_entry, float(np.max(np.abs(E))))
        max_its = max(max_its, res.iterations)
        max_diff = max(max_diff, abs(res.iterations - an.clear_newton_schulz(A, eps=eps)[1]))
    ok = worst_row <= 1e-3 and max_its <= 30 and max_diff <= 2
    record(9, ok, f"max row-sum |XA-I|={worst_row:.2e} max entry={worst_entry:.2e} "
                  f"max iterations={max_its} max |secure-clear iterations|={max_diff}")


def test_criterion_10_partition_invariance():
    codec = FixedPointCodec()
    ds = synth_dataset(1010)
    same = []
    for P in (2, 3):
        for name, fit, cfg in (("protocol1", fit_protocol1, Protocol1Config(L=100, seed=5)),
                               ("protocol2", fit_protocol2, Protocol2Config(k=10, seed=5))):
            texts = {fit(partition(ds, s, P, np.random.default_rng(77), codec), cfg).to_text()
                     for s in ("horizontal", "vertical", "additive_random")}
            same.append((P, name, len(texts) == 1))
    record(10, all(s for *_, s in same), " ".join(f"P={P}/{n}:{'identical' if s else 'DIFFER'}"
                                                  for P, n, s in same))
