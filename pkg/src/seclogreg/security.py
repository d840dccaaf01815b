"""Security-property harness: compare real views with simulated ones.

For every party the harness checks that the simulated view has the real
view's skeleton, that the ring-element payloads the party received look
uniform (chi-square on the top 4 bits), that comparison-output bits look
fair (binomial test), and that real and simulated payloads are
indistinguishable by a two-sample KS test.  The family of tests is held at
``alpha`` overall with a Bonferroni split.  It also checks per-round
message counts against the closed-form costs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .data import stack_inputs
from .network import SHARE_TAGS, MessageBus, Transcript
from .simulation import simulate_view


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class SecurityReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))

    def to_text(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip() for c in self.checks]
        lines.append(f"overall={'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def top_bits(payload: np.ndarray, bits: int, nbits=4) -> np.ndarray:
    """Top ``nbits`` bits of little-endian ring elements of ``bits`` bits."""
    nbits = min(nbits, bits)
    padded = np.zeros((payload.shape[0], 16), dtype=np.uint8)
    padded[:, : payload.shape[1]] = payload
    limbs = padded.view("<u8").astype(np.uint64)
    lo, hi = limbs[:, 0], limbs[:, 1]
    shift = bits - nbits
    if shift >= 64:
        top = hi >> np.uint64(shift - 64)
    elif shift == 0:
        top = lo
    else:
        top = (lo >> np.uint64(shift)) | (hi << np.uint64(64 - shift))
    return (top & np.uint64((1 << nbits) - 1)).astype(np.int64)


def unit_values(payload: np.ndarray, bits: int) -> np.ndarray:
    """Map ring elements to [0, 1) through their top 32 bits."""
    return top_bits(payload, bits, nbits=32).astype(float) / 2.0 ** 32


def chi_square_uniform(payload: np.ndarray, bits: int, buckets=16):
    nb = int(np.log2(buckets))
    counts = np.bincount(top_bits(payload, bits, nb), minlength=buckets)
    return stats.chisquare(counts)


def received_share_payloads(view: Transcript, party: int) -> np.ndarray:
    rows = [b.payload for b in view.batches if b.tag in SHARE_TAGS and b.receiver == party]
    if not rows:
        return np.zeros((0, 0), dtype=np.uint8)
    return np.concatenate(rows)


def gt_bits(view: Transcript) -> np.ndarray:
    rows = [b.payload[:, 0] for b in view.batches if b.tag == "GT"]
    return np.concatenate(rows) if rows else np.zeros(0, dtype=np.uint8)


# -- closed-form cost checks ---------------------------------------------------

def mults(transcript: Transcript, P: int, round, phases) -> int:
    ole = transcript.count(tag="OLE", round=round, phase=set(phases))
    return ole // (P * (P - 1))


def protocol1_round_counts(transcript, P, n, d, L, full_newton):
    """(expected, observed) GT and product counts per round."""
    rows = []
    for r in [r for r in transcript.rounds() if r >= 1]:
        gt = transcript.count(tag="GT", round=r, phase="sigmoid")
        mul = mults(transcript, P, r, {"gradhess"})
        exp_mul = n * (1 + d + d * d) if full_newton else n * d
        rows.append((r, n * L, gt, exp_mul, mul))
    return rows


def protocol2_round_counts(transcript, P, n, d, k):
    """Complete rounds only: the halting round stops after the gradient."""
    rows = []
    for r in [r for r in transcript.rounds() if r >= 1]:
        if transcript.count(tag="OLE", round=r, phase="step") == 0:
            continue
        mul = mults(transcript, P, r, {"gradient", "step", "euler_g"})
        body_gt = transcript.count(tag="GT", round=r,
                                   phase={"gradient", "step", "predictor", "euler_g", "euler_scale"})
        rows.append((r, n * (k + d) + d * d, mul, body_gt))
    return rows


def run_security_check(party_inputs, protocol: str, config, alpha=0.01, sim_seed=12345) -> SecurityReport:
    from .protocol1 import fit_protocol1
    from .protocol2 import fit_protocol2

    P = len(party_inputs)
    X, _ = stack_inputs(party_inputs)
    n, d = X.shape
    codec = X.codec
    bus = MessageBus(P, seed=config.seed)
    fit = fit_protocol1 if protocol == "protocol1" else fit_protocol2
    output = fit(party_inputs, config, bus)
    real = bus.transcript
    report = SecurityReport()

    # three statistical tests per party, Bonferroni over all of them
    level = alpha / (3 * P)
    for j in range(P):
        real_view = real.restrict(j)
        sim_view = simulate_view(j, party_inputs[j], output, protocol, config, P, seed=sim_seed)
        report.add(f"party{j}.skeleton", real_view.skeleton() == sim_view.skeleton(),
                   f"entries={len(real_view)}")
        shares = received_share_payloads(real_view, j)
        if shares.size:
            chi = chi_square_uniform(shares, codec.modulus_bits)
            report.add(f"party{j}.share_uniformity", chi.pvalue > level,
                       f"chi2={chi.statistic:.2f} p={chi.pvalue:.4f} m={shares.shape[0]}")
            synth = received_share_payloads(sim_view, j)
            if synth.size == 0:
                report.add(f"party{j}.real_vs_simulated", False, "simulated view has no share payloads")
                continue
            ks = stats.ks_2samp(unit_values(shares, codec.modulus_bits),
                                unit_values(synth, codec.modulus_bits))
            report.add(f"party{j}.real_vs_simulated", ks.pvalue > level,
                       f"ks={ks.statistic:.5f} p={ks.pvalue:.4f}")
        bits = gt_bits(real_view)
        if bits.size:
            bt = stats.binomtest(int(bits.sum()), bits.size, 0.5)
            report.add(f"party{j}.gt_bits", bt.pvalue > level,
                       f"ones={int(bits.sum())}/{bits.size} p={bt.pvalue:.4f}")

    if protocol == "protocol1":
        full = config.hessian_mode == "full_newton"
        rows = protocol1_round_counts(real, P, n, d, config.L, full)
        ok = all(gt == eg and mul == em for _, eg, gt, em, mul in rows)
        report.add("counts.gt_and_products", ok,
                   f"rounds={len(rows)} expected_gt={n * config.L} expected_mul={rows[0][3] if rows else 0}")
    else:
        rows = protocol2_round_counts(real, P, n, d, config.k)
        ok = all(mul == em for _, em, mul, _ in rows)
        report.add("counts.products", ok, f"rounds={len(rows)} expected={n * (config.k + d) + d * d}")
        report.add("counts.round_body_gt_free", all(g == 0 for *_, g in rows))
    report.output = output
    return report
