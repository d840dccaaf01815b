"""View simulation from a party's input and the output triple.

The simulator replays the protocol code on dummy data (party j's own input,
zeros for everyone else) through a bus whose control decisions are scripted
from the triple, which fixes every message count and shape.  It then
rewrites the payloads: share-typed messages become fresh uniform ring
elements, comparison outputs become fresh uniform bits, control-bit reveals
are made consistent with the scripted decisions, and the final opening of
beta is made to sum to the known output.  The result is restricted to j.
"""
from __future__ import annotations

import numpy as np

from .data import PartyInput
from .network import SHARE_TAGS, Batch, MessageBus, Transcript
from .outputs import FitOutput
from .ring import FixedPointCodec


class ScriptedBus(MessageBus):
    """A bus whose revealed control bits follow a fixed script per kind."""

    def __init__(self, P, seed, script: dict):
        super().__init__(P, seed)
        self._script = {k: list(v) for k, v in script.items()}
        self.decisions = []

    def decide(self, kind, value):
        queue = self._script.get(kind)
        if not queue:
            raise RuntimeError(f"script has no decision left for {kind!r}")
        d = queue.pop(0)
        self.decisions.append((kind, d))
        return d

    def exhausted(self) -> bool:
        return all(not q for q in self._script.values())


def decision_script(output: FitOutput) -> dict:
    """Control decisions implied by the output triple, per decision kind."""
    if output.outer_iterations < 1:
        raise ValueError("the triple must carry the outer iteration count")
    sched = output.inversion_schedule or (output.inversion_iterations,)
    if sum(sched) != output.inversion_iterations or any(s < 1 for s in sched):
        raise ValueError("the triple must carry consistent inversion iteration counts")
    inversion = []
    for s in sched:
        inversion += [False] * (s - 1) + [True]
    converged = [False] * (output.outer_iterations - 1) + [True]
    return {"inversion": inversion, "converged": converged}


def _dummy_inputs(j, input_j: PartyInput, P):
    codec = input_j.codec
    out = []
    for k in range(P):
        if k == j:
            out.append(PartyInput(k, input_j.X, input_j.y))
        else:
            out.append(PartyInput(k, codec.zeros(input_j.X.shape), codec.zeros(input_j.y.shape)))
    return out


def replay_skeleton(j, input_j: PartyInput, output: FitOutput, protocol: str, config, P: int,
                    seed=0):
    """Run the protocol on dummy data with scripted decisions; return (transcript, decisions)."""
    from dataclasses import replace
    from .protocol1 import fit_protocol1
    from .protocol2 import fit_protocol2

    if protocol == "protocol1" and len(config.stages()) > 1:
        raise NotImplementedError("views of progressive-L fits need per-stage round counts")
    bus = ScriptedBus(P, seed, decision_script(output))
    inputs = _dummy_inputs(j, input_j, P)
    if protocol == "protocol1":
        fit_protocol1(inputs, replace(config, mode="strict"), bus)
    elif protocol == "protocol2":
        cfg = config
        if cfg.b_threshold is None:
            cfg = replace(cfg, b_threshold=1.0)  # the level never changes the message pattern
        fit_protocol2(inputs, replace(cfg, mode="strict"), bus)
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    if not bus.exhausted():
        raise RuntimeError("replay did not consume every scripted decision")
    return bus.transcript, bus.decisions


def synthesize_payloads(transcript: Transcript, decisions, output: FitOutput,
                        codec: FixedPointCodec, P: int, rng: np.random.Generator) -> Transcript:
    """Fresh payloads for a full replayed transcript (see module docstring)."""
    out = Transcript()
    batches = transcript.batches
    dec_iter = iter(d for _, d in decisions)
    # final opening of beta: shares uniform subject to summing to encode(beta)
    beta_enc = codec.encode(output.beta)
    final = [codec.random(beta_enc.shape, rng) for _ in range(P - 1)]
    last = beta_enc
    for s in final:
        last = last - s
    final.append(last)

    last_gt = None
    i = 0
    while i < len(batches):
        b = batches[i]
        if b.tag == "REVEAL_BIT":
            # one group of consecutive REVEAL_BIT batches per revealed decision
            group = []
            while i < len(batches) and batches[i].tag == "REVEAL_BIT":
                group.append(batches[i])
                i += 1
            d = int(next(dec_iter))
            bit_a = int(last_gt[0, 0]) if last_gt is not None else int(rng.integers(0, 2))
            bits = {group[0].sender: bit_a, group[-1].sender: bit_a ^ d}
            for g in group:
                out.append(Batch(g.round, g.phase, g.tag, g.sender, g.receiver,
                                 np.full((g.count, 1), bits[g.sender], dtype=np.uint8)))
            continue
        if b.tag == "GT":
            payload = rng.integers(0, 2, size=b.payload.shape, dtype=np.uint8)
            last_gt = payload
        elif b.tag == "REVEAL" and b.phase == "output":
            payload = final[b.sender].to_bytes().copy()
        elif b.tag in SHARE_TAGS:
            payload = codec.random(b.count, rng).to_bytes().copy()
        else:
            raise ValueError(f"no synthesis rule for tag {b.tag!r}")
        out.append(Batch(b.round, b.phase, b.tag, b.sender, b.receiver, payload))
        i += 1
    return out


def simulate_view(j: int, input_j: PartyInput, output: FitOutput, protocol: str, config,
                  P: int, seed=12345) -> Transcript:
    """Synthetic view of party j from its input and the output triple alone."""
    if output is None or output.outer_iterations is None or output.inversion_iterations is None:
        raise ValueError("the output triple must include both iteration counts")
    transcript, decisions = replay_skeleton(j, input_j, output, protocol, config, P, seed=seed)
    rng = np.random.default_rng([int(seed), 0xA11CE, j])
    full = synthesize_payloads(transcript, decisions, output, input_j.codec, P, rng)
    return full.restrict(j)
