"""Message bus and transcript recording.

Every inter-party message, and every output an ideal functionality hands to
a party, is appended to a :class:`Transcript` before it is delivered.  The
transcript is columnar: each ``send`` of an array of N elements adds one
batch holding N entries that share (round, phase, tag, sender, receiver).
"""
from __future__ import annotations

import hashlib
import threading
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

# tags whose payloads are ring elements (uniform under a correct protocol)
SHARE_TAGS = frozenset({"OLE", "AGG", "RESHARE", "REVEAL"})
# tags whose payloads are single bits
BIT_TAGS = frozenset({"GT", "REVEAL_BIT"})


@dataclass
class Batch:
    round: int
    phase: str
    tag: str
    sender: int
    receiver: int
    payload: np.ndarray  # uint8 (N, width)

    @property
    def count(self) -> int:
        return self.payload.shape[0]


class Transcript:
    """Append-only record of (round, sender, receiver, payload, tag) entries."""

    def __init__(self):
        self.batches: list[Batch] = []

    def append(self, batch: Batch):
        self.batches.append(batch)

    def __len__(self):
        return sum(b.count for b in self.batches)

    def entries(self):
        """Yield one ``(round, sender, receiver, tag, payload_bytes)`` per entry."""
        for b in self.batches:
            for row in b.payload:
                yield b.round, b.sender, b.receiver, b.tag, row.tobytes()

    def count(self, tag=None, round=None, phase=None, sender=None, receiver=None) -> int:
        total = 0
        for b in self.batches:
            if tag is not None and b.tag != tag:
                continue
            if round is not None and b.round != round:
                continue
            if phase is not None and (b.phase not in phase if isinstance(phase, (set, frozenset, tuple, list))
                                      else b.phase != phase):
                continue
            if sender is not None and b.sender != sender:
                continue
            if receiver is not None and b.receiver != receiver:
                continue
            total += b.count
        return total

    def rounds(self) -> list:
        return sorted({b.round for b in self.batches})

    def skeleton(self) -> list:
        """Run-length form of (round, sender, receiver, tag, byte-length) per entry."""
        out = []
        for b in self.batches:
            key = (b.round, b.sender, b.receiver, b.tag, b.payload.shape[1])
            if out and out[-1][0] == key:
                out[-1][1] += b.count
            else:
                out.append([key, b.count])
        return [(k, n) for k, n in out]

    def restrict(self, party: int) -> "Transcript":
        """The part of the transcript party ``party`` sees.

        GT entries carry one output byte per side; the restricted copy keeps
        only the byte addressed to ``party``.
        """
        view = Transcript()
        for b in self.batches:
            if b.tag == "GT":
                if party not in (b.sender, b.receiver):
                    continue
                col = 0 if party == b.sender else 1
                view.append(Batch(b.round, b.phase, b.tag, b.sender, b.receiver,
                                  np.ascontiguousarray(b.payload[:, col:col + 1])))
            elif party in (b.sender, b.receiver):
                view.append(b)
        return view

    def payloads(self, tags) -> np.ndarray:
        """Concatenated payload rows of the given tags (same width required)."""
        rows = [b.payload for b in self.batches if b.tag in tags]
        if not rows:
            return np.zeros((0, 0), dtype=np.uint8)
        return np.concatenate(rows, axis=0)

    def digest(self) -> str:
        h = hashlib.sha256()
        for b in self.batches:
            h.update(f"{b.round},{b.phase},{b.tag},{b.sender},{b.receiver},{b.payload.shape}".encode())
            h.update(np.ascontiguousarray(b.payload).tobytes())
        return h.hexdigest()

    def export(self, fh):
        """Write ``round,sender,receiver,tag,hex_payload`` lines."""
        for rnd, s, r, tag, payload in self.entries():
            fh.write(f"{rnd},{s},{r},{tag},{payload.hex()}\n")


class MessageBus:
    """Routes messages between P logical parties and records them.

    Also owns every random source of a run: one generator per party, one per
    unordered party pair (for zero sharings), and one for the ideal
    functionalities.  All are derived from ``seed`` so runs replay exactly.
    """

    def __init__(self, P: int, seed=0):
        if P < 2:
            raise ValueError("need at least two parties")
        self.P = P
        self.seed = seed
        root = np.random.SeedSequence(seed if isinstance(seed, (list, tuple)) else [int(seed)])
        kids = root.spawn(P + 2)
        self.party_rng = [np.random.default_rng(k) for k in kids[:P]]
        self.func_rng = np.random.default_rng(kids[P])
        pair_root = kids[P + 1]
        pair_seqs = pair_root.spawn(P * (P - 1) // 2)
        self.pair_rng = {}
        it = iter(pair_seqs)
        for i in range(P):
            for j in range(i + 1, P):
                self.pair_rng[(i, j)] = np.random.default_rng(next(it))
        self.transcript = Transcript()
        self.round = 0
        self.phase = "setup"
        self._queues = {}
        self._lock = threading.Lock()

    @contextmanager
    def in_phase(self, name: str):
        prev, self.phase = self.phase, name
        try:
            yield self
        finally:
            self.phase = prev

    def send(self, sender: int, receiver: int, tag: str, payload: np.ndarray, obj=None):
        """Record then enqueue; ``obj`` is the typed value delivered (defaults to payload)."""
        if sender == receiver:
            raise ValueError("a party does not message itself")
        # copy: the recorded bytes must not alias state the sender mutates later
        payload = np.array(payload, dtype=np.uint8, copy=True, order="C")
        if payload.ndim == 1:
            payload = payload.reshape(-1, 1)
        with self._lock:
            self.transcript.append(Batch(self.round, self.phase, tag, sender, receiver, payload))
            self._queues.setdefault((sender, receiver), deque()).append((tag, payload if obj is None else obj))

    def send_ring(self, sender: int, receiver: int, tag: str, value):
        self.send(sender, receiver, tag, value.to_bytes(), obj=value.copy())

    def recv(self, sender: int, receiver: int, tag: str = None):
        with self._lock:
            q = self._queues.get((sender, receiver))
            if not q:
                raise RuntimeError(f"no pending message {sender}->{receiver}")
            got_tag, obj = q.popleft()
        if tag is not None and got_tag != tag:
            raise RuntimeError(f"expected {tag} from {sender}->{receiver}, got {got_tag}")
        return obj

    def pending(self) -> int:
        with self._lock:
            return sum(len(q) for q in self._queues.values())

    def decide(self, kind: str, value: bool) -> bool:
        """Hook through which every revealed control bit passes.

        The real bus returns the bit unchanged; the simulator's scripted bus
        substitutes decisions derived from the output triple.
        """
        return value
