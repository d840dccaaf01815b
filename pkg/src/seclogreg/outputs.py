"""Fit results: the output triple and the optional per-round trace."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FitTrace:
    """Per-round diagnostics, filled only in trace mode.

    Values are read off the shares by the orchestrator for testing; they are
    never sent over the bus, so the transcript is the same with or without.
    """

    betas: list = field(default_factory=list)
    loglik: list = field(default_factory=list)
    lambda_sq: list = field(default_factory=list)
    grad_norm_sq: list = field(default_factory=list)
    xdelta: list = field(default_factory=list)
    sigma_hat: list = field(default_factory=list)
    max_step: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["iteration,loglik"]
        lines += [f"{i},{v!r}" for i, v in enumerate(self.loglik)]
        return "\n".join(lines) + "\n"


@dataclass
class FitOutput:
    """The protocol output: parameters plus the two iteration counts.

    ``inversion_schedule`` lists the iteration count of each matrix inversion
    in order (one entry unless the Hessian is re-inverted every round);
    ``inversion_iterations`` is their sum.
    """

    beta: np.ndarray
    outer_iterations: int
    inversion_iterations: int
    inversion_schedule: tuple = ()
    trace: FitTrace | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float)
        if not self.inversion_schedule:
            self.inversion_schedule = (int(self.inversion_iterations),)
        self.inversion_schedule = tuple(int(v) for v in self.inversion_schedule)
        if self.outer_iterations < 0 or self.inversion_iterations < 0:
            raise ValueError("iteration counts must be non-negative")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("beta must be finite")

    def to_text(self) -> str:
        beta = ",".join(repr(float(b)) for b in self.beta)
        lines = [f"beta={beta}",
                 f"outer_iterations={self.outer_iterations}",
                 f"inversion_iterations={self.inversion_iterations}"]
        if len(self.inversion_schedule) > 1:
            lines.append("inversion_schedule=" + ",".join(map(str, self.inversion_schedule)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FitOutput":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        missing = {"beta", "outer_iterations", "inversion_iterations"} - kv.keys()
        if missing:
            raise ValueError(f"output is missing fields: {sorted(missing)}")
        sched = tuple(int(v) for v in kv["inversion_schedule"].split(",")) if kv.get("inversion_schedule") else ()
        return cls(beta=np.array([float(v) for v in kv["beta"].split(",")]),
                   outer_iterations=int(kv["outer_iterations"]),
                   inversion_iterations=int(kv["inversion_iterations"]),
                   inversion_schedule=sched)

    def same_triple(self, other: "FitOutput") -> bool:
        return (np.array_equal(self.beta, other.beta)
                and self.outer_iterations == other.outer_iterations
                and self.inversion_iterations == other.inversion_iterations
                and self.inversion_schedule == other.inversion_schedule)
