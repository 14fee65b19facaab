"""Step-latency benchmark: time apply_step over states replayed from generated proofs."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from .errors import EmptyCorpus
from .generator import GeneratorConfig, generate
from .kernel import ProofState, apply_step, init_state
from .proof import ProofStep

# Mean step time of the reference environment, in milliseconds.
REFERENCE_MS = 1.28


def build_corpus(n_steps: int = 10_000, cfg: GeneratorConfig = GeneratorConfig(k=3, l=5, seed=0)):
    """(state, step) pairs taken from ground-truth replays, ``n_steps`` of them."""
    corpus: list[tuple[ProofState, ProofStep]] = []
    index = 0
    while len(corpus) < n_steps:
        thm = generate(cfg, index)
        index += 1
        state = init_state(thm)
        for step in thm.proof:
            corpus.append((state, step))
            state = apply_step(state, step).next_state
            if len(corpus) == n_steps:
                break
    return corpus


def _state_chars(state: ProofState) -> int:
    return sum(len(str(s)) for s in state.goals + state.premises + state.facts)


@dataclass
class BenchReport:
    n_steps: int
    mean_ms: float
    median_ms: float
    p95_ms: float
    mean_state_chars: float
    reference_ms: float = REFERENCE_MS

    @property
    def within_reference(self) -> bool:
        return self.mean_ms <= self.reference_ms

    def to_json(self) -> dict:
        return {
            "n_steps": self.n_steps,
            "mean_ms": round(self.mean_ms, 6),
            "median_ms": round(self.median_ms, 6),
            "p95_ms": round(self.p95_ms, 6),
            "mean_state_chars": round(self.mean_state_chars, 2),
            "reference_ms": self.reference_ms,
            "within_reference": self.within_reference,
        }


def run_bench(corpus) -> BenchReport:
    if not corpus:
        raise EmptyCorpus("benchmark corpus is empty")
    times = []
    clock = time.perf_counter_ns
    for state, step in corpus:
        t0 = clock()
        apply_step(state, step)
        times.append(clock() - t0)
    ms = [t / 1e6 for t in times]
    ms_sorted = sorted(ms)
    return BenchReport(
        n_steps=len(ms),
        mean_ms=statistics.fmean(ms),
        median_ms=statistics.median(ms_sorted),
        p95_ms=ms_sorted[min(len(ms) - 1, int(0.95 * len(ms)))],
        mean_state_chars=statistics.fmean(_state_chars(s) for s, _ in corpus),
    )
