"""JSON-lines datasets of theorems with proofs, and dataset statistics."""

from __future__ import annotations

import hashlib
import json
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Union

from .axioms import AxiomId
from .errors import EmptyDataset, IntError, IoError
from .expr import count_nodes, parse_statement
from .proof import ProofStep, Theorem, TheoremMeta

SCHEMA_VERSION = 1
PathLike = Union[str, os.PathLike]


def record_id(goal: str, premises: list[str], proof: list[dict]) -> str:
    blob = json.dumps([goal, premises, proof], separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def to_record(thm: Theorem) -> dict:
    goal = str(thm.goal)
    premises = [str(p) for p in thm.premises]
    proof = [s.to_json() for s in thm.proof or ()]
    rec = {"v": SCHEMA_VERSION, "id": record_id(goal, premises, proof), "goal": goal, "premises": premises}
    rec["initial_condition"] = str(thm.initial_condition) if thm.initial_condition else None
    rec["proof"] = proof
    m = thm.meta
    if m is not None:
        rec.update(k=m.k, l=m.l, degree=m.degree, axiom_order=[a.value for a in m.axiom_order],
                   seed=m.seed, axiom_set=m.axiom_set)
    return rec


def from_record(rec: dict) -> Theorem:
    if rec.get("v", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ValueError(f"unsupported record version {rec.get('v')!r}")
    meta = None
    if "axiom_order" in rec:
        meta = TheoremMeta(rec["k"], rec["l"], rec["degree"], tuple(AxiomId.parse(a) for a in rec["axiom_order"]),
                           rec["seed"], rec.get("axiom_set", "ordered-field"))
    initial = rec.get("initial_condition")
    return Theorem(
        parse_statement(rec["goal"]),
        tuple(parse_statement(p) for p in rec.get("premises", ())),
        tuple(ProofStep.from_json(s) for s in rec.get("proof", ())),
        meta,
        parse_statement(initial) if initial else None,
    )


def dumps(thm: Theorem) -> str:
    return json.dumps(to_record(thm), ensure_ascii=False)


def write_jsonl(theorems: Iterable[Theorem], out: Union[PathLike, IO[str]]) -> int:
    """Write one record per line; returns the count written."""
    if hasattr(out, "write"):
        return _write(theorems, out)
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            return _write(theorems, fh)
    except OSError as err:
        raise IoError(f"cannot write {out}: {err}") from err


def _write(theorems: Iterable[Theorem], fh: IO[str]) -> int:
    n = 0
    for thm in theorems:
        fh.write(dumps(thm) + "\n")
        n += 1
    return n


def read_jsonl(src: Union[PathLike, IO[str]]) -> Iterator[Theorem]:
    for _, thm in read_records(src):
        yield thm


def read_records(src: Union[PathLike, IO[str]]) -> Iterator[tuple[dict, Theorem]]:
    """(raw record, theorem) pairs, so callers can report stored ids."""
    if hasattr(src, "read"):
        yield from _read(src)
        return
    try:
        fh = open(src, encoding="utf-8")
    except OSError as err:
        raise IoError(f"cannot read {src}: {err}") from err
    with fh:
        yield from _read(fh)


def _read(fh: IO[str]) -> Iterator[tuple[dict, Theorem]]:
    for lineno, line in enumerate(fh, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            yield rec, from_record(rec)
        except (ValueError, KeyError, TypeError, IntError) as err:
            raise IoError(f"line {lineno}: {err}") from err


# ---------------------------------------------------------------- statistics


def theorem_length(thm: Theorem) -> int:
    """Characters in the goal and the non-trivial premises."""
    return len(str(thm.goal)) + sum(len(str(p)) for p in thm.premises if p.lhs != p.rhs)


def theorem_nodes(thm: Theorem) -> int:
    return count_nodes(thm.goal) + sum(count_nodes(p) for p in thm.premises if p.lhs != p.rhs)


@dataclass
class StatsReport:
    n: int
    length_histogram: dict[int, int]  # bucket start (10-char buckets) -> count
    axiom_counts: dict[str, int]
    axiom_frequency: dict[str, float]  # percent of proof steps
    mean_nodes_by_l: dict[int, float]
    mean_length_by_l: dict[int, float]
    kl_counts: dict[str, int] = field(default_factory=dict)

    def ranked_axioms(self) -> list[str]:
        return sorted(self.axiom_counts, key=lambda a: (-self.axiom_counts[a], a))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "length_histogram": {str(k): v for k, v in sorted(self.length_histogram.items())},
            "axiom_counts": dict(sorted(self.axiom_counts.items())),
            "axiom_frequency": {a: round(f, 4) for a, f in sorted(self.axiom_frequency.items())},
            "mean_nodes_by_l": {str(k): round(v, 4) for k, v in sorted(self.mean_nodes_by_l.items())},
            "mean_length_by_l": {str(k): round(v, 4) for k, v in sorted(self.mean_length_by_l.items())},
            "kl_counts": dict(sorted(self.kl_counts.items())),
        }


def _proof_len(thm: Theorem) -> int:
    return thm.meta.l if thm.meta else len(thm.proof or ())


def _kl(thm: Theorem) -> str:
    k = thm.meta.k if thm.meta else len({s.axiom for s in thm.proof or ()})
    return f"K{k}L{_proof_len(thm)}"


def _report(n, hist, counts, nodes, lengths, per_l, kl) -> StatsReport:
    total = sum(counts.values())
    return StatsReport(
        n=n,
        length_histogram=dict(hist),
        axiom_counts=dict(counts),
        axiom_frequency={a: 100.0 * c / total for a, c in counts.items()} if total else {},
        mean_nodes_by_l={l: nodes[l] / per_l[l] for l in per_l},
        mean_length_by_l={l: lengths[l] / per_l[l] for l in per_l},
        kl_counts=dict(kl),
    )


def compute_stats(theorems: Iterable[Theorem]) -> StatsReport:
    """Statistics over a materialized dataset."""
    data = list(theorems)
    if not data:
        raise EmptyDataset("no theorems to summarize")
    lengths = [theorem_length(t) for t in data]
    by_l: dict[int, list[Theorem]] = defaultdict(list)
    for t in data:
        by_l[_proof_len(t)].append(t)
    counts = Counter(s.axiom.value for t in data for s in t.proof or ())
    return _report(
        len(data),
        Counter(x // 10 * 10 for x in lengths),
        counts,
        {l: sum(theorem_nodes(t) for t in ts) for l, ts in by_l.items()},
        {l: sum(theorem_length(t) for t in ts) for l, ts in by_l.items()},
        {l: len(ts) for l, ts in by_l.items()},
        Counter(_kl(t) for t in data),
    )


class StatsAccumulator:
    """Single-pass statistics for datasets too large to hold in memory."""

    def __init__(self):
        self.n = 0
        self.hist: Counter = Counter()
        self.counts: Counter = Counter()
        self.nodes: Counter = Counter()
        self.lengths: Counter = Counter()
        self.per_l: Counter = Counter()
        self.kl: Counter = Counter()

    def add(self, thm: Theorem) -> None:
        self.n += 1
        length = theorem_length(thm)
        self.hist[length // 10 * 10] += 1
        for s in thm.proof or ():
            self.counts[s.axiom.value] += 1
        l = _proof_len(thm)
        self.nodes[l] += theorem_nodes(thm)
        self.lengths[l] += length
        self.per_l[l] += 1
        self.kl[_kl(thm)] += 1

    def report(self) -> StatsReport:
        if not self.n:
            raise EmptyDataset("no theorems to summarize")
        return _report(self.n, self.hist, self.counts, self.nodes, self.lengths, self.per_l, self.kl)


def stream_stats(theorems: Iterable[Theorem]) -> StatsReport:
    acc = StatsAccumulator()
    for t in theorems:
        acc.add(t)
    return acc.report()
