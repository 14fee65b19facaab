"""Theorem-proving MDP: reset/step over the kernel, with sequence and graph observations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .axioms import AXIOM_SETS, AxiomId, Direction, Mode, arg_count
from .errors import EpisodeFinished
from .expr import NodePath, iter_nodes
from .kernel import ProofState, apply_step, init_state
from .proof import ProofStep, Theorem

GOAL_END = "<GOAL_END>"
PREM_END = "<PREM_END>"


@dataclass(frozen=True)
class EnvConfig:
    step_limit: int = 15
    reward_on_success: float = 1.0
    reward_otherwise: float = 0.0
    axiom_set: str = "ordered-field"

    def __post_init__(self):
        if self.step_limit < 1:
            raise ValueError("step_limit must be at least 1")


@dataclass(frozen=True)
class Action:
    """An axiom plus up to three node arguments; extra arguments are ignored."""

    axiom: AxiomId
    args: tuple[NodePath, ...] = ()
    direction: Optional[Direction] = None
    mode: Mode = Mode.FORWARD

    def to_step(self) -> ProofStep:
        need = arg_count(self.axiom, self.direction, self.mode)
        return ProofStep(self.axiom, tuple(self.args[:need]), self.direction, self.mode)

    @classmethod
    def from_step(cls, step: ProofStep) -> "Action":
        return cls(step.axiom, step.args, step.direction, step.mode)


@dataclass(frozen=True)
class Observation:
    seq: str
    graph: dict

    def to_json(self) -> dict:
        return {"seq": self.seq, "graph": self.graph}


def _statements(state: ProofState):
    return (("goal", state.goals), ("premise", state.premises), ("fact", state.facts))


def encode_seq(state: ProofState) -> str:
    parts = ["; ".join(map(str, state.goals)), GOAL_END, "; ".join(map(str, state.premises)), PREM_END]
    parts.append("; ".join(map(str, state.facts)))
    return " ".join(p for p in parts if p)


def _label(node) -> str:
    name = type(node).__name__
    if name == "Var":
        return node.name
    if name == "Const":
        return str(node.value)
    return {"Add": "+", "Mul": "*", "Neg": "-", "Inv": "1/", "Sqr": "^2"}[name]


def encode_graph(state: ProofState) -> dict:
    """One relation node per statement with its two side trees below it.

    Entity nodes appear in the same order as ``enumerate_nodes``.
    """
    nodes: list[dict] = []
    edges: list[list[int]] = []
    for role, stmts in _statements(state):
        for i, s in enumerate(stmts):
            rel_id = len(nodes)
            nodes.append({"id": rel_id, "label": s.rel.value, "role": role, "index": i, "path": None})
            for side, root in (("lhs", s.lhs), ("rhs", s.rhs)):
                ids: dict[tuple, int] = {}
                for path, node in iter_nodes(root):
                    nid = len(nodes)
                    ids[path] = nid
                    nodes.append({"id": nid, "label": _label(node), "role": role, "index": i,
                                  "path": str(NodePath(role, i, side, path))})
                    edges.append([ids[path[:-1]] if path else rel_id, nid])
    return {"nodes": nodes, "edges": edges}


def observe(state: ProofState) -> Observation:
    return Observation(encode_seq(state), encode_graph(state))


def node_count(state: ProofState) -> int:
    return sum(sum(1 for _ in iter_nodes(s.lhs)) + sum(1 for _ in iter_nodes(s.rhs))
               for _, stmts in _statements(state) for s in stmts)


def action_space_size(state: ProofState, axiom_set: str = "ordered-field") -> int:
    """|axioms| * |nodes|^3."""
    return len(AXIOM_SETS[axiom_set]) * node_count(state) ** 3


class ProofEnv:
    """Single-episode environment. Rejected actions cost a step and change nothing."""

    def __init__(self, config: EnvConfig = EnvConfig()):
        self.config = config
        self.state: Optional[ProofState] = None
        self.done = True
        self.reward = 0.0

    def reset(self, theorem: Theorem) -> Observation:
        self.state = init_state(theorem)
        self.done = self.state.proven()
        self.reward = self.config.reward_on_success if self.done else self.config.reward_otherwise
        return observe(self.state)

    def step(self, action: Action) -> tuple[Observation, float, bool, dict]:
        if self.done or self.state is None:
            raise EpisodeFinished("episode is over; call reset")
        result = apply_step(self.state, action.to_step())
        self.state = result.next_state
        info = {"accepted": result.accepted, "steps_taken": self.state.steps_taken}
        if result.reason:
            info["reason"] = result.reason
        if result.proven:
            self.done, self.reward = True, self.config.reward_on_success
        elif self.state.steps_taken >= self.config.step_limit:
            self.done, self.reward = True, self.config.reward_otherwise
        else:
            self.reward = self.config.reward_otherwise
        return observe(self.state), self.reward, self.done, info

    def action_space_size(self) -> int:
        if self.state is None:
            raise EpisodeFinished("no active episode")
        return action_space_size(self.state, self.config.axiom_set)

