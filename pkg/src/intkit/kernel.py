"""Trusted proof-checking core: proof states, step semantics, verification.

A step is one of:

* a rewrite (transformation axiom with a direction) at a node. At a goal
  node the goal itself is rewritten; at a premise or fact node the equality
  ``node = node'`` becomes a fact.
* a forward implication: arguments point at known statements; when every
  assumption is known the conclusions become facts.
* a backward implication: one argument points at a goal. With an empty path
  the whole goal is the target; otherwise the target is the pair of
  subterms at that path on both sides of an equality goal whose surrounding
  contexts are identical. The goal is replaced by the unknown assumptions.

Goals that become trivial are dropped after every accepted step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace
from functools import cached_property
from typing import Optional

from .axioms import Direction, Mode, apply_backward, apply_forward, arg_count, is_rewrite, rewrite
from .errors import IntError, InvalidPath, StepRejected
from .expr import Rel, Statement, eq, replace, resolve, statement_at
from .proof import ProofStep, Theorem


@dataclass(frozen=True)
class ProofState:
    goals: tuple[Statement, ...]
    premises: tuple[Statement, ...]
    facts: tuple[Statement, ...] = ()
    steps_taken: int = 0

    @cached_property
    def known(self) -> frozenset[Statement]:
        return frozenset(self.premises) | frozenset(self.facts)

    def proven(self) -> bool:
        return all(is_trivial(g, self) for g in self.goals)


@dataclass(frozen=True)
class StepResult:
    next_state: ProofState
    accepted: bool
    proven: bool
    reason: Optional[str] = None


@dataclass(frozen=True)
class Verdict:
    ok: bool
    step_index: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


def init_state(theorem: Theorem) -> ProofState:
    return ProofState((theorem.goal,), tuple(dict.fromkeys(theorem.premises)))


def is_trivial(s: Statement, state: ProofState) -> bool:
    """Identical sides (except for non-zero claims) or already known; equalities count both ways."""
    if s.lhs == s.rhs and s.rel is not Rel.NEQ:
        return True
    known = state.known
    return s in known or (s.rel is Rel.EQ and s.swapped() in known)


def _pair_at(goal: Statement, path) -> Statement:
    """The equality between the subterms at ``path`` on both sides, provided
    everything outside that position is identical."""
    if goal.rel is not Rel.EQ:
        raise StepRejected("NOT_CONGRUENT", "sub-goal targets need an equality goal")
    left, right = goal.lhs, goal.rhs
    for i in path:
        if type(left) is not type(right):
            raise StepRejected("NOT_CONGRUENT", "sides differ outside the target")
        lk, rk = left.children, right.children
        if not 0 <= i < len(lk):
            raise InvalidPath(f"child index {i} out of range")
        if any(j != i and lk[j] != rk[j] for j in range(len(lk))):
            raise StepRejected("NOT_CONGRUENT", "sides differ outside the target")
        left, right = lk[i], rk[i]
    return eq(left, right)


def _add_facts(facts: tuple[Statement, ...], new) -> tuple[Statement, ...]:
    return tuple(dict.fromkeys(facts + tuple(new)))


def _transition(state: ProofState, step: ProofStep) -> ProofState:
    axiom, direction = step.axiom, step.direction
    need = arg_count(axiom, direction, step.mode)
    if len(step.args) != need:
        raise StepRejected("ARITY_MISMATCH", f"{axiom.value} takes {need} argument(s)")
    goals, facts = state.goals, state.facts
    if is_rewrite(axiom, direction):
        path = step.args[0]
        node = resolve(path, state)
        x1 = resolve(step.args[1], state) if need == 2 else None
        new = rewrite(axiom, node, direction or Direction.FORWARD, x1)
        if path.role == "goal":
            i = path.index
            goals = goals[:i] + (replace(path, state, new),) + goals[i + 1 :]
        else:
            facts = _add_facts(facts, [eq(node, new)])
    elif step.mode is Mode.FORWARD:
        imp = apply_forward(axiom, [statement_at(p, state) for p in step.args])
        missing = [a for a in imp.assumptions if not is_trivial(a, state)]
        if missing:
            raise StepRejected("ASSUMPTIONS_UNKNOWN", f"not known: {missing[0]}")
        facts = _add_facts(facts, imp.conclusions)
    else:
        path = step.args[0]
        if path.role != "goal":
            raise StepRejected("NOT_A_GOAL", "backward steps target a goal")
        goal = statement_at(path, state)
        target = _pair_at(goal, path.path) if path.path else goal
        imp = apply_backward(axiom, target)
        open_ = tuple(dict.fromkeys(a for a in imp.assumptions if not is_trivial(a, state)))
        goals = goals[: path.index] + open_ + goals[path.index + 1 :]
    nxt = ProofState(goals, state.premises, facts, state.steps_taken + 1)
    return dc_replace(nxt, goals=tuple(g for g in nxt.goals if not is_trivial(g, nxt)))


def apply_step(state: ProofState, step: ProofStep) -> StepResult:
    """Apply one step. Agent errors never raise; they come back as a rejection."""
    try:
        nxt = _transition(state, step)
    except IntError as err:
        same = dc_replace(state, steps_taken=state.steps_taken + 1)
        return StepResult(same, False, same.proven(), err.code)
    return StepResult(nxt, True, not nxt.goals)


def check_proof(theorem: Theorem, proof) -> Verdict:
    state = init_state(theorem)
    for i, step in enumerate(proof):
        result = apply_step(state, step)
        if not result.accepted:
            return Verdict(False, i, result.reason)
        state = result.next_state
    if not state.proven():
        return Verdict(False, len(proof), "GOALS_REMAIN")
    return Verdict(True)


def verify(theorem: Theorem, proof=None) -> bool:
    steps = theorem.proof if proof is None else proof
    return check_proof(theorem, steps or ()).ok
