"""PUCT Monte-Carlo tree search over the axiom space.

The tree branches on axioms only. Each axiom edge receives its arguments
from the policy once, when the edge is first traversed, and keeps them.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Protocol, Sequence

from .axioms import (
    AXIOM_SETS,
    IMPLICATION_RULES,
    TRANSFORM_RULES,
    AxiomId,
    Direction,
    Mode,
    PVar,
    match_transform,
    rewrite,
)
from .errors import NoLegalAction, TerminalRoot
from .expr import NodePath, Rel, iter_nodes
from .kernel import ProofState, apply_step, init_state
from .proof import ProofStep, Theorem

_REWRITE_DIRECTIONS = (Direction.FORWARD, Direction.REVERSE, Direction.REVERSE_LEFT)


@dataclass(frozen=True)
class MctsConfig:
    c_puct: float = 1.0
    tau: float = 1.0
    n_simulations: int = 200
    step_limit: int = 15
    axiom_set: str = "ordered-field"

    def __post_init__(self):
        if self.n_simulations < 1:
            raise ValueError("n_simulations must be at least 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")


# ---------------------------------------------------------------- legal steps


def state_key(state: ProofState) -> tuple:
    return (state.goals, state.premises, state.facts)


def _goal_nodes(state: ProofState) -> Iterator[tuple[NodePath, object]]:
    for i, g in enumerate(state.goals):
        for side in ("lhs", "rhs"):
            for path, node in iter_nodes(g.side(side)):
                yield NodePath("goal", i, side, path), node


def _sources(state: ProofState) -> list[NodePath]:
    """One path per distinct entity in the state, for the x1 slot of reverse AS/MS."""
    seen: dict = {}
    for role, stmts in (("goal", state.goals), ("premise", state.premises), ("fact", state.facts)):
        for i, s in enumerate(stmts):
            for side in ("lhs", "rhs"):
                for path, node in iter_nodes(s.side(side)):
                    seen.setdefault(node, NodePath(role, i, side, path))
    return list(seen.values())


def _congruent_paths(lhs, rhs, prefix=()) -> Iterator[tuple[int, ...]]:
    """Non-empty paths whose subterm pair differs while everything around it agrees."""
    if type(lhs) is not type(rhs) or lhs == rhs:
        return
    lk, rk = lhs.children, rhs.children
    diff = [j for j in range(len(lk)) if lk[j] != rk[j]]
    if len(diff) != 1:
        return
    j = diff[0]
    yield prefix + (j,)
    yield from _congruent_paths(lk[j], rk[j], prefix + (j,))


def _by_type(nodes) -> dict:
    table: dict = {}
    for path, node in nodes:
        table.setdefault(type(node), []).append((path, node))
    return table


def _pattern_roots(axiom: AxiomId, d: Direction) -> list:
    variants, rhs = TRANSFORM_RULES[axiom]
    if d is Direction.FORWARD:
        return list(variants)
    return [rhs] if d is Direction.REVERSE or len(variants) > 1 else []


def _rewrite_steps(state: ProofState, axiom: AxiomId, nodes, sources) -> Iterator[ProofStep]:
    """Goal-node rewrites that change the node. These are always accepted, so
    the kernel is not consulted."""
    dual = axiom in IMPLICATION_RULES
    for d in _REWRITE_DIRECTIONS:
        kinds = {type(p) for p in _pattern_roots(axiom, d)}
        if not kinds:
            continue
        pool = nodes[None] if PVar in kinds else [x for k in kinds for x in nodes.get(k, ())]
        for path, node in pool:
            if match_transform(axiom, node, d) is None:
                continue
            if dual and d is not Direction.FORWARD:
                for src in sources():
                    yield ProofStep(axiom, (path, src), d)
            elif rewrite(axiom, node, d) != node:
                yield ProofStep(axiom, (path,), d)


def _implication_steps(state: ProofState, axiom: AxiomId) -> Iterator[ProofStep]:
    """Accepted backward and forward uses of an implication that change the state."""
    key = state_key(state)
    seen: set = set()
    for step in _raw_implication_steps(state, axiom):
        result = apply_step(state, step)
        if not result.accepted:
            continue
        k = state_key(result.next_state)
        if k == key or k in seen:
            continue
        seen.add(k)
        yield step


def _raw_implication_steps(state: ProofState, axiom: AxiomId) -> Iterator[ProofStep]:
    for i, g in enumerate(state.goals):
        yield ProofStep(axiom, (NodePath("goal", i, "lhs", ()),), None, Mode.BACKWARD)
        if g.rel is Rel.EQ:
            for p in _congruent_paths(g.lhs, g.rhs):
                yield ProofStep(axiom, (NodePath("goal", i, "lhs", p),), None, Mode.BACKWARD)
    known = [NodePath("premise", i, "lhs", ()) for i in range(len(state.premises))]
    known += [NodePath("fact", i, "lhs", ()) for i in range(len(state.facts))]
    for args in itertools.product(known, repeat=IMPLICATION_RULES[axiom].n_args):
        yield ProofStep(axiom, args, None, Mode.FORWARD)


def legal_steps(state: ProofState, axiom: AxiomId, nodes=None, sources=None) -> Iterator[ProofStep]:
    """Steps on ``axiom`` the kernel accepts and that change the goals or facts."""
    if axiom in TRANSFORM_RULES:
        if nodes is None:
            nodes = _by_type(_goal_nodes(state))
            nodes[None] = list(_goal_nodes(state))
        sources = sources or (lambda: _sources(state))
        yield from _rewrite_steps(state, axiom, nodes, sources)
    if axiom in IMPLICATION_RULES:
        yield from _implication_steps(state, axiom)


class StepCache:
    """Legal steps per (state, axiom), computed lazily."""

    def __init__(self, max_entries: int = 50_000):
        self.max_entries = max_entries
        self._full: dict = {}
        self._any: dict = {}
        self._nodes: dict = {}
        self._sources: dict = {}

    def _put(self, table: dict, key, value):
        if len(table) >= self.max_entries:
            table.clear()
        table[key] = value
        return value

    def _steps(self, state: ProofState, axiom: AxiomId) -> Iterator[ProofStep]:
        key = state_key(state)
        nodes = self._nodes.get(key)
        if nodes is None:
            flat = list(_goal_nodes(state))
            nodes = _by_type(flat)
            nodes[None] = flat
            self._put(self._nodes, key, nodes)

        def sources():
            hit = self._sources.get(key)
            return hit if hit is not None else self._put(self._sources, key, _sources(state))

        return legal_steps(state, axiom, nodes, sources)

    def candidates(self, state: ProofState, axiom: AxiomId) -> list[ProofStep]:
        key = (state_key(state), axiom)
        hit = self._full.get(key)
        if hit is None:
            hit = self._put(self._full, key, list(self._steps(state, axiom)))
        return hit

    def is_legal(self, state: ProofState, axiom: AxiomId) -> bool:
        key = (state_key(state), axiom)
        if key in self._full:
            return bool(self._full[key])
        hit = self._any.get(key)
        if hit is None:
            hit = self._put(self._any, key, next(self._steps(state, axiom), None) is not None)
        return hit

    def legal_axioms(self, state: ProofState, axiom_set: str) -> list[AxiomId]:
        return [a for a in AXIOM_SETS[axiom_set] if self.is_legal(state, a)]


# ---------------------------------------------------------------- policies and values


class Policy(Protocol):
    def prior(self, state: ProofState, axiom_set: str) -> dict[AxiomId, float]: ...

    def propose_args(self, state: ProofState, axiom: AxiomId, rng: random.Random) -> Optional[ProofStep]: ...


class ValueFn(Protocol):
    def __call__(self, state: ProofState) -> float: ...


class UniformPolicy:
    """Uniform prior over legal axioms; arguments drawn uniformly from the legal steps."""

    def __init__(self, cache: Optional[StepCache] = None):
        self.cache = cache or StepCache()

    def prior(self, state: ProofState, axiom_set: str = "ordered-field") -> dict[AxiomId, float]:
        legal = self.cache.legal_axioms(state, axiom_set)
        return {a: 1.0 / len(legal) for a in legal}

    def propose_args(self, state: ProofState, axiom: AxiomId, rng: random.Random) -> Optional[ProofStep]:
        steps = self.cache.candidates(state, axiom)
        return steps[rng.randrange(len(steps))] if steps else None


class OraclePolicy(UniformPolicy):
    """Peeks at a ground-truth proof: after ``i`` accepted steps that followed it,
    step ``i`` gets ``confidence`` of the prior mass and is proposed verbatim."""

    def __init__(self, theorem: Theorem, confidence: float = 0.9, cache: Optional[StepCache] = None):
        super().__init__(cache)
        self.theorem = theorem
        self.confidence = confidence
        # States reached by following the ground truth, mapped to the next step.
        self._next: dict = {}
        state = init_state(theorem)
        for step in theorem.proof:
            self._next[state_key(state)] = step
            result = apply_step(state, step)
            if not result.accepted:
                break
            state = result.next_state

    def _truth(self, state: ProofState) -> Optional[ProofStep]:
        return self._next.get(state_key(state))

    def prior(self, state: ProofState, axiom_set: str = "ordered-field") -> dict[AxiomId, float]:
        base = super().prior(state, axiom_set)
        truth = self._truth(state)
        if truth is None or truth.axiom not in base:
            return base
        rest = len(base) - 1
        if rest == 0:
            return {truth.axiom: 1.0}
        other = (1.0 - self.confidence) / rest
        return {a: (self.confidence if a is truth.axiom else other) for a in base}

    def propose_args(self, state: ProofState, axiom: AxiomId, rng: random.Random) -> Optional[ProofStep]:
        truth = self._truth(state)
        if truth is not None and truth.axiom is axiom:
            return truth
        return super().propose_args(state, axiom, rng)


def goal_node_count(state: ProofState) -> int:
    return sum(sum(1 for _ in iter_nodes(g.lhs)) + sum(1 for _ in iter_nodes(g.rhs)) for g in state.goals)


def heuristic_value(state: ProofState) -> float:
    """1 when proven, otherwise shrinks linearly with the remaining goal size."""
    if state.proven():
        return 1.0
    return max(0.0, 1.0 - goal_node_count(state) / 50)


# ---------------------------------------------------------------- tree


@dataclass
class Edge:
    prior: float
    n: int = 0
    w: float = 0.0
    step: Optional[ProofStep] = None
    child: Optional["SearchNode"] = None

    @property
    def q(self) -> float:
        return self.w / self.n if self.n else 0.0


@dataclass
class SearchNode:
    state: ProofState
    edges: dict[AxiomId, Edge] = field(default_factory=dict)
    terminal: bool = False
    value: float = 0.0

    @property
    def visits(self) -> int:
        return sum(e.n for e in self.edges.values())


def puct_scores(node: SearchNode, c_puct: float) -> dict[AxiomId, float]:
    root_n = math.sqrt(node.visits)
    return {a: e.q + c_puct * e.prior * root_n / (1 + e.n) for a, e in node.edges.items()}


def select_axiom(node: SearchNode, cfg: MctsConfig = MctsConfig()) -> AxiomId:
    """argmax of Q + c_puct * P * sqrt(sum N) / (1 + N); ties go to the lowest axiom index."""
    if not node.edges:
        raise NoLegalAction("no legal axiom at this node")
    scores = puct_scores(node, cfg.c_puct)
    return min(scores, key=lambda a: (-scores[a], a.index))


def _make_node(state: ProofState, policy: Policy, value_fn: ValueFn, cfg: MctsConfig) -> SearchNode:
    if state.proven():
        return SearchNode(state, terminal=True, value=1.0)
    if state.steps_taken >= cfg.step_limit:
        return SearchNode(state, terminal=True, value=0.0)
    prior = policy.prior(state, cfg.axiom_set)
    if not prior:
        return SearchNode(state, terminal=True, value=0.0)
    total = sum(prior.values())
    edges = {a: Edge(p / total) for a, p in prior.items()}
    return SearchNode(state, edges, value=float(value_fn(state)))


def _simulate(root: SearchNode, policy: Policy, value_fn: ValueFn, cfg: MctsConfig, rng: random.Random) -> float:
    path: list[Edge] = []
    node = root
    while True:
        axiom = select_axiom(node, cfg)
        edge = node.edges[axiom]
        path.append(edge)
        if edge.child is None:
            edge.step = policy.propose_args(node.state, axiom, rng)
            result = apply_step(node.state, edge.step) if edge.step is not None else None
            if result is None or not result.accepted:
                # A proposal the kernel rejects ends the line with no reward.
                edge.child = SearchNode(node.state, terminal=True, value=0.0)
            else:
                edge.child = _make_node(result.next_state, policy, value_fn, cfg)
            value = edge.child.value
            break
        node = edge.child
        if node.terminal:
            value = node.value
            break
    for e in path:
        e.n += 1
        e.w += value
    return value


def visit_distribution(node: SearchNode, tau: float = 1.0) -> dict[AxiomId, float]:
    """pi(a) proportional to N(a)^(1/tau)."""
    weights = {a: e.n ** (1.0 / tau) for a, e in node.edges.items()}
    total = sum(weights.values())
    return {a: w / total for a, w in weights.items()} if total else {}


def search(
    state: ProofState,
    policy: Policy,
    value_fn: ValueFn = heuristic_value,
    cfg: MctsConfig = MctsConfig(),
    rng: Optional[random.Random] = None,
    root: Optional[SearchNode] = None,
) -> SearchNode:
    """Run ``cfg.n_simulations`` passes from ``state``, growing ``root`` if given."""
    rng = rng or random.Random(0)
    if root is None:
        root = _make_node(state, policy, value_fn, cfg)
    if root.terminal:
        raise TerminalRoot("the root state is terminal")
    for _ in range(cfg.n_simulations):
        _simulate(root, policy, value_fn, cfg, rng)
    return root


def run_mcts(
    state: ProofState,
    policy: Policy,
    value_fn: ValueFn = heuristic_value,
    cfg: MctsConfig = MctsConfig(),
    rng: Optional[random.Random] = None,
) -> dict[AxiomId, float]:
    return visit_distribution(search(state, policy, value_fn, cfg, rng), cfg.tau)


def _sample(dist: dict[AxiomId, float], rng: random.Random) -> AxiomId:
    axioms = sorted(dist, key=lambda a: a.index)
    return rng.choices(axioms, weights=[dist[a] for a in axioms])[0]


def prove(
    theorem: Theorem,
    policy: Policy,
    value_fn: ValueFn = heuristic_value,
    cfg: MctsConfig = MctsConfig(),
    rng: Optional[random.Random] = None,
) -> Optional[list[ProofStep]]:
    """Search, commit a sampled axiom with its edge's arguments, repeat.

    Returns the committed steps once the goals are closed, or None when the
    step limit is reached or no legal axiom remains.
    """
    rng = rng or random.Random(0)
    state = init_state(theorem)
    steps: list[ProofStep] = []
    root: Optional[SearchNode] = None
    while not state.proven():
        if state.steps_taken >= cfg.step_limit:
            return None
        try:
            root = search(state, policy, value_fn, cfg, rng, root)
        except (TerminalRoot, NoLegalAction):
            return None
        edge = root.edges[_sample(visit_distribution(root, cfg.tau), rng)]
        if edge.step is None:
            return None
        result = apply_step(state, edge.step)
        state = result.next_state
        # The chosen subtree carries over; its statistics stay valid.
        root = edge.child if result.accepted and edge.child and not edge.child.terminal else None
        if result.accepted:
            steps.append(edge.step)
    return steps


def greedy_prove(
    theorem: Theorem,
    policy: Policy,
    cfg: MctsConfig = MctsConfig(),
    rng: Optional[random.Random] = None,
) -> Optional[list[ProofStep]]:
    """No search: take the highest-prior axiom each step, breaking ties at random."""
    rng = rng or random.Random(0)
    state = init_state(theorem)
    steps: list[ProofStep] = []
    while not state.proven():
        if state.steps_taken >= cfg.step_limit:
            return None
        prior = policy.prior(state, cfg.axiom_set)
        if not prior:
            return None
        best = max(prior.values())
        tied = sorted((a for a, p in prior.items() if p == best), key=lambda a: a.index)
        axiom = tied[rng.randrange(len(tied))]
        step = policy.propose_args(state, axiom, rng)
        if step is None:
            return None
        result = apply_step(state, step)
        state = result.next_state
        if result.accepted:
            steps.append(step)
    return steps


def solve_rates(
    theorems: Sequence[Theorem],
    make_policy,
    cfg: MctsConfig = MctsConfig(),
    seed: int = 0,
    value_fn: ValueFn = heuristic_value,
) -> dict:
    """Paired greedy vs MCTS comparison on the same theorems and seeds."""
    greedy, mcts = [], []
    for i, thm in enumerate(theorems):
        greedy.append(greedy_prove(thm, make_policy(thm), cfg, random.Random(seed + i)))
        mcts.append(prove(thm, make_policy(thm), value_fn, cfg, random.Random(seed + i)))
    both = [i for i in range(len(theorems)) if greedy[i] is not None and mcts[i] is not None]
    mean = lambda xs: sum(xs) / len(xs) if xs else 0.0  # noqa: E731
    return {
        "n": len(theorems),
        "greedy_solved": sum(p is not None for p in greedy),
        "mcts_solved": sum(p is not None for p in mcts),
        "common": len(both),
        "greedy_mean_length": mean([len(greedy[i]) for i in both]),
        "mcts_mean_length": mean([len(mcts[i]) for i in both]),
        "greedy": greedy,
        "mcts": mcts,
    }
