import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from intkit.axioms import AXIOM_SETS, AxiomId, arg_count
from intkit.errors import NoLegalAction, TerminalRoot
from intkit.generator import GeneratorConfig, generate
from intkit.kernel import apply_step, init_state, verify
from intkit.proof import Theorem
from intkit.search import (
    Edge,
    MctsConfig,
    OraclePolicy,
    SearchNode,
    StepCache,
    UniformPolicy,
    greedy_prove,
    heuristic_value,
    legal_steps,
    prove,
    puct_scores,
    run_mcts,
    search,
    select_axiom,
    visit_distribution,
)

ORDERED = AXIOM_SETS["ordered-field"]


class FirstPolicy(UniformPolicy):
    """Uniform prior; always proposes the first legal step, so the tree is deterministic."""

    def propose_args(self, state, axiom, rng):
        steps = self.cache.candidates(state, axiom)
        return steps[0] if steps else None


def zero_value(state):
    return 0.0


def _node(stats):
    """stats: {axiom: (prior, n, w)}"""
    return SearchNode(None, {a: Edge(p, n, w) for a, (p, n, w) in stats.items()})


def test_select_axiom_formula_example():
    node = _node({AxiomId.AC: (0.5, 1, 0.5), AxiomId.AA: (0.5, 1, 0.0)})
    scores = puct_scores(node, 1.0)
    assert scores[AxiomId.AC] == pytest.approx(0.5 + 0.5 * math.sqrt(2) / 2)
    assert scores[AxiomId.AC] == pytest.approx(0.8536, abs=1e-4)
    assert scores[AxiomId.AA] == pytest.approx(0.3536, abs=1e-4)
    assert select_axiom(node) is AxiomId.AC


def test_select_axiom_ties_and_errors():
    node = _node({a: (1 / 3, 0, 0.0) for a in (AxiomId.FPOI, AxiomId.AZ, AxiomId.MC)})
    assert select_axiom(node) is AxiomId.MC  # lowest index among the tied
    with pytest.raises(NoLegalAction):
        select_axiom(SearchNode(None))


@settings(max_examples=200)
@given(
    st.lists(st.tuples(st.floats(0.01, 1), st.integers(0, 20), st.floats(0, 1)), min_size=1, max_size=18),
    st.floats(0.1, 10),
    st.floats(0.1, 4),
)
def test_select_axiom_is_argmax(rows, scale, c_puct):
    axioms = ORDERED[: len(rows)]
    total = sum(p for p, _, _ in rows)
    stats = {a: (p / total, n, w * n) for a, (p, n, w) in zip(axioms, rows)}
    node = _node(stats)
    # Independent evaluation of Q + c P sqrt(sum N) / (1 + N).
    root = math.sqrt(sum(n for _, n, _ in stats.values()))
    score = {a: (w / n if n else 0.0) + c_puct * p * root / (1 + n) for a, (p, n, w) in stats.items()}
    best = max(score.values())
    chosen = select_axiom(node, MctsConfig(c_puct=c_puct))
    assert score[chosen] == pytest.approx(best, abs=1e-9)
    # Rescaling priors and renormalizing changes nothing.
    scaled_total = sum(p * scale for p, _, _ in stats.values())
    rescaled = _node({a: (p * scale / scaled_total, n, w) for a, (p, n, w) in stats.items()})
    assert select_axiom(rescaled, MctsConfig(c_puct=c_puct)) is chosen


def test_config_validation():
    with pytest.raises(ValueError):
        MctsConfig(n_simulations=0)
    with pytest.raises(ValueError):
        MctsConfig(tau=0)


def test_visit_distribution():
    node = _node({AxiomId.AC: (0.5, 3, 0.0), AxiomId.AA: (0.5, 1, 0.0)})
    assert visit_distribution(node, 1.0) == {AxiomId.AC: 0.75, AxiomId.AA: 0.25}
    sharp = visit_distribution(node, 0.5)
    assert sharp[AxiomId.AC] == pytest.approx(0.9)


def _theorem(index):
    return generate(GeneratorConfig(k=2, l=3, seed=5), index)


@pytest.mark.parametrize("sims", [1, 7, 50])
def test_root_visits_equal_simulations(sims):
    thm = _theorem(0)
    root = search(init_state(thm), UniformPolicy(), cfg=MctsConfig(n_simulations=sims), rng=random.Random(1))
    assert root.visits == sims


def test_search_is_deterministic():
    thm = _theorem(1)
    runs = [run_mcts(init_state(thm), UniformPolicy(), cfg=MctsConfig(n_simulations=60), rng=random.Random(3))
            for _ in range(2)]
    assert runs[0] == runs[1]


def _bandit_counts(rewards, priors, n_sims, c_puct=1.0):
    """Visit counts of PUCT on a one-ply tree with fixed terminal rewards."""
    order = sorted(rewards, key=lambda a: a.index)
    n = {a: 0 for a in order}
    w = {a: 0.0 for a in order}
    for t in range(n_sims):
        root = math.sqrt(t)
        score = {a: (w[a] / n[a] if n[a] else 0.0) + c_puct * priors[a] * root / (1 + n[a]) for a in order}
        best = max(score.values())
        a = next(a for a in order if score[a] == best)
        n[a] += 1
        w[a] += rewards[a]
    return n


def test_one_ply_bandit_matches_exact_recursion():
    thm = Theorem.of("(a+0)=a")
    policy = FirstPolicy()
    state = init_state(thm)
    rewards = {}
    for a in policy.prior(state):
        step = policy.propose_args(state, a, None)
        rewards[a] = 1.0 if apply_step(state, step).proven else 0.0
    assert sum(rewards.values()) == 1.0
    root = search(state, policy, zero_value, MctsConfig(n_simulations=200, step_limit=1), random.Random(0))
    expected = _bandit_counts(rewards, policy.prior(state), 200)
    assert {a: e.n for a, e in root.edges.items()} == expected
    winner = max(rewards, key=rewards.get)
    assert root.edges[winner].n > 100


def _brute_force_scores(state, policy):
    """1 if the first-candidate step proves at once, 0.5 if some second step does, else 0."""
    scores = {}
    for a in policy.prior(state):
        res = apply_step(state, policy.propose_args(state, a, None))
        if not res.accepted:
            scores[a] = 0.0
        elif res.proven:
            scores[a] = 1.0
        else:
            nxt = res.next_state
            two = any(apply_step(nxt, policy.propose_args(nxt, b, None)).proven for b in policy.prior(nxt))
            scores[a] = 0.5 if two else 0.0
    return scores


@pytest.mark.parametrize("theorem", [
    Theorem.of("(a+0)=a"),
    Theorem.of("(a+d)>=(a+e)", ("d>=e",)),
    Theorem.of("((b+a)+0)=(a+b)"),
    Theorem.of("((a*1)+0)=a"),
])
def test_toy_problems_match_brute_force(theorem):
    policy = FirstPolicy()
    state = init_state(theorem)
    scores = _brute_force_scores(state, policy)
    best = max(scores.values())
    assert best > 0
    optimal = {a for a, s in scores.items() if s == best}
    root = search(state, policy, zero_value, MctsConfig(n_simulations=400, step_limit=2), random.Random(0))
    top = max(root.edges, key=lambda a: (root.edges[a].n, -a.index))
    assert top in optimal, (top, scores)


def _check_conservation(edge):
    child = edge.child
    if child is None:
        assert edge.n == 0 and edge.w == 0
        return
    if child.terminal:
        assert edge.w == pytest.approx(edge.n * child.value)
        return
    # First visit backs up the leaf value; later ones back up through the child.
    assert edge.n == 1 + child.visits
    assert edge.w == pytest.approx(child.value + sum(e.w for e in child.edges.values()))
    for e in child.edges.values():
        _check_conservation(e)


@pytest.mark.parametrize("index", range(3))
def test_backup_conserves_value(index):
    root = search(init_state(_theorem(index)), UniformPolicy(), cfg=MctsConfig(n_simulations=80), rng=random.Random(2))
    for e in root.edges.values():
        _check_conservation(e)


def test_trivial_theorem():
    assert prove(Theorem.of("a=a"), UniformPolicy()) == []
    with pytest.raises(TerminalRoot):
        search(init_state(Theorem.of("a=a")), UniformPolicy())


@pytest.mark.parametrize("index", range(4))
def test_oracle_guided_proofs_verify(index):
    thm = generate(GeneratorConfig(k=3, l=5, seed=9), index)
    cfg = MctsConfig(n_simulations=30)
    steps = prove(thm, OraclePolicy(thm), cfg=cfg, rng=random.Random(index))
    assert steps is not None and verify(thm, steps) and len(steps) <= 15
    greedy = greedy_prove(thm, OraclePolicy(thm), cfg, random.Random(index))
    assert greedy == list(thm.proof)


def test_uniform_proofs_verify_when_found():
    cfg = MctsConfig(n_simulations=40)
    for i in range(3):
        thm = _theorem(i)
        steps = prove(thm, UniformPolicy(), cfg=cfg, rng=random.Random(i))
        assert steps is None or verify(thm, steps)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_policy_contracts(index):
    thm = _theorem(index)
    state = init_state(thm)
    cache = StepCache()
    for policy in (UniformPolicy(cache), OraclePolicy(thm, cache=cache)):
        prior = policy.prior(state)
        assert sum(prior.values()) == pytest.approx(1.0)
        for a in prior:
            step = policy.propose_args(state, a, random.Random(index))
            assert len(step.args) == arg_count(a, step.direction, step.mode)
    # Every enumerated candidate is accepted by the kernel.
    for a in ORDERED:
        for step in legal_steps(state, a):
            assert apply_step(state, step).accepted


def test_heuristic_value_bounds():
    assert heuristic_value(init_state(Theorem.of("a=a"))) == 1.0
    assert 0.0 <= heuristic_value(init_state(_theorem(0))) < 1.0
