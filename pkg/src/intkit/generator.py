"""Theorem generator: grow a trivial statement X=X into a theorem by applying
an axiom order, one axiom per step, and synthesize a kernel-checkable proof
by walking the construction backwards.

Each step either rewrites a matching node of the core statement in place
(transformation) or wraps the core in a larger statement, possibly adding
premises (extension). Transformation is tried first.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterator, Optional, Sequence, Union

from .axioms import (
    AXIOM_SETS,
    TRANSFORM_RULES,
    AxiomId,
    Direction,
    Mode,
    apply_backward,
    extend,
    forward_variant,
    match_transform,
    rewrite,
)
from .errors import (
    CoreFormMismatch,
    DivisionByZero,
    EmptyPool,
    GenerationFailed,
    InfeasibleOrder,
    MorphFailed,
    PatternMismatch,
)
from .expr import (
    DEFAULT_VARIABLES,
    Add,
    Entity,
    Inv,
    Mul,
    Neg,
    NodePath,
    Rel,
    Sqr,
    Statement,
    Var,
    eq,
    eval_numeric,
    iter_nodes,
    replace_at,
    subterm,
)
from .proof import ProofStep, Theorem, TheoremMeta

# Relation a core must have for each extension, and the relation it produces.
_EQ_TO_GEQ = {AxiomId.EIDI, AxiomId.SGEQZ}
_GEQ_ONLY = {AxiomId.IMT, AxiomId.FPOI, AxiomId.SPOI}
_EQ_ONLY = {AxiomId.POE, AxiomId.EMT}

# Extensions that wrap the core: (side of C_t rewritten by the proof, direction, where C_{t-1} ends up).
_WRAPPERS: dict[AxiomId, tuple[str, Direction, tuple[int, ...]]] = {
    AxiomId.AC: ("rhs", Direction.FORWARD, (0,)),
    AxiomId.AA: ("lhs", Direction.FORWARD, (0, 0)),
    AxiomId.MC: ("rhs", Direction.FORWARD, (0,)),
    AxiomId.MA: ("lhs", Direction.FORWARD, (0, 0)),
    AxiomId.AMLD: ("rhs", Direction.REVERSE, (1,)),
    AxiomId.AMRD: ("rhs", Direction.REVERSE, (0,)),
    AxiomId.SD: ("rhs", Direction.FORWARD, (1,)),
}


@dataclass(frozen=True)
class GeneratorConfig:
    axiom_set: str = "ordered-field"
    k: int = 3
    l: int = 3
    degree: int = 0
    seed: int = 0
    max_retries: int = 100
    # Attempts on one sampled order before drawing a new one. Orders are
    # either almost always or almost never generable, so this stays small.
    order_retries: int = 8
    variables: tuple[str, ...] = DEFAULT_VARIABLES

    def __post_init__(self):
        if self.axiom_set not in AXIOM_SETS:
            raise ValueError(f"unknown axiom set {self.axiom_set!r}")
        if self.k < 1 or self.l < self.k:
            raise InfeasibleOrder(f"need 1 <= K <= L, got K={self.k} L={self.l}")
        if self.k > len(AXIOM_SETS[self.axiom_set]):
            raise InfeasibleOrder(f"K={self.k} exceeds the {self.axiom_set} axiom count")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")


def derive_seed(seed: int, index: int, stream: str = "") -> int:
    """Independent 64-bit seed for theorem ``index`` of ``stream`` in a run seeded with ``seed``."""
    digest = hashlib.blake2b(f"{seed}:{stream}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


# ---------------------------------------------------------------- initial conditions


@lru_cache(maxsize=None)
def count_entities(degree: int, n_vars: int) -> int:
    """Number of distinct entities with exactly ``degree`` operators and variable leaves."""
    if degree == 0:
        return n_vars
    unary = 3 * count_entities(degree - 1, n_vars)
    binary = sum(count_entities(i, n_vars) * count_entities(degree - 1 - i, n_vars) for i in range(degree))
    return unary + 2 * binary


def _uniform_entity(degree: int, variables: Sequence[str], rng: random.Random) -> Entity:
    n = len(variables)
    if degree == 0:
        return Var(variables[rng.randrange(n)])
    r = rng.randrange(count_entities(degree, n))
    sub = count_entities(degree - 1, n)
    for ctor in (Neg, Inv, Sqr):
        if r < sub:
            return ctor(_uniform_entity(degree - 1, variables, rng))
        r -= sub
    for ctor in (Add, Mul):
        for i in range(degree):
            block = count_entities(i, n) * count_entities(degree - 1 - i, n)
            if r < block:
                return ctor(_uniform_entity(i, variables, rng), _uniform_entity(degree - 1 - i, variables, rng))
            r -= block
    raise AssertionError("unreachable")  # pragma: no cover


_PROBE_RNG = random.Random(0x1A7)
_PROBES = [
    {v: Fraction(_PROBE_RNG.randint(-97, 97), _PROBE_RNG.randint(1, 89)) for v in "abcdefghijklmnopqrstuvwxyz"}
    for _ in range(4)
]


def identically_zero(e: Entity) -> bool:
    """Heuristic zero test: ``e`` vanishes (or is undefined) at every probe point."""
    for point in _PROBES:
        try:
            if eval_numeric(e, point) != 0:
                return False
        except (DivisionByZero, KeyError):
            continue
    return True


def has_degenerate_inverse(e: Entity) -> bool:
    return any(type(n) is Inv and identically_zero(n.child) for _, n in iter_nodes(e))


def sample_initial_condition(
    degree: int, rng: random.Random, variables: Sequence[str] = DEFAULT_VARIABLES
) -> Statement:
    """X=X with X uniform over entities of exactly ``degree`` operators
    (entities dividing by an identically zero term are resampled)."""
    while True:
        x = _uniform_entity(degree, variables, rng)
        if not has_degenerate_inverse(x):
            return eq(x, x)


# ---------------------------------------------------------------- axiom orders


# Operator kinds each rewrite pattern needs, and kinds each step may introduce
# into the core or premises (over-approximation used for screening).
_NEEDS = {
    AxiomId.AC: {"+"}, AxiomId.AA: {"+"}, AxiomId.AS: {"+", "-"},
    AxiomId.MC: {"*"}, AxiomId.MA: {"*"}, AxiomId.MS: {"*", "/"},
    AxiomId.AMLD: {"+", "*"}, AxiomId.AMRD: {"+", "*"}, AxiomId.SD: {"^"},
    AxiomId.MO: {"*", "1"}, AxiomId.AZ: {"+", "0"},
}
_INTRODUCES = {
    AxiomId.AC: {"+"}, AxiomId.AA: {"+"}, AxiomId.AS: {"0", "+", "-"},
    AxiomId.MC: {"*"}, AxiomId.MA: {"*"}, AxiomId.MS: {"1", "*", "/", "0"},
    AxiomId.AMLD: {"+", "*"}, AxiomId.AMRD: {"+", "*"}, AxiomId.SD: {"*", "^"},
    AxiomId.MO: {"*", "1"}, AxiomId.AZ: {"+", "0"}, AxiomId.POE: {"+"},
    AxiomId.EMT: {"+", "-"}, AxiomId.SGEQZ: {"*", "0"}, AxiomId.EIDI: set(),
    AxiomId.IMT: {"+", "-"}, AxiomId.FPOI: {"+"}, AxiomId.SPOI: {"*", "0"},
}
_ALL_KINDS = frozenset("+*-/^01")


def order_feasible(order: Sequence[AxiomId], axiom_set: str, degree: int = 0) -> bool:
    """Dry run tracking the core relation and which operator kinds may be present.

    Extensions need a core of the right relation; on an inequality core a
    rewrite axiom has no extension to fall back on, so its pattern must be
    possible. Ordered-field orders must end on an inequality.
    """
    if order and order[0] is AxiomId.EIDI:
        return False  # X=X becomes X>=X, still trivial
    rel = Rel.EQ
    kinds = set(_ALL_KINDS) if degree > 0 else set()
    for a in order:
        if a in _EQ_TO_GEQ:
            if rel is not Rel.EQ:
                return False
            rel = Rel.GEQ
        elif a in _GEQ_ONLY:
            if rel is not Rel.GEQ:
                return False
        elif a in _EQ_ONLY and rel is not Rel.EQ:
            return False
        elif rel is Rel.GEQ and a in _NEEDS and not _NEEDS[a] <= kinds:
            return False
        kinds |= _INTRODUCES[a]
    if axiom_set == "ordered-field" and rel is not Rel.GEQ:
        return False
    return True


def _combo_feasible(combo: Sequence[AxiomId], axiom_set: str) -> bool:
    """Necessary condition on the axiom set alone: at most one switch from
    equality to inequality, which ordered-field theorems must contain."""
    switches = sum(a in _EQ_TO_GEQ for a in combo)
    if axiom_set == "ordered-field":
        return switches == 1
    return switches <= 1 and (switches == 1 or not any(a in _GEQ_ONLY for a in combo))


@lru_cache(maxsize=None)
def _covering(r: int, m: int, k: int) -> int:
    """Sequences of length ``r`` over ``k`` labels that use all of ``m`` given labels."""
    if r == 0:
        return 1 if m == 0 else 0
    total = (k - m) * _covering(r - 1, m, k)
    if m:
        total += m * _covering(r - 1, m - 1, k)
    return total


def _surjection(items: Sequence, l: int, rng: random.Random) -> list:
    """Uniform length-``l`` sequence in which every item appears."""
    k = len(items)
    unused, used, out = list(items), [], []
    for r in range(l, 0, -1):
        m = len(unused)
        fresh = m * _covering(r - 1, m - 1, k) if m else 0
        if rng.randrange(_covering(r, m, k)) < fresh:
            item = unused.pop(rng.randrange(m))
            used.append(item)
        else:
            item = used[rng.randrange(len(used))]
        out.append(item)
    return out


def sample_axiom_order(
    k: int, l: int, axiom_set: str, rng: random.Random, max_retries: int = 100_000, degree: int = 0
) -> list[AxiomId]:
    """Length-``l`` order with exactly ``k`` distinct axioms that passes screening.

    Uniform over such orders: a uniform ``k``-subset, a uniform sequence
    using all of it, rejected until feasible.
    """
    pool = AXIOM_SETS[axiom_set]
    if k < 1 or k > l or k > len(pool):
        raise InfeasibleOrder(f"no order of length {l} has {k} distinct axioms from {axiom_set}")
    for _ in range(max_retries):
        combo = rng.sample(pool, k)
        if not _combo_feasible(combo, axiom_set):
            continue
        order = _surjection(combo, l, rng)
        if order_feasible(order, axiom_set, degree):
            return order
    raise InfeasibleOrder(f"no feasible order found for K={k} L={l} {axiom_set}")


# ---------------------------------------------------------------- morph


@dataclass(frozen=True)
class TraceStep:
    axiom: AxiomId
    before: Statement
    after: Statement
    kind: str  # "transform" | "extend"
    side: str = "lhs"
    path: tuple[int, ...] = ()
    variant: int = 0
    x1: Optional[Entity] = None


def _statement_entities(stmts: Sequence[Statement]) -> list[Entity]:
    out = []
    for s in stmts:
        for root in (s.lhs, s.rhs):
            out.extend(n for _, n in iter_nodes(root))
    return out


def _occurs(x: Entity, stmts: Sequence[Statement]) -> bool:
    return any(n == x for n in _statement_entities(stmts))


EXTENSION_TRIES = 8


def morph(
    axiom: AxiomId,
    core: Statement,
    premises: Sequence[Statement],
    rng: random.Random,
    variables: Sequence[str] = DEFAULT_VARIABLES,
) -> tuple[Statement, tuple[Statement, ...], TraceStep]:
    """One generation step; returns (new core, new premises, trace record).

    Rewrites that would leave a trivial core (identical sides or a known
    premise) do not count as matches: the synthesized proof would close
    early. Extensions resample their nodes for the same reason.
    """
    known = frozenset(premises)
    if axiom in TRANSFORM_RULES:
        candidates = []
        for side, root in (("lhs", core.lhs), ("rhs", core.rhs)):
            for path, node in iter_nodes(root):
                v = forward_variant(axiom, node)
                if v is None:
                    continue
                new_core = _rewrite_core(core, side, path, rewrite(axiom, node))
                if _trivial(new_core, known):
                    continue
                x1 = None
                if axiom in (AxiomId.AS, AxiomId.MS):
                    # Undoing these rewrites in the proof needs x1 somewhere in the state.
                    x1 = match_transform(axiom, node)["x1"]
                    if not _occurs(x1, [new_core, *premises]):
                        continue
                candidates.append(TraceStep(axiom, core, new_core, "transform", side, path, v, x1))
        if candidates:
            rec = candidates[rng.randrange(len(candidates))]
            return rec.after, (), rec
    if axiom is AxiomId.MS and (identically_zero(core.lhs) or identically_zero(core.rhs)):
        raise MorphFailed("MS extension would divide by zero")
    pool = _statement_entities([core, *premises]) + [Var(v) for v in variables]
    for _ in range(EXTENSION_TRIES):
        try:
            new_core, new_premises = extend(axiom, core, pool, rng)
        except (CoreFormMismatch, EmptyPool) as err:
            raise MorphFailed(str(err)) from err
        if not _trivial(new_core, known | frozenset(new_premises)):
            return new_core, new_premises, TraceStep(axiom, core, new_core, "extend")
    raise MorphFailed(f"{axiom.value} keeps producing a trivial core")


def _rewrite_core(core: Statement, side: str, path, new: Entity) -> Statement:
    if side == "lhs":
        return Statement(core.rel, replace_at(core.lhs, path, new), core.rhs)
    return Statement(core.rel, core.lhs, replace_at(core.rhs, path, new))


# ---------------------------------------------------------------- proof synthesis


class _Degenerate(Exception):
    """The construction cannot be replayed as a proof of exactly L steps."""


def _other(side: str) -> str:
    return "rhs" if side == "lhs" else "lhs"


def _trivial(s: Statement, premises: frozenset) -> bool:
    if s.lhs == s.rhs and s.rel is not Rel.NEQ:
        return True
    return s in premises or (s.rel is Rel.EQ and s.swapped() in premises)


def _find_node(x: Entity, goal: Statement, premises: Sequence[Statement]) -> NodePath:
    for role, stmts in (("goal", [goal]), ("premise", premises)):
        for i, s in enumerate(stmts):
            for side, root in (("lhs", s.lhs), ("rhs", s.rhs)):
                for path, node in iter_nodes(root):
                    if node == x:
                        return NodePath(role, i, side, path)
    raise _Degenerate(f"{x} is not addressable")


def _pair(goal: Statement, prefix, swapped: bool) -> Statement:
    lhs, rhs = subterm(goal.lhs, prefix), subterm(goal.rhs, prefix)
    return Statement(goal.rel, rhs, lhs) if swapped else Statement(goal.rel, lhs, rhs)


def _rewrite_goal(goal: Statement, side: str, path, axiom, direction, x1=None) -> Statement:
    root = goal.lhs if side == "lhs" else goal.rhs
    node = subterm(root, path)
    return _rewrite_core(goal, side, path, rewrite(axiom, node, direction, x1))


def synthesize_proof(trace: Sequence[TraceStep], premises: Sequence[Statement]) -> list[ProofStep]:
    """Replay the construction backwards as goal-directed kernel steps."""
    known = frozenset(premises)
    goal = trace[-1].after
    swapped, prefix = False, ()
    steps: list[ProofStep] = []
    for t in range(len(trace) - 1, -1, -1):
        rec = trace[t]
        a = rec.axiom
        if rec.kind == "transform":
            side = _other(rec.side) if swapped else rec.side
            path = prefix + rec.path
            direction = Direction.REVERSE_LEFT if rec.variant == 1 else Direction.REVERSE
            args = (NodePath("goal", 0, side, path),)
            if rec.x1 is not None:
                args += (_find_node(rec.x1, goal, premises),)
            steps.append(ProofStep(a, args, direction))
            goal = _rewrite_goal(goal, side, path, a, direction, rec.x1)
        elif a in _WRAPPERS:
            core_side, direction, inner = _WRAPPERS[a]
            side = _other(core_side) if swapped else core_side
            steps.append(ProofStep(a, (NodePath("goal", 0, side, prefix),), direction))
            goal = _rewrite_goal(goal, side, prefix, a, direction)
            prefix, swapped = prefix + inner, not swapped
        elif a in (AxiomId.AZ, AxiomId.MO):
            side = "rhs" if swapped else "lhs"
            steps.append(ProofStep(a, (NodePath("goal", 0, side, prefix),), Direction.FORWARD))
            goal = _rewrite_goal(goal, side, prefix, a, Direction.FORWARD)
        else:
            target = _pair(goal, prefix, False) if prefix else goal
            try:
                imp = apply_backward(a, target)
            except PatternMismatch as err:
                raise _Degenerate(str(err)) from err
            open_ = [s for s in dict.fromkeys(imp.assumptions) if not _trivial(s, known)]
            prev = rec.before
            if t == 0 and not open_:
                open_ = [prev]
            if len(open_) != 1 or open_[0] not in (prev, prev.swapped()):
                raise _Degenerate(f"{a.value} does not reduce to the previous core")
            steps.append(ProofStep(a, (NodePath("goal", 0, "lhs", prefix),), None, Mode.BACKWARD))
            goal = open_[0]
            swapped, prefix = goal != prev, ()
        if _pair(goal, prefix, swapped) != rec.before:
            raise _Degenerate("backward replay lost track of the core")
        if (t > 0) == _trivial(goal, known):
            raise _Degenerate("goal becomes trivial too early" if t else "goal not closed")
    return steps


# ---------------------------------------------------------------- theorems

InitialConditions = Union[Sequence[Statement], Callable[[random.Random], Statement]]


def degree0_conditions(variables: Sequence[str] = DEFAULT_VARIABLES) -> list[Statement]:
    return [eq(Var(v), Var(v)) for v in variables]


def generate_theorem(
    initial_conditions: InitialConditions,
    axiom_order: Sequence[AxiomId],
    rng: random.Random,
    max_retries: int = 100,
    variables: Sequence[str] = DEFAULT_VARIABLES,
    trace_out: Optional[list] = None,
) -> Theorem:
    """Run the generation loop for ``axiom_order``; the proof has exactly one step per axiom.

    ``trace_out``, if given, receives the construction trace of the result.
    """
    if not axiom_order:
        raise ValueError("axiom order must be non-empty")
    order = [AxiomId.parse(a) if isinstance(a, str) else a for a in axiom_order]
    for _ in range(max_retries):
        if callable(initial_conditions):
            c0 = initial_conditions(rng)
        else:
            c0 = initial_conditions[rng.randrange(len(initial_conditions))]
        core, premises, trace = c0, [c0], []
        try:
            for a in order:
                core, new, rec = morph(a, core, premises, rng, variables)
                premises.extend(p for p in new if p not in premises)
                trace.append(rec)
            if _trivial(core, frozenset(premises)):
                continue
            proof = synthesize_proof(trace, premises)
        except (MorphFailed, _Degenerate):
            continue
        assert len(proof) == len(order)
        if trace_out is not None:
            trace_out[:] = trace
        return Theorem(core, tuple(premises), tuple(proof), None, c0)
    raise GenerationFailed(f"order {[a.value for a in order]} failed {max_retries} times")


def generate(cfg: GeneratorConfig, index: int = 0, order_source=None, stream: str = "") -> Theorem:
    """Theorem number ``index`` of the run described by ``cfg``.

    ``order_source(rng)`` overrides order sampling (used by split pools).
    """
    seed = derive_seed(cfg.seed, index, stream)
    rng = random.Random(seed)
    if cfg.degree == 0:
        initial: InitialConditions = degree0_conditions(cfg.variables)
    else:
        initial = lambda r: sample_initial_condition(cfg.degree, r, cfg.variables)  # noqa: E731
    for _ in range(max(1, cfg.max_retries) * 10):
        if order_source is None:
            order = sample_axiom_order(cfg.k, cfg.l, cfg.axiom_set, rng, degree=cfg.degree)
        else:
            order = list(order_source(rng))
        try:
            thm = generate_theorem(initial, order, rng, cfg.order_retries, cfg.variables)
        except GenerationFailed:
            continue
        meta = TheoremMeta(len(set(order)), len(order), cfg.degree, tuple(order), seed, cfg.axiom_set)
        return Theorem(thm.goal, thm.premises, thm.proof, meta, thm.initial_condition)
    raise GenerationFailed(f"no generable order for {cfg}")


def generate_many(cfg: GeneratorConfig, n: int, start: int = 0) -> Iterator[Theorem]:
    for i in range(start, start + n):
        yield generate(cfg, i)
