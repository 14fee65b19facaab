"""The 18-axiom calculus.

Three views of each axiom:

* implicational schema ``assumptions -> conclusions`` (used by the kernel),
* transformation rule ``L -> R`` on a single node (the 11 rewrite axioms),
* extension function that wraps a core statement into a larger one and may
  emit new premises (used by the generator).

AS and MS are both rewrites and implications. A step on them with a
direction is a rewrite; a step with no direction is the implication.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (
    ArityMismatch,
    CoreFormMismatch,
    EmptyPool,
    NotATransformAxiom,
    PatternMismatch,
)
from .expr import (
    ONE,
    ZERO,
    Add,
    Const,
    Entity,
    Inv,
    Mul,
    Neg,
    Rel,
    Sqr,
    Statement,
    Var,
    eq,
    geq,
    leq,
    nonzero,
)


class AxiomId(str, enum.Enum):
    AC = "AC"
    AA = "AA"
    AS = "AS"
    MC = "MC"
    MA = "MA"
    MS = "MS"
    AMLD = "AMLD"
    AMRD = "AMRD"
    SD = "SD"
    MO = "MO"
    AZ = "AZ"
    POE = "POE"
    EMT = "EMT"
    SGEQZ = "SGEQZ"
    EIDI = "EIDI"
    IMT = "IMT"
    FPOI = "FPOI"
    SPOI = "SPOI"

    @classmethod
    def parse(cls, code: str) -> "AxiomId":
        code = code.strip().upper()
        if code == "FPI":
            return cls.FPOI
        try:
            return cls(code)
        except ValueError:
            raise PatternMismatch(f"unknown axiom {code!r}") from None

    @property
    def index(self) -> int:
        return AXIOM_INDEX[self]


ALL_AXIOMS: tuple[AxiomId, ...] = tuple(AxiomId)
AXIOM_INDEX = {a: i for i, a in enumerate(ALL_AXIOMS)}
FIELD_AXIOMS: tuple[AxiomId, ...] = ALL_AXIOMS[:13]
ORDERED_FIELD_AXIOMS = ALL_AXIOMS
AXIOM_SETS = {"field": FIELD_AXIOMS, "ordered-field": ORDERED_FIELD_AXIOMS}


class Direction(str, enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"
    # Reverse rewrite producing the constant-first variant (0+x, 1*x); AZ and MO only.
    REVERSE_LEFT = "reverse_left"


class Mode(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class PVar(Entity):
    """Pattern variable; only appears inside rule templates."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("p", name))
        self._text = "?" + name

    def __eq__(self, other):
        return type(other) is PVar and other.name == self.name

    __hash__ = Entity.__hash__

    def _render(self):
        return self._text


X1, X2, X3 = PVar("x1"), PVar("x2"), PVar("x3")
A, B, C, D = PVar("a"), PVar("b"), PVar("c"), PVar("d")

Binding = dict  # PVar name -> Entity

# Transformation rules: (variants of L, R).
TRANSFORM_RULES: dict[AxiomId, tuple[tuple[Entity, ...], Entity]] = {
    AxiomId.AC: ((Add(X1, X2),), Add(X2, X1)),
    AxiomId.AA: ((Add(X1, Add(X2, X3)),), Add(Add(X1, X2), X3)),
    AxiomId.AS: ((Add(X1, Neg(X1)),), ZERO),
    AxiomId.MC: ((Mul(X1, X2),), Mul(X2, X1)),
    AxiomId.MA: ((Mul(X1, Mul(X2, X3)),), Mul(Mul(X1, X2), X3)),
    AxiomId.MS: ((Mul(X1, Inv(X1)),), ONE),
    AxiomId.AMLD: ((Mul(Add(X1, X2), X3),), Add(Mul(X1, X3), Mul(X2, X3))),
    AxiomId.AMRD: ((Mul(X1, Add(X2, X3)),), Add(Mul(X1, X2), Mul(X1, X3))),
    AxiomId.SD: ((Sqr(X1),), Mul(X1, X1)),
    AxiomId.MO: ((Mul(X1, ONE), Mul(ONE, X1)), X1),
    AxiomId.AZ: ((Add(X1, ZERO), Add(ZERO, X1)), X1),
}

TRANSFORM_AXIOMS = frozenset(TRANSFORM_RULES)


@dataclass(frozen=True)
class Rule:
    assumptions: tuple[Statement, ...]
    conclusions: tuple[Statement, ...]
    # How many leading assumptions are supplied as arguments in forward mode.
    n_args: int


IMPLICATION_RULES: dict[AxiomId, Rule] = {
    AxiomId.AS: Rule((eq(A, B),), (eq(Add(A, Neg(B)), ZERO),), 1),
    AxiomId.MS: Rule((eq(A, B), nonzero(A)), (eq(ONE, Mul(A, Inv(B))),), 1),
    AxiomId.POE: Rule((eq(A, B), eq(C, D)), (eq(Add(A, C), Add(B, D)),), 2),
    AxiomId.EMT: Rule((eq(Add(A, B), C),), (eq(A, Add(C, Neg(B))),), 1),
    AxiomId.SGEQZ: Rule((eq(A, B),), (geq(Mul(A, B), ZERO),), 1),
    AxiomId.EIDI: Rule((eq(A, B),), (geq(A, B), leq(A, B)), 1),
    AxiomId.IMT: Rule((geq(Add(A, B), C),), (geq(A, Add(C, Neg(B))),), 1),
    AxiomId.FPOI: Rule((geq(A, B), geq(C, D)), (geq(Add(A, C), Add(B, D)),), 2),
    AxiomId.SPOI: Rule((geq(A, B), geq(C, ZERO)), (geq(Mul(A, C), Mul(B, C)),), 2),
}


@dataclass(frozen=True)
class AxiomSpec:
    id: AxiomId
    arity: int
    argument_roles: tuple[str, ...]
    has_transformation: bool
    extension_core_form: str  # "equality" | "inequality" | "none"
    bidirectional: bool


def _spec(a: AxiomId) -> AxiomSpec:
    transform = a in TRANSFORM_RULES
    if a in (AxiomId.AS, AxiomId.MS):
        roles = ("node-to-rewrite", "x1-source-node")
    elif transform:
        roles = ("node-to-rewrite",)
    else:
        roles = ("fact-root",) * IMPLICATION_RULES[a].n_args
    form = "inequality" if a in (AxiomId.IMT, AxiomId.FPOI, AxiomId.SPOI) else "equality"
    return AxiomSpec(a, len(roles), roles, transform, form, transform)


AXIOM_SPECS: dict[AxiomId, AxiomSpec] = {a: _spec(a) for a in ALL_AXIOMS}


@dataclass(frozen=True)
class Implication:
    assumptions: tuple[Statement, ...]
    conclusions: tuple[Statement, ...]


def is_rewrite(axiom: AxiomId, direction: Optional[Direction]) -> bool:
    """Whether a step on ``axiom`` with ``direction`` acts as a node rewrite."""
    if axiom not in TRANSFORM_RULES:
        return False
    return direction is not None or axiom not in IMPLICATION_RULES


def arg_count(axiom: AxiomId, direction: Optional[Direction], mode: Mode) -> int:
    if is_rewrite(axiom, direction):
        if axiom in (AxiomId.AS, AxiomId.MS) and direction is not Direction.FORWARD:
            return 2
        return 1
    if mode is Mode.BACKWARD:
        return 1
    return IMPLICATION_RULES[axiom].n_args


# ---------------------------------------------------------------- matching


def match(pattern: Entity, node: Entity, binding: Binding) -> bool:
    """Extend ``binding`` so that ``pattern`` instantiates to ``node``."""
    tp = type(pattern)
    if tp is PVar:
        bound = binding.get(pattern.name)
        if bound is None:
            binding[pattern.name] = node
            return True
        return bound == node
    if tp is not type(node):
        return False
    if tp is Const:
        return pattern.value == node.value
    if tp is Var:
        return pattern.name == node.name
    return all(match(p, n, binding) for p, n in zip(pattern.children, node.children))


def substitute(pattern: Entity, binding: Binding) -> Entity:
    tp = type(pattern)
    if tp is PVar:
        try:
            return binding[pattern.name]
        except KeyError:
            raise ArityMismatch(f"pattern slot {pattern.name} is unbound") from None
    if pattern.arity == 0:
        return pattern
    return pattern.with_children([substitute(c, binding) for c in pattern.children])


def match_statement(pattern: Statement, s: Statement, binding: Binding) -> bool:
    if pattern.rel is not s.rel:
        return False
    trial = dict(binding)
    if match(pattern.lhs, s.lhs, trial) and match(pattern.rhs, s.rhs, trial):
        binding.clear()
        binding.update(trial)
        return True
    return False


def substitute_statement(pattern: Statement, binding: Binding) -> Statement:
    return Statement(pattern.rel, substitute(pattern.lhs, binding), substitute(pattern.rhs, binding))


# ---------------------------------------------------------------- transformations


def _rule(axiom: AxiomId):
    try:
        return TRANSFORM_RULES[axiom]
    except KeyError:
        raise NotATransformAxiom(f"{axiom.value} has no transformation rule") from None


def match_transform(axiom: AxiomId, node: Entity, direction: Direction = Direction.FORWARD) -> Optional[Binding]:
    """Binding if ``node`` matches L (forward) or R (reverse) of ``axiom``."""
    variants, rhs = _rule(axiom)
    if direction is Direction.FORWARD:
        for lhs in variants:
            binding: Binding = {}
            if match(lhs, node, binding):
                return binding
        return None
    if direction is Direction.REVERSE_LEFT and len(variants) < 2:
        return None
    binding = {}
    return binding if match(rhs, node, binding) else None


def forward_variant(axiom: AxiomId, node: Entity) -> Optional[int]:
    """Index of the first L variant matching ``node`` (0 or 1), if any."""
    for i, lhs in enumerate(_rule(axiom)[0]):
        if type(lhs) is type(node) and match(lhs, node, {}):
            return i
    return None


def rewrite(
    axiom: AxiomId,
    node: Entity,
    direction: Direction = Direction.FORWARD,
    x1: Optional[Entity] = None,
) -> Entity:
    """Rewrite ``node`` L->R (forward) or R->L (reverse).

    Reverse AS/MS rewrites turn a constant into ``x1+(-x1)`` / ``x1*(1/x1)``
    and need ``x1`` supplied explicitly.
    """
    binding = match_transform(axiom, node, direction)
    if binding is None:
        raise PatternMismatch(f"{axiom.value} ({direction.value}) does not match {node}")
    variants, rhs = TRANSFORM_RULES[axiom]
    if direction is Direction.FORWARD:
        return substitute(rhs, binding)
    if axiom in (AxiomId.AS, AxiomId.MS):
        if x1 is None:
            raise ArityMismatch(f"reverse {axiom.value} needs an x1 argument")
        binding["x1"] = x1
    target = variants[1] if direction is Direction.REVERSE_LEFT else variants[0]
    return substitute(target, binding)


# ---------------------------------------------------------------- implications


def _rule_for(axiom: AxiomId) -> Rule:
    try:
        return IMPLICATION_RULES[axiom]
    except KeyError:
        raise PatternMismatch(f"{axiom.value} has no implicational form") from None


def _instantiate(rule: Rule, binding: Binding) -> Implication:
    return Implication(
        tuple(substitute_statement(s, binding) for s in rule.assumptions),
        tuple(substitute_statement(s, binding) for s in rule.conclusions),
    )


def apply_forward(axiom: AxiomId, args: Sequence, direction: Optional[Direction] = None) -> Implication:
    """Instantiate an axiom from its arguments.

    Rewrites take one entity (two for reverse AS/MS: the node and x1) and
    yield ``node = node'``. Implications take their argument statements; an
    equality argument that fails to match as written is tried swapped.
    """
    if is_rewrite(axiom, direction):
        d = direction or Direction.FORWARD
        need = arg_count(axiom, d, Mode.FORWARD)
        if len(args) != need:
            raise ArityMismatch(f"{axiom.value} takes {need} argument(s), got {len(args)}")
        if not all(isinstance(x, Entity) for x in args):
            raise PatternMismatch(f"{axiom.value} rewrites take entity arguments")
        node = args[0]
        new = rewrite(axiom, node, d, args[1] if need == 2 else None)
        return Implication((), (eq(node, new),))
    rule = _rule_for(axiom)
    if len(args) != rule.n_args:
        raise ArityMismatch(f"{axiom.value} takes {rule.n_args} argument(s), got {len(args)}")
    if not all(isinstance(s, Statement) for s in args):
        raise PatternMismatch(f"{axiom.value} takes statement arguments")
    binding: Binding = {}
    if not _match_args(rule.assumptions[: rule.n_args], list(args), binding):
        raise PatternMismatch(f"{axiom.value} does not apply to {', '.join(map(str, args))}")
    return _instantiate(rule, binding)


def _match_args(patterns, args, binding: Binding) -> bool:
    if not patterns:
        return True
    p, s = patterns[0], args[0]
    options = [s, s.swapped()] if s.rel is Rel.EQ and s.lhs != s.rhs else [s]
    for cand in options:
        trial = dict(binding)
        if match_statement(p, cand, trial) and _match_args(patterns[1:], args[1:], trial):
            binding.clear()
            binding.update(trial)
            return True
    return False


def apply_backward(axiom: AxiomId, target: Statement) -> Implication:
    """Instantiate an implicational axiom so that one conclusion is ``target``
    (or its mirror image, for equalities)."""
    rule = _rule_for(axiom)
    options = [target, target.swapped()] if target.rel is Rel.EQ else [target]
    for cand in options:
        for concl in rule.conclusions:
            binding: Binding = {}
            if match_statement(concl, cand, binding):
                return _instantiate(rule, binding)
    raise PatternMismatch(f"no conclusion of {axiom.value} matches {target}")


# ---------------------------------------------------------------- extensions


def _pick(pool: Sequence[Entity], rng: random.Random) -> Entity:
    if not pool:
        raise EmptyPool("extension needs at least one node to sample")
    return pool[rng.randrange(len(pool))]


def extend(
    axiom: AxiomId, core: Statement, pool: Sequence[Entity], rng: random.Random
) -> tuple[Statement, tuple[Statement, ...]]:
    """Wrap ``core`` into a larger statement that follows from it.

    Sampled nodes are drawn uniformly with replacement from ``pool``.
    Returns ``(new_core, new_premises)``.
    """
    L, R = core.lhs, core.rhs
    ineq = axiom in (AxiomId.IMT, AxiomId.FPOI, AxiomId.SPOI)
    want = Rel.GEQ if ineq else Rel.EQ
    if core.rel is not want:
        raise CoreFormMismatch(f"{axiom.value} extends {want.name} cores, got {core}")
    match axiom:
        case AxiomId.AC:
            n = _pick(pool, rng)
            return eq(Add(R, n), Add(n, L)), ()
        case AxiomId.AA:
            n1, n2 = _pick(pool, rng), _pick(pool, rng)
            return eq(Add(R, Add(n1, n2)), Add(Add(L, n1), n2)), ()
        case AxiomId.AS:
            return eq(ZERO, Add(L, Neg(R))), ()
        case AxiomId.MC:
            n = _pick(pool, rng)
            return eq(Mul(R, n), Mul(n, L)), ()
        case AxiomId.MA:
            n1, n2 = _pick(pool, rng), _pick(pool, rng)
            return eq(Mul(R, Mul(n1, n2)), Mul(Mul(L, n1), n2)), ()
        case AxiomId.MS:
            # The implication behind this row needs L != 0; it is emitted as a premise.
            return eq(ONE, Mul(L, Inv(R))), (nonzero(L),)
        case AxiomId.AMLD:
            n1, n2 = _pick(pool, rng), _pick(pool, rng)
            return eq(Mul(Add(n1, n2), R), Add(Mul(n1, L), Mul(n2, L))), ()
        case AxiomId.AMRD:
            n1, n2 = _pick(pool, rng), _pick(pool, rng)
            return eq(Mul(R, Add(n1, n2)), Add(Mul(L, n1), Mul(L, n2))), ()
        case AxiomId.SD:
            return eq(Mul(L, R), Sqr(L)), ()
        case AxiomId.MO:
            return rng.choice([eq(Mul(L, ONE), R), eq(Mul(ONE, L), R)]), ()
        case AxiomId.AZ:
            return rng.choice([eq(Add(L, ZERO), R), eq(Add(ZERO, L), R)]), ()
        case AxiomId.POE:
            n1, n2 = _pick(pool, rng), _pick(pool, rng)
            return eq(Add(L, n1), Add(R, n2)), (eq(n1, n2),)
        case AxiomId.EMT:
            if type(L) is not Add:
                raise CoreFormMismatch(f"EMT needs a left side of the form x+y, got {L}")
            return eq(L.left, Add(R, Neg(L.right))), ()
        case AxiomId.SGEQZ:
            return geq(Mul(L, R), ZERO), ()
        case AxiomId.EIDI:
            return geq(L, R), ()
        case AxiomId.IMT:
            if type(L) is not Add:
                raise CoreFormMismatch(f"IMT needs a left side of the form x+y, got {L}")
            return geq(L.left, Add(R, Neg(L.right))), ()
        case AxiomId.FPOI:
            n1, n2 = _pick(pool, rng), _pick(pool, rng)
            return geq(Add(L, n1), Add(R, n2)), (geq(n1, n2),)
        case AxiomId.SPOI:
            n = _pick(pool, rng)
            return geq(Mul(L, n), Mul(R, n)), (geq(n, ZERO),)
    raise CoreFormMismatch(f"{axiom.value} has no extension")  # pragma: no cover
