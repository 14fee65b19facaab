"""Term algebra: entities, statements, canonical text, node addressing, evaluation.

Canonical grammar (whitespace-insensitive)::

    entity    := var | "0" | "1"
               | "(" entity "+" entity ")" | "(" entity "*" entity ")"
               | "(-" entity ")" | "(1/" entity ")" | "(" entity "^2)"
    statement := entity ("=" | ">=" | "<=" | "!=") entity

``!=`` only appears in non-zero side conditions.
"""

from __future__ import annotations

import enum
import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

from .errors import DivisionByZero, InvalidPath, ParseError, UnassignedVariable

DEFAULT_VARIABLES: tuple[str, ...] = ("a", "b", "c", "d", "e")


class Entity:
    """Immutable expression tree node. Equality is structural."""

    __slots__ = ("_hash", "_text")
    arity = 0

    @property
    def children(self) -> tuple["Entity", ...]:
        return ()

    def with_children(self, children: Sequence["Entity"]) -> "Entity":
        return self

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        text = self._text
        if text is None:
            text = self._text = self._render()
        return text

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self}>"

    def _render(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError


class Var(Entity):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("v", name))
        self._text = name

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    __hash__ = Entity.__hash__

    def _render(self) -> str:
        return self.name


class Const(Entity):
    __slots__ = ("value",)

    def __init__(self, value: int):
        if value not in (0, 1):
            raise ValueError(f"only the constants 0 and 1 exist, got {value!r}")
        self.value = value
        self._hash = hash(("k", value))
        self._text = str(value)

    def __eq__(self, other):
        return self is other or (type(other) is Const and other.value == self.value)

    __hash__ = Entity.__hash__

    def _render(self) -> str:
        return str(self.value)


class _Binary(Entity):
    __slots__ = ("left", "right")
    arity = 2
    symbol = "?"

    def __init__(self, left: Entity, right: Entity):
        self.left = left
        self.right = right
        self._hash = hash((self.symbol, left._hash, right._hash))
        self._text = None

    @property
    def children(self):
        return (self.left, self.right)

    def with_children(self, children):
        return type(self)(children[0], children[1])

    def __eq__(self, other):
        return self is other or (
            type(other) is type(self)
            and other._hash == self._hash
            and other.left == self.left
            and other.right == self.right
        )

    __hash__ = Entity.__hash__

    def _render(self) -> str:
        return f"({self.left}{self.symbol}{self.right})"


class _Unary(Entity):
    __slots__ = ("child",)
    arity = 1
    tag = "?"

    def __init__(self, child: Entity):
        self.child = child
        self._hash = hash((self.tag, child._hash))
        self._text = None

    @property
    def children(self):
        return (self.child,)

    def with_children(self, children):
        return type(self)(children[0])

    def __eq__(self, other):
        return self is other or (
            type(other) is type(self) and other._hash == self._hash and other.child == self.child
        )

    __hash__ = Entity.__hash__


class Add(_Binary):
    __slots__ = ()
    symbol = "+"


class Mul(_Binary):
    __slots__ = ()
    symbol = "*"


class Neg(_Unary):
    __slots__ = ()
    tag = "-"

    def _render(self) -> str:
        return f"(-{self.child})"


class Inv(_Unary):
    __slots__ = ()
    tag = "1/"

    def _render(self) -> str:
        return f"(1/{self.child})"


class Sqr(_Unary):
    __slots__ = ()
    tag = "^2"

    def _render(self) -> str:
        return f"({self.child}^2)"


ZERO = Const(0)
ONE = Const(1)


class Rel(str, enum.Enum):
    EQ = "="
    GEQ = ">="
    LEQ = "<="
    NEQ = "!="


class Statement:
    """A relation between two entities."""

    __slots__ = ("rel", "lhs", "rhs", "_hash", "_text")

    def __init__(self, rel: Rel, lhs: Entity, rhs: Entity):
        self.rel = rel
        self.lhs = lhs
        self.rhs = rhs
        self._hash = hash((rel.value, lhs._hash, rhs._hash))
        self._text = None

    def __eq__(self, other):
        return self is other or (
            type(other) is Statement
            and other._hash == self._hash
            and other.rel is self.rel
            and other.lhs == self.lhs
            and other.rhs == self.rhs
        )

    def __hash__(self):
        return self._hash

    def __str__(self):
        if self._text is None:
            self._text = f"{self.lhs}{self.rel.value}{self.rhs}"
        return self._text

    def __repr__(self):
        return f"<Statement {self}>"

    def side(self, side: str) -> Entity:
        if side == "lhs":
            return self.lhs
        if side == "rhs":
            return self.rhs
        raise InvalidPath(f"unknown side {side!r}")

    def swapped(self) -> "Statement":
        return Statement(self.rel, self.rhs, self.lhs)


def eq(lhs: Entity, rhs: Entity) -> Statement:
    return Statement(Rel.EQ, lhs, rhs)


def geq(lhs: Entity, rhs: Entity) -> Statement:
    return Statement(Rel.GEQ, lhs, rhs)


def leq(lhs: Entity, rhs: Entity) -> Statement:
    return Statement(Rel.LEQ, lhs, rhs)


def nonzero(e: Entity) -> Statement:
    return Statement(Rel.NEQ, e, ZERO)


def degree(e: Entity) -> int:
    """Number of operators (+, *, -, 1/, ^2) in ``e``."""
    if e.arity == 0:
        return 0
    return 1 + sum(degree(c) for c in e.children)


def size(e: Entity) -> int:
    return 1 + sum(size(c) for c in e.children)


def to_text(obj: Union[Entity, Statement]) -> str:
    return str(obj)


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(>=|<=|!=|[A-Za-z_][A-Za-z0-9_]*|[()+*\-/^=012])")
_RELS = {"=": Rel.EQ, ">=": Rel.GEQ, "<=": Rel.LEQ, "!=": Rel.NEQ}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", pos, {"token"})
            self.tokens.append((m.group(1), m.start(1)))
            pos = m.end()
        self.i = 0

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.tokens[j][0] if j < len(self.tokens) else None

    def offset(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            self.fail({tok})
        self.i += 1

    def fail(self, expected: set[str]):
        got = self.peek()
        what = "end of input" if got is None else repr(got)
        raise ParseError(f"expected one of {sorted(expected)}, got {what}", self.offset(), expected)

    def entity(self) -> Entity:
        tok = self.peek()
        if tok is None:
            self.fail({"(", "variable", "0", "1"})
        if tok == "(":
            self.i += 1
            if self.peek() == "-":
                self.i += 1
                child = self.entity()
                self.expect(")")
                return Neg(child)
            if self.peek() == "1" and self.peek(1) == "/":
                self.i += 2
                child = self.entity()
                self.expect(")")
                return Inv(child)
            left = self.entity()
            op = self.peek()
            if op == "^":
                self.i += 1
                self.expect("2")
                self.expect(")")
                return Sqr(left)
            if op not in ("+", "*"):
                self.fail({"+", "*", "^"})
            self.i += 1
            right = self.entity()
            self.expect(")")
            return Add(left, right) if op == "+" else Mul(left, right)
        if tok in ("0", "1"):
            self.i += 1
            return ZERO if tok == "0" else ONE
        if tok[0].isalpha() or tok[0] == "_":
            self.i += 1
            return Var(tok)
        self.fail({"(", "variable", "0", "1"})


def parse(text: str) -> Union[Entity, Statement]:
    """Parse canonical text into an Entity or a Statement."""
    p = _Parser(text)
    lhs = p.entity()
    tok = p.peek()
    if tok is None:
        return lhs
    if tok not in _RELS:
        p.fail(set(_RELS))
    p.i += 1
    rhs = p.entity()
    if p.peek() is not None:
        p.fail({"end of input"})
    return Statement(_RELS[tok], lhs, rhs)


def parse_statement(text: str) -> Statement:
    result = parse(text)
    if not isinstance(result, Statement):
        raise ParseError("expected a statement, got an entity", len(text), set(_RELS))
    return result


def parse_entity(text: str) -> Entity:
    result = parse(text)
    if not isinstance(result, Entity):
        raise ParseError("expected an entity, got a statement", 0, {"entity"})
    return result


# ---------------------------------------------------------------- addressing

ROLES = ("goal", "premise", "fact")
_PATH_RE = re.compile(r"^(goal|premise|fact)\[(\d+)\]\.(lhs|rhs)/([01]*)$")


@dataclass(frozen=True)
class NodePath:
    """Position of an entity node: statement (role, index), side, child indices."""

    role: str
    index: int
    side: str
    path: tuple[int, ...] = ()

    def __str__(self) -> str:
        return f"{self.role}[{self.index}].{self.side}/{''.join(map(str, self.path))}"

    @classmethod
    def parse(cls, text: str) -> "NodePath":
        m = _PATH_RE.match(text.strip())
        if m is None:
            raise ParseError(f"malformed node path {text!r}", 0, {"role[index].side/path"})
        return cls(m.group(1), int(m.group(2)), m.group(3), tuple(int(c) for c in m.group(4)))

    def child(self, i: int) -> "NodePath":
        return NodePath(self.role, self.index, self.side, self.path + (i,))


def iter_nodes(e: Entity, prefix: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Entity]]:
    """Pre-order walk yielding (path, subterm)."""
    stack = [(prefix, e)]
    while stack:
        path, node = stack.pop()
        yield path, node
        kids = node.children
        for i in range(len(kids) - 1, -1, -1):
            stack.append((path + (i,), kids[i]))


def subterm(e: Entity, path: Sequence[int]) -> Entity:
    node = e
    for i in path:
        kids = node.children
        if not 0 <= i < len(kids):
            raise InvalidPath(f"child index {i} out of range at {node}")
        node = kids[i]
    return node


def replace_at(e: Entity, path: Sequence[int], new: Entity) -> Entity:
    if not path:
        return new
    kids = list(e.children)
    i = path[0]
    if not 0 <= i < len(kids):
        raise InvalidPath(f"child index {i} out of range at {e}")
    kids[i] = replace_at(kids[i], path[1:], new)
    return e.with_children(kids)


def _statements(scope, role: str) -> Sequence[Statement]:
    if isinstance(scope, Statement):
        if role != "goal":
            raise InvalidPath(f"a bare statement has no {role}s")
        return (scope,)
    if role == "goal":
        return scope.goals
    if role == "premise":
        return scope.premises
    if role == "fact":
        return scope.facts
    raise InvalidPath(f"unknown role {role!r}")


def statement_at(path: NodePath, scope) -> Statement:
    stmts = _statements(scope, path.role)
    if not 0 <= path.index < len(stmts):
        raise InvalidPath(f"{path.role} index {path.index} out of range")
    return stmts[path.index]


def resolve(path: NodePath, scope) -> Entity:
    """Entity addressed by ``path`` in a proof state (or a bare statement as goal 0)."""
    return subterm(statement_at(path, scope).side(path.side), path.path)


def replace(path: NodePath, scope, new: Entity) -> Statement:
    """Copy of the addressed statement with the node at ``path`` replaced."""
    s = statement_at(path, scope)
    if path.side == "lhs":
        return Statement(s.rel, replace_at(s.lhs, path.path, new), s.rhs)
    if path.side == "rhs":
        return Statement(s.rel, s.lhs, replace_at(s.rhs, path.path, new))
    raise InvalidPath(f"unknown side {path.side!r}")


def statement_nodes(s: Statement, role: str = "goal", index: int = 0) -> list[tuple[NodePath, Entity]]:
    out = []
    for side, root in (("lhs", s.lhs), ("rhs", s.rhs)):
        for p, node in iter_nodes(root):
            out.append((NodePath(role, index, side, p), node))
    return out


def enumerate_nodes(scope) -> list[tuple[NodePath, Entity]]:
    """Every entity node in scope: goals, then premises, then facts; lhs before rhs."""
    if isinstance(scope, Statement):
        return statement_nodes(scope)
    out = []
    for role in ROLES:
        for i, s in enumerate(_statements(scope, role)):
            out.extend(statement_nodes(s, role, i))
    return out


def count_nodes(scope) -> int:
    if isinstance(scope, Statement):
        return size(scope.lhs) + size(scope.rhs)
    return sum(size(s.lhs) + size(s.rhs) for role in ROLES for s in _statements(scope, role))


# ---------------------------------------------------------------- evaluation


def eval_numeric(e: Entity, assignment: Mapping[str, Fraction]) -> Fraction:
    """Exact rational value of ``e``; raises DivisionByZero / UnassignedVariable."""
    t = type(e)
    if t is Var:
        try:
            return Fraction(assignment[e.name])
        except KeyError:
            raise UnassignedVariable(e.name) from None
    if t is Const:
        return Fraction(e.value)
    if t is Add:
        return eval_numeric(e.left, assignment) + eval_numeric(e.right, assignment)
    if t is Mul:
        return eval_numeric(e.left, assignment) * eval_numeric(e.right, assignment)
    if t is Neg:
        return -eval_numeric(e.child, assignment)
    if t is Sqr:
        v = eval_numeric(e.child, assignment)
        return v * v
    if t is Inv:
        v = eval_numeric(e.child, assignment)
        if v == 0:
            raise DivisionByZero(f"{e.child} evaluates to 0")
        return 1 / v
    raise TypeError(f"cannot evaluate {e!r}")


def holds(s: Statement, assignment: Mapping[str, Fraction]) -> bool:
    lv = eval_numeric(s.lhs, assignment)
    rv = eval_numeric(s.rhs, assignment)
    if s.rel is Rel.EQ:
        return lv == rv
    if s.rel is Rel.GEQ:
        return lv >= rv
    if s.rel is Rel.LEQ:
        return lv <= rv
    return lv != rv


def variables_of(obj) -> set[str]:
    if isinstance(obj, Statement):
        return variables_of(obj.lhs) | variables_of(obj.rhs)
    return {n.name for _, n in iter_nodes(obj) if type(n) is Var}


# ---------------------------------------------------------------- random terms

_UNARY = (Neg, Inv, Sqr)
_BINARY = (Add, Mul)


def random_entity(
    rng: random.Random,
    degree: int,
    variables: Sequence[str] = DEFAULT_VARIABLES,
    constants: bool = True,
) -> Entity:
    """Random entity with exactly ``degree`` operators (not uniform; for testing)."""
    if degree == 0:
        if constants and rng.random() < 0.25:
            return ZERO if rng.random() < 0.5 else ONE
        return Var(rng.choice(variables))
    if rng.random() < 0.4:
        return rng.choice(_UNARY)(random_entity(rng, degree - 1, variables, constants))
    left = rng.randrange(degree)
    return rng.choice(_BINARY)(
        random_entity(rng, left, variables, constants),
        random_entity(rng, degree - 1 - left, variables, constants),
    )
