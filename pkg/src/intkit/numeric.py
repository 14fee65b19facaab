"""Numeric truth oracle: find rational assignments satisfying a theorem's
premises and check that its goal holds under them.

Equality premises are solved by isolating a variable that occurs exactly
once (through +, *, -, 1/), substituting the solution into the remaining
premises. The free variables are then sampled at random and inequality or
non-zero premises are enforced by rejection.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DivisionByZero
from .expr import (
    DEFAULT_VARIABLES,
    Add,
    Entity,
    Inv,
    Mul,
    Neg,
    Rel,
    Sqr,
    Statement,
    Var,
    eval_numeric,
    holds,
    iter_nodes,
    variables_of,
)
from .proof import Theorem


def substitute_vars(e: Entity, solution: dict[str, Entity]) -> Entity:
    if type(e) is Var:
        return solution.get(e.name, e)
    if e.arity == 0:
        return e
    return e.with_children([substitute_vars(c, solution) for c in e.children])


def _occurrences(e: Entity, name: str) -> int:
    return sum(1 for _, n in iter_nodes(e) if type(n) is Var and n.name == name)


def _isolate(side: Entity, other: Entity, name: str) -> Optional[Entity]:
    """Solve ``side = other`` for the single occurrence of ``name`` in ``side``."""
    target = other
    node = side
    while not (type(node) is Var and node.name == name):
        t = type(node)
        if t is Add or t is Mul:
            left_has = _occurrences(node.left, name) > 0
            inner, rest = (node.left, node.right) if left_has else (node.right, node.left)
            target = Add(target, Neg(rest)) if t is Add else Mul(target, Inv(rest))
            node = inner
        elif t is Neg:
            target, node = Neg(target), node.child
        elif t is Inv:
            target, node = Inv(target), node.child
        else:
            return None  # squares are not invertible over the rationals
    return target


def solve_equalities(equalities: Sequence[Statement]) -> Optional[dict[str, Entity]]:
    """Triangular solution {var: expression in free vars}, or None if some
    equality cannot be solved by isolation."""
    solution: dict[str, Entity] = {}
    for s in equalities:
        lhs = substitute_vars(s.lhs, solution)
        rhs = substitute_vars(s.rhs, solution)
        if lhs == rhs:
            continue
        names = sorted(variables_of(lhs) | variables_of(rhs))
        solved = None
        for name in names:
            nl, nr = _occurrences(lhs, name), _occurrences(rhs, name)
            if nl + nr != 1:
                continue
            solved = _isolate(lhs, rhs, name) if nl else _isolate(rhs, lhs, name)
            if solved is not None:
                break
        if solved is None:
            if _identity(lhs, rhs):
                continue
            return None
        solution = {k: substitute_vars(v, {name: solved}) for k, v in solution.items()}
        solution[name] = solved
    return solution


_ID_RNG = random.Random(0x5EED)
_ID_POINTS = [
    {v: Fraction(_ID_RNG.randint(-50, 50), _ID_RNG.randint(1, 40)) for v in "abcdefghijklmnopqrstuvwxyz"}
    for _ in range(5)
]


def _identity(lhs: Entity, rhs: Entity) -> bool:
    """lhs = rhs at every probe point where both are defined."""
    checked = 0
    for point in _ID_POINTS:
        try:
            if eval_numeric(lhs, point) != eval_numeric(rhs, point):
                return False
            checked += 1
        except DivisionByZero:
            continue
    return checked > 0


def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-20, 20), rng.randint(1, 6))


def _to_sympy(e: Entity, sp, syms):
    t = type(e)
    if t is Var:
        return syms[e.name]
    if t is Add:
        return _to_sympy(e.left, sp, syms) + _to_sympy(e.right, sp, syms)
    if t is Mul:
        return _to_sympy(e.left, sp, syms) * _to_sympy(e.right, sp, syms)
    if t is Neg:
        return -_to_sympy(e.child, sp, syms)
    if t is Inv:
        return 1 / _to_sympy(e.child, sp, syms)
    if t is Sqr:
        return _to_sympy(e.child, sp, syms) ** 2
    return sp.Integer(e.value)


class EqualitySolver:
    """Parametrizes the solutions of a set of equality premises.

    Isolation handles the common case; systems it cannot untangle go to
    sympy, keeping only branches with rational values.
    """

    def __init__(self, equalities: Sequence[Statement]):
        self.branches: list[dict] = []
        self.kind = "isolation"
        solution = solve_equalities(equalities)
        if solution is not None:
            self.branches = [solution]
            return
        self.kind = "sympy"
        import sympy as sp

        names = sorted(set().union(*(variables_of(s) for s in equalities)))
        syms = {n: sp.Symbol(n) for n in names}
        exprs = [sp.together(_to_sympy(s.lhs, sp, syms) - _to_sympy(s.rhs, sp, syms)) for s in equalities]
        try:
            solutions = sp.solve([sp.numer(x) for x in exprs], list(syms.values()), dict=True)
        except NotImplementedError:
            solutions = []
        self._sp = sp
        self.branches = [{str(k): v for k, v in sol.items()} for sol in solutions]

    @property
    def solvable(self) -> bool:
        return bool(self.branches)

    def draw(self, rng: random.Random, names: set[str]) -> Optional[dict[str, Fraction]]:
        branch = self.branches[rng.randrange(len(self.branches))]
        point = {v: random_rational(rng) for v in sorted(names - set(branch))}
        if self.kind == "isolation":
            for name, expr in branch.items():
                point[name] = eval_numeric(expr, point)
            return point
        sp = self._sp
        subs = {sp.Symbol(k): sp.Rational(v.numerator, v.denominator) for k, v in point.items()}
        for name, expr in branch.items():
            value = sp.nsimplify(expr.subs(subs)) if expr.free_symbols - set(subs) == set() else None
            if value is None or not value.is_Rational:
                return None
            point[name] = Fraction(int(value.p), int(value.q))
        return point


@dataclass
class NumericReport:
    trials: int = 0
    held: int = 0
    failed: int = 0
    unsolvable: bool = False
    counterexample: Optional[dict] = None


def sample_assignment(
    premises: Sequence[Statement],
    rng: random.Random,
    extra: Sequence[Statement] = (),
    variables: Sequence[str] = DEFAULT_VARIABLES,
    max_tries: int = 2000,
    solver: Optional[EqualitySolver] = None,
) -> Optional[dict[str, Fraction]]:
    """Assignment satisfying every premise, under which both sides of every
    statement in ``extra`` are defined; None if none was found."""
    if solver is None:
        solver = EqualitySolver([p for p in premises if p.rel is Rel.EQ])
    if not solver.solvable:
        return None
    names = set(variables)
    for s in list(premises) + list(extra):
        names |= variables_of(s)
    for _ in range(max_tries):
        try:
            point = solver.draw(rng, names)
            if point is None or not all(holds(p, point) for p in premises):
                continue
            for s in extra:
                eval_numeric(s.lhs, point)
                eval_numeric(s.rhs, point)
        except DivisionByZero:
            continue
        return point
    return None


def check_theorem(theorem: Theorem, n: int, rng: random.Random, variables=DEFAULT_VARIABLES) -> NumericReport:
    """Evaluate the goal under ``n`` assignments satisfying the premises."""
    report = NumericReport()
    solver = EqualitySolver([p for p in theorem.premises if p.rel is Rel.EQ])
    for _ in range(n):
        point = sample_assignment(theorem.premises, rng, [theorem.goal], variables, solver=solver)
        if point is None:
            report.unsolvable = True
            return report
        report.trials += 1
        if holds(theorem.goal, point):
            report.held += 1
        else:
            report.failed += 1
            report.counterexample = {k: str(v) for k, v in point.items()}
    return report
