"""Proof steps and theorems, plus their JSON-friendly forms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .axioms import AxiomId, Direction, Mode
from .expr import NodePath, Statement, parse_statement


@dataclass(frozen=True)
class ProofStep:
    axiom: AxiomId
    args: tuple[NodePath, ...]
    direction: Optional[Direction] = None
    mode: Mode = Mode.FORWARD

    def to_json(self) -> dict:
        return {
            "axiom": self.axiom.value,
            "args": [str(p) for p in self.args],
            "direction": self.direction.value if self.direction else None,
            "mode": self.mode.value,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ProofStep":
        direction = obj.get("direction")
        return cls(
            AxiomId.parse(obj["axiom"]),
            tuple(NodePath.parse(p) for p in obj.get("args", ())),
            Direction(direction) if direction else None,
            Mode(obj.get("mode") or "forward"),
        )

    def __str__(self) -> str:
        extra = f" {self.direction.value}" if self.direction else f" {self.mode.value}"
        return f"{self.axiom.value}{extra} [{', '.join(map(str, self.args))}]"


@dataclass(frozen=True)
class TheoremMeta:
    k: int
    l: int
    degree: int
    axiom_order: tuple[AxiomId, ...]
    seed: int
    axiom_set: str = "ordered-field"


@dataclass(frozen=True)
class Theorem:
    goal: Statement
    premises: tuple[Statement, ...] = ()
    proof: Optional[tuple[ProofStep, ...]] = None
    meta: Optional[TheoremMeta] = None
    # The seed statement X=X; listed among the premises but trivial.
    initial_condition: Optional[Statement] = field(default=None, compare=False)

    @classmethod
    def of(cls, goal: str, premises: tuple[str, ...] = ()) -> "Theorem":
        return cls(parse_statement(goal), tuple(parse_statement(p) for p in premises))

    def key(self) -> str:
        """Canonical (goal, premises) string used for split de-duplication."""
        return str(self.goal) + "|" + ";".join(sorted(map(str, self.premises)))

    def display(self) -> str:
        shown = [p for p in self.premises if p.lhs != p.rhs]
        if not shown:
            return f"Prove {self.goal}"
        return f"Given {', '.join(map(str, shown))}, prove {self.goal}"
