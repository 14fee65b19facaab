"""Exception hierarchy. Every error carries a stable ``code`` for wire responses."""

from __future__ import annotations


class IntError(Exception):
    code = "INT_ERROR"


class ParseError(IntError, ValueError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, offset: int, expected: set[str]):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset
        self.expected = set(expected)


class InvalidPath(IntError, LookupError):
    code = "INVALID_PATH"


class DivisionByZero(IntError, ZeroDivisionError):
    code = "DIVISION_BY_ZERO"


class UnassignedVariable(IntError, KeyError):
    code = "UNASSIGNED_VARIABLE"


class ArityMismatch(IntError):
    code = "ARITY_MISMATCH"


class PatternMismatch(IntError):
    code = "PATTERN_MISMATCH"


class NotATransformAxiom(IntError):
    code = "NOT_A_TRANSFORM_AXIOM"


class CoreFormMismatch(IntError):
    code = "CORE_FORM_MISMATCH"


class EmptyPool(IntError):
    code = "EMPTY_POOL"


class StepRejected(IntError):
    """A well-formed step whose logical preconditions do not hold."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code


class MorphFailed(IntError):
    code = "MORPH_FAILED"


class InfeasibleOrder(IntError):
    code = "INFEASIBLE_ORDER"


class GenerationFailed(IntError):
    code = "GENERATION_FAILED"


class PoolExhausted(IntError):
    code = "POOL_EXHAUSTED"


class EpisodeFinished(IntError):
    code = "EPISODE_FINISHED"


class EmptyCorpus(IntError):
    code = "EMPTY_CORPUS"


class EmptyDataset(IntError):
    code = "EMPTY_DATASET"


class TerminalRoot(IntError):
    code = "TERMINAL_ROOT"


class NoLegalAction(IntError):
    code = "NO_LEGAL_ACTION"


class IoError(IntError, OSError):
    code = "IO_ERROR"
