import random

import pytest

from intkit.axioms import AxiomId
from intkit.generator import degree0_conditions, generate_theorem

# Found by a small seed search; reproduces the "Given d>=e" worked example.
WORKED_SEED = 129632
WORKED_ORDER = [AxiomId.AA, AxiomId.AC, AxiomId.EIDI, AxiomId.FPOI]


def worked_example():
    trace: list = []
    thm = generate_theorem(degree0_conditions(), WORKED_ORDER, random.Random(WORKED_SEED), trace_out=trace)
    return thm, trace


@pytest.fixture(scope="session")
def worked():
    return worked_example()


# Acceptance outcomes, printed as one PASS/FAIL line each at the end of the run.
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
