import pytest

from brlab.arithmetic.alpha import golden
from brlab.arithmetic.contfrac import GrowthSpec, construct_alpha

GAMMA = (5**0.5 - 1) / 2


@pytest.fixture(scope="session")
def gamma() -> float:
    return GAMMA


@pytest.fixture(scope="session")
def golden_surd():
    return golden()


@pytest.fixture(scope="session")
def liouville():
    """Constant-ratio (c = 1) construction requested at depth 6: (table, rational)."""
    return construct_alpha(GrowthSpec("constant", 1.0), 6)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(label: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
