import numpy as np
import pytest

from noma_match.channel import ChannelState
from noma_match.config import ScenarioConfig


def make_channel(gains) -> ChannelState:
    gains = np.asarray(gains, dtype=float)
    return ChannelState(positions=np.zeros((gains.shape[1], 2)), gains=gains)


@pytest.fixture
def default_cfg() -> ScenarioConfig:
    return ScenarioConfig()


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one verdict line per acceptance criterion for the terminal summary."""

    def record(number: int, name: str, passed: bool, detail: str = "") -> None:
        verdict = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"[{number}] {verdict} {name}" + (f" -- {detail}" if detail else ""))
        print(ACCEPTANCE_LINES[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
