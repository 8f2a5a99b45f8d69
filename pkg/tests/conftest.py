import os
import random
from pathlib import Path

import pytest

SAMPLES = Path(__file__).resolve().parent.parent / "samples"

acceptance_lines: dict[int, str] = {}


def seed() -> int:
    return int(os.environ.get("PVASSKIT_SEED", "20240611"))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(seed())


@pytest.fixture
def samples() -> Path:
    return SAMPLES


def pytest_terminal_summary(terminalreporter):
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance_lines):
        terminalreporter.write_line(acceptance_lines[n])
