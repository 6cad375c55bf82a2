import numpy as np
import pytest

from spdtw.series import load_ucr, resolve_dataset


def _load(name):
    train, test = resolve_dataset(name)
    return load_ucr(train, name=name), load_ucr(test, name=name)


@pytest.fixture(scope="session")
def gunpoint():
    return _load("Gun-Point")


@pytest.fixture(scope="session")
def trace():
    return _load("Trace")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Log one acceptance line, then assert it."""

    def _record(label, ok, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        assert ok, f"{label}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
