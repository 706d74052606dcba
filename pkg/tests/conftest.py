import numpy as np
import pytest

from fairreweigh.data import ColumnKind, Dataset, Schema


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_by_two():
    """Discrete (a, y) population with cell counts 10, 30, 30, 30."""
    cells = {(0, 0): 10, (0, 1): 30, (1, 0): 30, (1, 1): 30}
    a, y = [], []
    for (ai, yi), c in cells.items():
        a += [ai] * c
        y += [yi] * c
    x = np.arange(len(a), dtype=float) % 7
    schema = Schema((("x", ColumnKind.FEATURE), ("a", ColumnKind.SENSITIVE_BINARY), ("y", ColumnKind.TARGET)))
    return Dataset.from_columns(schema, {"x": x, "a": a, "y": y})


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion and assert on it."""
    lines = request.config.stash[ACCEPTANCE]

    def record(criterion: str, ok: bool, detail: str) -> None:
        lines.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
