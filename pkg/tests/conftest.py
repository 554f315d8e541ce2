import os
from pathlib import Path

import pytest

from care2vec.dataset import make_scadi_like, write_scadi_csv
from care2vec.neural import Loss, TrainConfig

REPO = Path(__file__).resolve().parents[1]

_CRITERIA = {}


def scadi_path():
    """Full SCADI CSV: $SCADI_CSV, else data/SCADI.csv in the repo."""
    env = os.environ.get("SCADI_CSV")
    if env:
        return Path(env)
    return REPO / "data" / "SCADI.csv"


@pytest.fixture
def record_criterion():
    """Call with (number, passed, detail); results are listed at the end of the run."""

    def record(number, passed, detail):
        _CRITERIA[number] = (passed, detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {detail}")


@pytest.fixture(scope="session")
def scadi_like():
    return make_scadi_like(seed=3)


@pytest.fixture(scope="session")
def scadi_like_csv(tmp_path_factory, scadi_like):
    path = tmp_path_factory.mktemp("data") / "scadi_like.csv"
    write_scadi_csv(scadi_like, path)
    return path


@pytest.fixture
def quick_ae():
    return TrainConfig(loss=Loss.MSE, epochs=5, batch_size=8)


@pytest.fixture
def quick_clf():
    return TrainConfig(epochs=5, batch_size=8)
