import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from beamentropy import _kernels  # noqa: E402

BACKENDS = [impl for impl in (_kernels.numpy_impl, _kernels.numba_impl) if impl is not None]

_criteria: list[tuple[str, bool, str]] = []


@pytest.fixture(params=BACKENDS, ids=lambda impl: impl.name)
def backend(request, monkeypatch):
    """Route the package's kernel dispatch through one backend for the test."""
    monkeypatch.setattr(_kernels, "active", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(ok, detail).  Asserts ``ok``."""
    name = request.node.name

    def record(ok: bool, detail: str):
        _criteria.append((name, bool(ok), detail))
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
