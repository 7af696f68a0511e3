import numpy as np
import pytest

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


class Criterion:
    """Collects named checks for one acceptance criterion and reports a single verdict."""

    def __init__(self, number, title, sink):
        self.number, self.title, self.sink = number, title, sink
        self.failures = []
        self.notes = []

    def check(self, ok, what):
        self.notes.append(what)
        if not ok:
            self.failures.append(what)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        status = "FAIL" if self.failures else "PASS"
        detail = "; ".join(self.failures or self.notes)
        line = f"{status} [{self.number}] {self.title}: {detail}"
        print(line)
        self.sink.append(line)
        if exc is None and self.failures:
            raise AssertionError(line)
        return False


@pytest.fixture
def criterion(request):
    sink = request.config.stash[_LINES]

    def make(number, title):
        return Criterion(number, title, sink)

    return make
