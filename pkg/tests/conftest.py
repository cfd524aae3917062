import numpy as np
import pytest

from sfgeo.ambient import SpaceForm

_CRITERIA = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_CRITERIA] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; printed in the terminal summary."""
    def record(label, ok, detail=""):
        request.config.stash[_CRITERIA].append((label, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(_CRITERIA, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in rows:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=[1.0, -1.0], ids=["S3", "H3"])
def sf(request):
    return SpaceForm(request.param)
