import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from perturbstat.linmodel import PerturbedDesign

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_RESULTS_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion and print it."""
    lines = request.config.stash[_RESULTS_KEY]

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else "")
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def random_design(rng, m=3, n=12, orders=2, scale=0.5) -> PerturbedDesign:
    """Well-conditioned X0 with O(scale) perturbation components."""
    x0 = rng.normal(size=(m, n))
    comps = [x0] + [scale * rng.normal(size=(m, n)) for _ in range(orders)]
    return PerturbedDesign(tuple(comps))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
