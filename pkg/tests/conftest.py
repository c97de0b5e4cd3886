import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from golsi import problems
from golsi.data import Dataset

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_criterion_lines = []


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for the acceptance summary."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _criterion_lines.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        print(_criterion_lines[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def iris_problem():
    return problems.iris()


@pytest.fixture(scope="session")
def bcwd_logr():
    return problems.bcwd("LogR")


def random_dataset(rng, M, n_in, n_out, name="synthetic"):
    x = rng.standard_normal((M, n_in))
    t = np.eye(n_out)[rng.integers(0, n_out, M)]
    return Dataset(x, t, name)
