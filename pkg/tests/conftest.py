import functools

import pytest
from hypothesis import HealthCheck, settings

from btlab.geometry import make_model
from btlab.quantum import build_basis, spectral_space_q1

settings.register_profile("btlab", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("btlab")

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    """Append one 'criterion: PASS/FAIL detail' line to the run summary."""
    def record(label, ok, detail=""):
        ACCEPTANCE_LINES.append(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def cached_basis(kind, k, eps=0.0):
    model = make_model(kind, eps)
    if kind == "landau_q1":
        return spectral_space_q1(model, k)
    return build_basis(model, k)


@pytest.fixture
def basis_cache():
    return cached_basis
