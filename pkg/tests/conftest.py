import pytest

from czekan.distance import distance_matrix
from czekan.ingest import load_wbc, zscore


@pytest.fixture(scope="session")
def wbc():
    return load_wbc()


@pytest.fixture(scope="session")
def wbc_distances(wbc):
    z, _ = zscore(wbc)
    return distance_matrix(z)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    results = test_acceptance.ACCEPTANCE
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
