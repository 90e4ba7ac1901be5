from pathlib import Path

import pytest

from assocverify.ontology import load_obo

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


@pytest.fixture(scope="session")
def doid():
    return load_obo(FIXTURES / "doid.obo", "DOID")


@pytest.fixture(scope="session")
def symp():
    return load_obo(FIXTURES / "symp.obo", "SYMP")


@pytest.fixture(scope="session")
def chebi():
    return load_obo(FIXTURES / "chebi.obo", "CHEBI")


@pytest.fixture(scope="session")
def go():
    return load_obo(FIXTURES / "go.obo", "GO")


@pytest.fixture(scope="session")
def ontologies(doid, symp, chebi, go):
    return {"DOID": doid, "SYMP": symp, "CHEBI": chebi, "GO": go}


# -- acceptance summary -----------------------------------------------------

_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        prev = _criteria.get(number, (title, "PASS"))[1]
        status = "FAIL" if failed or prev == "FAIL" else ("SKIP" if report.skipped else "PASS")
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
