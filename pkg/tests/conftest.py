import pytest

from sdnsec.catalog import load_catalog
from sdnsec.topology import reference_stride_model, reference_testbed


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture()
def testbed_model():
    return reference_testbed()


@pytest.fixture()
def stride_model():
    return reference_stride_model()


_ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE_RESULTS.append((name, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
