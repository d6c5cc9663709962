import pytest

from powerpacket.network import Network, NodeKind, path_network
from powerpacket.scenarios import build_mesh

R, S, D = NodeKind.ROUTER, NodeKind.SOURCE, NodeKind.DESTINATION


@pytest.fixture(scope="session")
def mesh():
    return build_mesh()


@pytest.fixture
def path3():
    """v0 -> v1 -> v2, the two-link example network."""
    return path_network(3)


@pytest.fixture
def fig2_flow():
    """One unit symbol on a0 during t0, then on a1 during t1."""
    return [[1, 0], [0, 1]]


_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if report.when == "call" or report.outcome == "failed":
        _acceptance[name] = _acceptance.get(name, "passed") if report.passed else "failed"
    if report.when == "call" and report.passed:
        _acceptance[name] = "passed"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    from tests.test_acceptance import CRITERIA

    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name in _acceptance:
            status = "PASS" if _acceptance[name] == "passed" else "FAIL"
            terminalreporter.write_line(f"[{status}] {label}")
