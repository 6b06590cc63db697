import pytest

from sta_separation import CostContext, ObjectiveSpec, PhysicalConfig, derive_endpoints


@pytest.fixture(scope="session")
def config():
    return PhysicalConfig()


@pytest.fixture(scope="session")
def endpoints(config):
    return derive_endpoints(config)


@pytest.fixture(scope="session")
def harmonic_ctx(config, endpoints):
    return CostContext(config, ObjectiveSpec(mode="harmonic"), endpoints)


@pytest.fixture(scope="session")
def cubic_ctx(config, endpoints):
    return CostContext(config, ObjectiveSpec(mode="cubic"), endpoints)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
