import pytest

from mobsir.network import generate_random_network

# filled by test_acceptance.py, printed after the run
ACCEPTANCE = []


@pytest.fixture(scope="session")
def net16():
    return generate_random_network(16, (1e4, 1e6), 0.01, rng_seed=42)


@pytest.fixture(scope="session")
def net100():
    return generate_random_network(100, (1e4, 1e6), 0.01, rng_seed=42)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
