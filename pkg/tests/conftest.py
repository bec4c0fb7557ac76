import pytest

from primehit.exact_dp import DpConfig, run_dp
from primehit.primes import build_prime_table

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def small_table():
    return build_prime_table(100_000)


@pytest.fixture(scope="session")
def big_table():
    return build_prime_table(10_000_000)


@pytest.fixture(scope="session")
def series_1000(big_table):
    return run_dp(DpConfig(sides=6, k_max=1000), big_table)


@pytest.fixture
def criterion():
    """Record an acceptance line; the assert stays in the test."""

    def record(name: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")
