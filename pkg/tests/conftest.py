import functools

import pytest

from zetalab.primes import sieve_primes


@functools.lru_cache(maxsize=None)
def _table(limit):
    return sieve_primes(limit)


@pytest.fixture(scope="session")
def table_1e6():
    return _table(10**6)


@pytest.fixture(scope="session")
def table_1e8():
    return _table(10**8)


@pytest.fixture(scope="session")
def table_small():
    return _table(10**4)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "ACCEPTANCE", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
