import pytest

from boa.online import ArrivalStream
from boa.toy import toy_instance


@pytest.fixture
def toy():
    return toy_instance()


@pytest.fixture
def toy_stream(toy):
    return ArrivalStream.from_workers(toy.workers)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance
    results = test_acceptance.RESULTS
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
