import pytest

from tokenmarket import MonetaryPolicy, PricePair, Scenario, Trader

A = Trader("A", 90, 30)
B = Trader("B", 50, 50)
C = Trader("C", 10, 70)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")
    config._criteria = []


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    passed = call.excinfo is None
    text = marker.args[1]
    if item.get_closest_marker("xfail") is not None:
        text += "  [known gap, expected failure]"
    item.config._criteria.append((marker.args[0], text, passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not config._criteria:
        return
    merged = {}
    for num, text, passed in config._criteria:
        prev = merged.get(num, (text, True))
        merged[num] = (prev[0], prev[1] and passed)
    terminalreporter.section("acceptance criteria")
    for num in sorted(merged):
        text, passed = merged[num]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {num:<4} {text}")


@pytest.fixture
def traders():
    return (A, B, C)


@pytest.fixture
def policy():
    return MonetaryPolicy(n=6, r=0.2)


@pytest.fixture
def example1():
    return Scenario((A, B, C), MonetaryPolicy(0, 0))


@pytest.fixture
def example2():
    return Scenario((A, B, C), MonetaryPolicy(6, 0.2))


@pytest.fixture
def eq_prices():
    return PricePair(2.075, 2.022)
