import pytest

from gripforce.datamodel import Expertise, HandRole, Session, UserMeta
from gripforce.wire import SensorReading

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if "test_acceptance" not in item.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        _acceptance.append((doc, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for doc, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {doc}")


def make_session(voltages_by_sensor, expertise=Expertise.NOVICE, hand=HandRole.DOMINANT,
                 session_index=1, user_id=None, period_ms=20):
    """Session whose sensors tick together every ``period_ms``.

    ``voltages_by_sensor`` maps sensor id to a list of millivolt values; all
    lists must have the same length.
    """
    user = UserMeta.default(user_id or expertise.value, expertise)
    physical = user.physical_hand(hand)
    lengths = {len(v) for v in voltages_by_sensor.values()}
    assert len(lengths) == 1
    readings = []
    for k in range(lengths.pop()):
        for sensor in sorted(voltages_by_sensor):
            readings.append(SensorReading(sensor, physical, k * period_ms,
                                          int(voltages_by_sensor[sensor][k])))
    return Session(user, hand, session_index, tuple(readings))
