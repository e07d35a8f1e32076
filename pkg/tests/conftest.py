import pytest

_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        status = "PASS" if report.passed else "FAIL"
        _CRITERIA[report.nodeid] = (f"{status}  criterion {props['criterion']}", props.get("detail", ""))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (status, detail) in _CRITERIA.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())


@pytest.fixture
def detail(record_property):
    """Attach a one-line measurement to the criterion's summary line."""

    def put(text):
        record_property("detail", text)

    return put
