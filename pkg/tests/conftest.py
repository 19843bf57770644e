import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- per-criterion summary for the acceptance suite ---------------------------------------

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "checks": {}})
    props = dict(item.user_properties)
    detail = ""
    if "measured" in props:
        detail = f" measured {props['measured']:.3g} vs tol {props['tolerance']:.3g}"
    entry["checks"][item.name] = (rep.passed and entry["checks"].get(item.name, (True,))[0], detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        checks = entry["checks"]
        ok = all(passed for passed, _ in checks.values())
        failed = [name for name, (passed, _) in checks.items() if not passed]
        tail = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {entry['title']} "
                      f"[{sum(p for p, _ in checks.values())}/{len(checks)} checks]{tail}")
        for name, (passed, detail) in checks.items():
            tr.write_line(f"    {'pass' if passed else 'FAIL'} {name}{detail}")
