import time

SUITE_BUDGET_S = 120.0

# (criterion number, passed, detail) appended by test_acceptance
ACCEPTANCE = []
_state = {}


def pytest_sessionstart(session):
    _state["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _state["start"]
    _state["elapsed"] = elapsed
    if ACCEPTANCE:
        ok = elapsed < SUITE_BUDGET_S
        _state["timing"] = ok
        if not ok and session.exitstatus == 0:
            session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num, passed, detail in sorted(ACCEPTANCE):
        tr.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {num:>2}: {detail}")
    ok = _state.get("timing", True)
    tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion 12: suite wall-clock "
                  f"{_state.get('elapsed', 0.0):.1f} s (limit {SUITE_BUDGET_S:.0f} s)")
