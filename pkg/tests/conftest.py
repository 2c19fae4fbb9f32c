from hypothesis import HealthCheck, settings

settings.register_profile("modent", deadline=None, max_examples=40, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("modent")


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, in collection order."""
    reports = [r for key in ("passed", "failed") for r in terminalreporter.stats.get(key, [])
               if r.when == "call" and "test_acceptance.py" in r.nodeid]
    if not reports:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(reports, key=lambda r: dict(r.user_properties).get("criterion", 0)):
        props = dict(r.user_properties)
        status = "PASS" if r.passed else "FAIL"
        terminalreporter.write_line(f"{status} [{props.get('criterion', '?'):>2}] "
                                    f"{r.nodeid.split('::')[-1]}: {props.get('detail', '')}")
