"""Prints the acceptance checklist line per criterion test.

Plain prints inside tests are fd-captured by pytest, so the lines are
emitted from the report hook, where capture is suspended and the text
reaches the real terminal (and anything teeing it).
"""


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    try:
        import test_acceptance as acc
    except ImportError:
        return
    title = acc.CRITERIA.get(name)
    if title is None:
        return
    cid = name.split("_")[1]
    status = "PASS" if report.passed else "FAIL"
    extra = acc.DETAILS.get(name)
    tail = f"  [{extra}]" if extra else ""
    print(f"\nACCEPTANCE {cid} {title}: {status}{tail}", flush=True)
