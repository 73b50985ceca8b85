RESULTS = {}


def record(n: int, passed: bool, detail: str, seconds: float):
    RESULTS[n] = (passed, detail, seconds)
    print(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'} ({seconds:.2f}s) {detail}")


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        passed, detail, secs = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'} ({secs:.2f}s) {detail}")
