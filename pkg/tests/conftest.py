import time
from contextlib import contextmanager

# filled by test_acceptance.py, printed once at the end of the run
CRITERIA: dict[int, str] = {}


@contextmanager
def criterion(n: int, title: str, budget: float | None = None):
    """Time a criterion body and record one PASS/FAIL line for the summary."""
    notes: list[str] = []
    t0 = time.perf_counter()
    try:
        yield notes
        dt = time.perf_counter() - t0
        if budget is not None:
            assert dt < budget, f"took {dt:.2f}s, budget {budget}s"
    except BaseException as exc:
        dt = time.perf_counter() - t0
        CRITERIA[n] = f"criterion {n:>2} FAIL  {title} [{dt:.2f}s] {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        raise
    extra = f" ({'; '.join(notes)})" if notes else ""
    CRITERIA[n] = f"criterion {n:>2} PASS  {title} [{dt:.2f}s]{extra}"


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[n])
