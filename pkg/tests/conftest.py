"""Shared test plumbing: the acceptance-criterion recorder.

Acceptance tests wrap their body in ``with criterion(n, summary):``; the
recorder captures a PASS/FAIL/SKIP verdict per criterion and a terminal
summary hook prints exactly one line per criterion after the run, even
with output capture enabled.
"""

import pytest

_RESULTS: dict[int, list[tuple[str, str]]] = {}


class _Recorder:
    def __init__(self, number: int, summary: str):
        self.number = number
        self.summary = summary

    def note(self, text: str) -> None:
        """Replace the canned summary with measured numbers."""
        self.summary = text

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            verdict = "PASS"
        elif exc_type.__name__ == "Skipped":
            verdict = "SKIP"
            self.summary = str(exc).strip() or self.summary
        else:
            verdict = "FAIL"
        _RESULTS.setdefault(self.number, []).append((verdict, self.summary))
        return False


@pytest.fixture
def criterion():
    return _Recorder


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        parts = _RESULTS[number]
        verdicts = {v for v, _ in parts}
        overall = ("FAIL" if "FAIL" in verdicts
                   else "PASS" if "PASS" in verdicts else "SKIP")
        detail = "; ".join(s if v == overall else f"[{v.lower()}] {s}"
                           for v, s in parts)
        terminalreporter.write_line(
            f"criterion {number}: {overall} - {detail}")
