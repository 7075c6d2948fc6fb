"""Shared registry for the acceptance criteria result lines.

Each acceptance test records exactly one PASS/FAIL line here; the conftest
terminal-summary hook prints the collected lines after the run so they are
visible regardless of pytest's output capturing.
"""

RESULTS: list[str] = []


def record(name: str, ok: bool, detail: str) -> str:
    line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
    RESULTS.append(line)
    return line
