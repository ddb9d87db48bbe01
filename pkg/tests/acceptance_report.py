"""Shared registry: one PASS/FAIL line per acceptance criterion.

test_acceptance.py records into it; conftest prints it after the run.
"""

import time
from contextlib import contextmanager

lines: list[str] = []


@contextmanager
def criterion(name: str, budget_seconds: float):
    """Run one criterion, record its line, and enforce the runtime budget."""
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        lines.append(f"FAIL  {name}")
        raise
    elapsed = time.perf_counter() - start
    if elapsed >= budget_seconds:
        lines.append(f"FAIL  {name} (took {elapsed:.1f}s, budget {budget_seconds:g}s)")
        raise AssertionError(
            f"{name}: took {elapsed:.1f}s, budget is {budget_seconds:g}s"
        )
    lines.append(f"PASS  {name} ({elapsed:.1f}s)")


def note(text: str) -> None:
    lines.append(f"      {text}")
