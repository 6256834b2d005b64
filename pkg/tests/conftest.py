from __future__ import annotations

import functools

import pytest

from taca.model.scenario import load_scenario
from taca.ops import bundled_text
from taca.sim import RunResult, run_text

TABLE_SCENARIOS = ("suave", "suave_extended", "agv", "uav")


@functools.lru_cache(maxsize=None)
def cached_run(name: str, seed: int = 0, rebuild: bool = False) -> RunResult:
    return run_text(bundled_text(name), seed=seed, rebuild_components=rebuild)


@pytest.fixture
def suave():
    return load_scenario(bundled_text("suave"))


@pytest.fixture
def suave_extended():
    return load_scenario(bundled_text("suave_extended"))


# -- acceptance reporting ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for a numbered criterion, then assert it."""

    def report(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        ACCEPTANCE_LINES.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
