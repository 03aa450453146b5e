"""Shared fixtures: cached protocol rows and the acceptance report."""

from __future__ import annotations

import functools

import pytest

from ghzsim.dynamics import IntegratorConfig
from ghzsim.params import SystemConfig
from ghzsim.sweep import SweepPoint, SweepRow, evaluate_point

ACCEPTANCE_LINES: dict[int, str] = {}


@functools.lru_cache(maxsize=None)
def protocol_row(
    b: float,
    gkl: float = 0.0,
    cutoffs: tuple[int, int, int] = (2, 2, 2),
    steps_per_period: float = 50.0,
    variant: str = "default",
) -> SweepRow:
    """One protocol run, memoised across the whole session.

    ``variant`` selects the system: ``default``, ``noise_free`` (unwanted
    couplings kept) or ``clean`` (no unwanted couplings, noise kept).
    """
    system = SystemConfig(fock_cutoffs=cutoffs)
    if variant == "noise_free":
        system = system.without_noise()
    elif variant == "clean":
        system = system.without_unwanted()
    elif variant != "default":
        raise ValueError(variant)
    point = SweepPoint(b, gkl, system, IntegratorConfig(steps_per_period=steps_per_period))
    return evaluate_point(point)


@pytest.fixture
def report():
    """``report(n, passed, text)`` records the one-line verdict of criterion ``n``."""

    def record(number: int, passed: bool, text: str) -> None:
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {text}"

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])

