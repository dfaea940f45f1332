from __future__ import annotations

import pytest

from vertexlab.lattice import LatticeVOA

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (passed, detail)
    print(f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def a1() -> LatticeVOA:
    return LatticeVOA([[2]])


@pytest.fixture(scope="session")
def v8() -> LatticeVOA:
    return LatticeVOA([[8]])


@pytest.fixture(scope="session")
def a2() -> LatticeVOA:
    return LatticeVOA([[2, -1], [-1, 2]])
