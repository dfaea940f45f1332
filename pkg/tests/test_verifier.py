from __future__ import annotations

import json

import jsonschema
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vertexlab.fock import FockVector
from vertexlab.lattice import LatticeModule, LatticeVOA
from vertexlab.scalars import Q, zeta
from vertexlab.suites import SUITE_FUNCTIONS
from vertexlab.verifier import (
    CaseBuilder,
    CheckReport,
    Window,
    jacobi_cases,
    mode_range,
    normalize_report,
    run_suite,
    serialize,
    tag_kind,
)

REPORT_SCHEMA = {
    "type": "object",
    "required": ["suite", "cases"],
    "properties": {
        "suite": {"type": "string"},
        "cases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["tag", "inputs", "window", "pass", "counterexample"],
                "properties": {
                    "tag": {"type": "string"},
                    "inputs": {"type": "object"},
                    "window": {"type": "object"},
                    "pass": {"type": "boolean"},
                    "counterexample": {"type": ["object", "null"]},
                },
            },
        },
    },
}

SMALL = {"wmax": 2, "mode_bound": 2}


class ScaledCharged(LatticeModule):
    """V_L acting on itself with every charged vertex operator doubled."""

    def __init__(self, voa):
        super().__init__(voa)
        base = self.act
        self.act = lambda u, p, w: (FockVector(base(u, p, w)).scaled(2) if any(u[0])
                                    else base(u, p, w))


@pytest.fixture(scope="module")
def delta_report() -> CheckReport:
    return SUITE_FUNCTIONS["delta"](SMALL)


class TestWindows:
    @given(cls=st.sampled_from([Q(0), Q(1, 2), Q(1, 4), Q(3, 4)]),
           bound=st.fractions(0, 5, max_denominator=4).map(Q))
    def test_mode_range(self, cls, bound):
        out = mode_range(cls, bound)
        assert all((p - cls).denominator == 1 and abs(p) <= bound for p in out)
        assert out == sorted(out)
        assert out == [cls + n for n in range(-8, 9) if abs(cls + n) <= bound]

    def test_window_json_is_strings(self):
        assert Window(Q(5, 2), Q(3)).to_json() == {"wmax": "5/2", "mode_bound": "3",
                                                   "exponent_bound": None}


class TestCells:
    def test_broken_realization_is_caught(self):
        voa = LatticeVOA([[2]])
        R = ScaledCharged(voa)
        basis = voa.basis(voa.space.zero, 1)
        cases = jacobi_cases(R, basis, basis, basis, Window(Q(1), Q(2)))
        bad = [c for c in cases if not c.passed]
        assert bad
        ce = bad[0].counterexample
        assert set(ce) == {"cell", "lhs", "rhs"} and ce["lhs"] != ce["rhs"]

    def test_case_builder_keeps_first_failure(self):
        b = CaseBuilder("commutator", {}, {})
        b.compare({"i": 0}, 1, 1)
        b.compare({"i": 1}, 1, 2)
        b.compare({"i": 2}, 3, 4)
        case = b.done()
        assert not case.passed and case.cells == 3
        assert case.counterexample["cell"] == {"i": 1}


class TestReports:
    def test_schema_round_trip(self, delta_report):
        text = delta_report.dumps()
        data = json.loads(text)
        jsonschema.validate(data, REPORT_SCHEMA)
        assert json.dumps(data, indent=1, sort_keys=True) == text

    def test_rationals_are_strings(self):
        out = serialize({"x": Q(1, 3), "v": FockVector({((Q(1, 2),), ()): zeta(4)})})
        assert out == {"x": "1/3", "v": {"e[1/2]": "1*z{4}^1"}}

    def test_deterministic(self, delta_report):
        again = SUITE_FUNCTIONS["delta"](SMALL)
        assert normalize_report(again.to_json()) == normalize_report(delta_report.to_json())

    def test_every_tag_is_registered(self, delta_report):
        assert all(tag_kind(c.tag) == "identity" for c in delta_report.cases)
        assert tag_kind("made-up") is None
        assert tag_kind("sigma-scalar-fit") == "plumbing"

    def test_unknown_suite(self):
        with pytest.raises(ValueError, match="unknown suite"):
            run_suite(["nope"], {})

    def test_threads_keep_order(self, monkeypatch):
        monkeypatch.setenv("VERTEXLAB_THREADS", "2")
        reports = run_suite(["contragredient", "delta"], {"wmax": 1, "mode_bound": 1})
        assert [r.suite for r in reports] == ["contragredient", "delta"]
        assert all(r.passed for r in reports)
        assert all("seconds" in r.timing for r in reports)
