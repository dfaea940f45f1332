"""Coefficient-cell verification of vertex algebra identities.

A *realization* supplies an outer action ``act(u, p, w)`` (the vertex operator
whose identity is being tested, possibly twisted), an inner product
``inner(u, k, v)`` on the algebra, degrees, mode cosets and super signs.  The
checks below reduce the Jacobi identity to finitely many exact coefficient
cells, each comparing two finite sums.
"""

from __future__ import annotations

import json
import os
import time
from collections.abc import Callable, Hashable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from math import ceil, floor
from typing import Any, Protocol

from .fock import FockVector, format_key
from .scalars import Q, Scalar, binomial, format_scalar

__all__ = [
    "Window",
    "CheckCase",
    "CheckReport",
    "Realization",
    "borcherds_sides",
    "commutator_identity",
    "iterate_identity",
    "twisted_jacobi_cell",
    "CaseBuilder",
    "run_suite",
    "normalize_report",
    "IDENTITY_TAGS",
    "tag_kind",
]


@dataclass(frozen=True)
class Window:
    """Weight cut, mode bound and optional Laurent exponent bound of a check."""

    wmax: Q = Q(4)
    mode_bound: Q = Q(4)
    exponent_bound: Q | None = None

    def to_json(self) -> dict[str, str | None]:
        return {
            "wmax": str(self.wmax),
            "mode_bound": str(self.mode_bound),
            "exponent_bound": None if self.exponent_bound is None else str(self.exponent_bound),
        }


DEFAULT_WINDOW = Window(Q(4), Q(4))
DEFAULT_TWISTED_WINDOW = Window(Q(3), Q(5, 2))


def serialize(obj: Any) -> Any:
    """JSON-ready form of vectors, keys, scalars and containers."""
    if isinstance(obj, FockVector):
        return obj.to_json()
    if isinstance(obj, dict):
        if obj and all(_is_key(k) for k in obj):
            return {format_key(k): format_scalar(c) for k, c in obj.items()}
        return {str(k): serialize(v) for k, v in obj.items()}
    if isinstance(obj, Q):
        return format_scalar(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if _is_key(obj):
        return format_key(obj)
    if isinstance(obj, (list, tuple)):
        return [serialize(x) for x in obj]
    if hasattr(obj, "coeffs"):
        return format_scalar(obj)
    return str(obj)


def _is_key(obj: Any) -> bool:
    if isinstance(obj, tuple) and len(obj) == 2 and isinstance(obj[0], int) \
            and not isinstance(obj[0], bool):
        return _is_key(obj[1])
    return (isinstance(obj, tuple) and len(obj) == 2 and isinstance(obj[0], tuple)
            and isinstance(obj[1], tuple)
            and all(isinstance(x, Q) for x in obj[0]))


@dataclass
class CheckCase:
    tag: str
    inputs: dict[str, Any]
    window: dict[str, Any]
    passed: bool
    counterexample: dict[str, Any] | None = None
    cells: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "tag": self.tag,
            "inputs": serialize(self.inputs),
            "window": serialize(self.window),
            "pass": self.passed,
            "counterexample": serialize(self.counterexample),
            "cells": self.cells,
        }


@dataclass
class CheckReport:
    suite: str
    cases: list[CheckCase] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)
    timing: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def failures(self) -> list[CheckCase]:
        return [c for c in self.cases if not c.passed]

    def tags(self) -> set[str]:
        return {c.tag for c in self.cases}

    def extend(self, other: "CheckReport") -> None:
        self.cases.extend(other.cases)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"suite": self.suite, "cases": [c.to_json() for c in self.cases]}
        if self.meta:
            out["meta"] = serialize(self.meta)
        if self.timing:
            out["timing"] = self.timing
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def normalize_report(data: dict[str, Any]) -> dict[str, Any]:
    """Drop wall-clock fields so two reports of the same config compare equal."""
    out = dict(data)
    out.pop("timing", None)
    return out


class CaseBuilder:
    """Accumulates cells for one case; keeps the first failing cell."""

    def __init__(self, tag: str, inputs: dict[str, Any], window: Window | dict[str, Any]):
        self.tag = tag
        self.inputs = inputs
        self.window = window.to_json() if isinstance(window, Window) else window
        self.cells = 0
        self.counterexample: dict[str, Any] | None = None

    def compare(self, cell: dict[str, Any], lhs: Any, rhs: Any) -> bool:
        self.cells += 1
        if lhs == rhs:
            return True
        if self.counterexample is None:
            self.counterexample = {"cell": cell, "lhs": lhs, "rhs": rhs}
        return False

    def require(self, cell: dict[str, Any], ok: bool, detail: Any = None) -> bool:
        self.cells += 1
        if not ok and self.counterexample is None:
            self.counterexample = {"cell": cell, "detail": detail}
        return ok

    def done(self) -> CheckCase:
        return CheckCase(self.tag, self.inputs, self.window, self.counterexample is None,
                         self.counterexample, self.cells)


class Realization(Protocol):
    """What the cell checks need to know about a (twisted) module for an algebra."""

    def act(self, u: Hashable, p: Q, w: Hashable) -> dict: ...
    def inner(self, u: Hashable, k: int, v: Hashable) -> dict: ...
    def degree(self, u: Hashable) -> Q: ...
    def inner_degree(self, u: Hashable) -> Q: ...
    def module_weight(self, w: Hashable) -> Q: ...
    def module_floor(self) -> Q: ...
    def mode_class(self, u: Hashable, w: Hashable) -> Q: ...
    def sign(self, u: Hashable, v: Hashable) -> int: ...


def act_vec(R: Realization, u: Hashable, p: Q, vec: dict) -> FockVector:
    out = FockVector()
    for w, c in vec.items():
        r = R.act(u, p, w)
        if r:
            out.iadd_scaled(r, c)
    return out


def act_combo(R: Realization, combo: dict, p: Q, w: Hashable) -> FockVector:
    out = FockVector()
    for u, c in combo.items():
        r = R.act(u, p, w)
        if r:
            out.iadd_scaled(r, c)
    return out


def _top_mode(R: Realization, u: Hashable, w_weight: Q) -> Q:
    """Largest p with u_p w possibly nonzero, for w of the given weight."""
    return R.degree(u) + w_weight - 1 - R.module_floor()


class _Triple:
    """Per-(u, v, w) data and composite products shared by the cells of a triple."""

    __slots__ = ("R", "u", "v", "w", "s", "top_inner", "deg_u", "deg_v", "base", "_inner",
                 "_iter", "_uv", "_vu")

    def __init__(self, R: Realization, u: Hashable, v: Hashable, w: Hashable):
        self.R, self.u, self.v, self.w = R, u, v, w
        self.s = R.sign(u, v)
        self.top_inner = floor(R.inner_degree(u) + R.inner_degree(v) - 1)
        self.deg_u = R.degree(u)
        self.deg_v = R.degree(v)
        self.base = R.module_weight(w) - 1 - R.module_floor()
        self._inner: dict[int, dict] = {}
        self._iter: dict[tuple[int, Q], FockVector] = {}
        self._uv: dict[tuple[Q, Q], FockVector] = {}
        self._vu: dict[tuple[Q, Q], FockVector] = {}

    def inner(self, j: int) -> dict:
        hit = self._inner.get(j)
        if hit is None:
            hit = self._inner[j] = self.R.inner(self.u, j, self.v)
        return hit

    def iterate(self, j: int, p: Q) -> FockVector:
        """(u_j v)_p w."""
        hit = self._iter.get((j, p))
        if hit is None:
            hit = FockVector()
            x = self.inner(j)
            if x:
                act, w = self.R.act, self.w
                for y, cy in x.items():
                    r = act(y, p, w)
                    if r:
                        hit.iadd_scaled(r, cy)
            self._iter[(j, p)] = hit
        return hit

    def _product(self, cache: dict, a: Hashable, p: Q, b: Hashable, q: Q) -> FockVector:
        hit = cache.get((p, q))
        if hit is None:
            hit = FockVector()
            act = self.R.act
            y = act(b, q, self.w)
            if y:
                for z, cz in y.items():
                    r = act(a, p, z)
                    if r:
                        hit.iadd_scaled(r, cz)
            cache[(p, q)] = hit
        return hit

    def uv(self, p: Q, q: Q) -> FockVector:
        """u_p v_q w."""
        return self._product(self._uv, self.u, p, self.v, q)

    def vu(self, q: Q, p: Q) -> FockVector:
        """v_q u_p w."""
        return self._product(self._vu, self.v, q, self.u, p)


def _sides(t: _Triple, k: int, m: Q, n: Q) -> tuple[FockVector, FockVector]:
    lhs = FockVector()
    i = 0
    while k + i <= t.top_inner:
        c = binomial(m, i)
        if c:
            x = t.iterate(k + i, m + n - i)
            if x:
                lhs.iadd_scaled(x, c)
        i += 1
    rhs = FockVector()
    sk = -t.s if k % 2 else t.s
    # v_{n+i} w vanishes once n+i passes the top mode, and likewise u_{m+i} w
    imax_a = floor(t.deg_v + t.base - n)
    imax_b = floor(t.deg_u + t.base - m)
    imax = max(imax_a, imax_b)
    if k >= 0:
        imax = min(imax, k)
    for i in range(0, imax + 1):
        c = binomial(k, i)
        if not c:
            continue
        c = -c if i % 2 else c
        if i <= imax_a:
            x = t.uv(m + k - i, n + i)
            if x:
                rhs.iadd_scaled(x, c)
        if i <= imax_b:
            x = t.vu(n + k - i, m + i)
            if x:
                rhs.iadd_scaled(x, -sk * c)
    return lhs, rhs


def borcherds_sides(R: Realization, u: Hashable, v: Hashable, w: Hashable, k: int,
                    m: Q, n: Q) -> tuple[FockVector, FockVector]:
    """Both sides of the (twisted, super) Borcherds identity at one cell.

    lhs = sum_i C(m,i) (u_{k+i} v)_{m+n-i} w
    rhs = sum_i (-1)^i C(k,i) [u_{m+k-i} v_{n+i} w - s (-1)^k v_{n+k-i} u_{m+i} w]
    """
    return _sides(_Triple(R, u, v, w), k, Q(m), Q(n))


def _cell(u: Hashable, v: Hashable, w: Hashable, k: int, m: Q, n: Q) -> dict[str, Any]:
    return {"u": u, "v": v, "w": w, "k": k, "m": m, "n": n}


def commutator_identity(R: Realization, u: Hashable, v: Hashable, w: Hashable,
                        m: Q, n: Q) -> CheckCase:
    """u_m v_n w - s v_n u_m w = sum_i C(m,i) (u_i v)_{m+n-i} w."""
    b = CaseBuilder("commutator", {"u": u, "v": v, "w": w}, {"m": str(m), "n": str(n)})
    lhs, rhs = borcherds_sides(R, u, v, w, 0, Q(m), Q(n))
    b.compare(_cell(u, v, w, 0, m, n), rhs, lhs)
    return b.done()


def iterate_identity(R: Realization, u: Hashable, v: Hashable, w: Hashable,
                     m: int, n: Q) -> CheckCase:
    """(u_m v)_n w = sum_i (-1)^i C(m,i) (u_{m-i} v_{n+i} - s(-1)^m v_{m+n-i} u_i) w."""
    b = CaseBuilder("iterate", {"u": u, "v": v, "w": w}, {"m": str(m), "n": str(n)})
    lhs, rhs = borcherds_sides(R, u, v, w, m, Q(0), Q(n))
    b.compare(_cell(u, v, w, m, 0, n), lhs, rhs)
    return b.done()


def twisted_jacobi_cell(R: Realization, u: Hashable, v: Hashable, w: Hashable, k: int,
                        m: Q, n: Q) -> CheckCase:
    """Coefficient of z0^{-k-1} z1^{-m-1} z2^{-n-1} in the twisted Jacobi identity."""
    b = CaseBuilder("twisted-jacobi", {"u": u, "v": v, "w": w},
                    {"k": k, "m": str(m), "n": str(n)})
    lhs, rhs = borcherds_sides(R, u, v, w, k, Q(m), Q(n))
    b.compare(_cell(u, v, w, k, m, n), lhs, rhs)
    return b.done()


def mode_range(cls: Q, bound: Q) -> list[Q]:
    """All p in cls + Z with |p| <= bound, increasing."""
    p = cls + ceil(-bound - cls)
    out = []
    while p <= bound:
        out.append(Q(p))
        p += 1
    return out


def jacobi_cells(R: Realization, u: Hashable, v: Hashable, w: Hashable, window: Window,
                 ks: Iterable[int] | None = None, untwisted_reduction: bool = True,
                 builders: dict[str, CaseBuilder] | None = None) -> None:
    """All in-window cells for the triple (u, v, w).

    Untwisted triples are covered by commutator (k = 0) and iterate (m = 0)
    cells; otherwise the full three-term cell is checked for the given k.
    Only cells whose common output weight lies inside the weight cut count.
    """
    assert builders is not None
    cu = R.mode_class(u, w)
    cv = R.mode_class(v, w)
    wt = R.degree(u) + R.degree(v) + R.module_weight(w)
    bound = window.mode_bound
    mu_range = mode_range(cu, bound)
    nu_range = mode_range(cv, bound)

    floor_w = R.module_floor()
    t = _Triple(R, u, v, w)

    def n_values(k: int, m: Q) -> list[Q]:
        # output weight wt - m - n - k - 2 must lie in [module floor, wmax]
        lo = wt - m - k - 2 - window.wmax
        hi = wt - m - k - 2 - floor_w
        return [n for n in nu_range if lo <= n <= hi]

    if untwisted_reduction and cu == 0:
        # integral modes hash much faster as machine integers
        mu_range = [int(x) for x in mu_range]
        if cv == 0:
            nu_range = [int(x) for x in nu_range]
        bc = builders["commutator"]
        for m in mu_range:
            for n in n_values(0, m):
                lhs, rhs = _sides(t, 0, m, n)
                bc.compare(_cell(u, v, w, 0, m, n), rhs, lhs)
        bi = builders["iterate"]
        for m in mu_range:
            mi = int(m)
            for n in n_values(mi, Q(0)):
                lhs, rhs = _sides(t, mi, Q(0), n)
                bi.compare(_cell(u, v, w, mi, 0, n), lhs, rhs)
        return
    bt = builders["twisted-jacobi"]
    kb = int(floor(bound))
    for k in (ks if ks is not None else range(-kb, kb + 1)):
        for m in mu_range:
            for n in n_values(k, m):
                lhs, rhs = _sides(t, k, m, n)
                bt.compare(_cell(u, v, w, k, m, n), lhs, rhs)


def jacobi_cases(R: Realization, us: Sequence[Hashable], vs: Sequence[Hashable],
                 ws: Sequence[Hashable], window: Window, prefix: str = "",
                 ks: Iterable[int] | None = None, untwisted_reduction: bool = True,
                 describe: Callable[[Hashable], Any] | None = None) -> list[CheckCase]:
    """One case per (identity, u, v) pair, aggregated over all w and cells."""
    describe = describe or (lambda x: x)
    cases: list[CheckCase] = []
    ks_list = list(ks) if ks is not None else None
    for u in us:
        for v in vs:
            builders = {
                name: CaseBuilder(prefix + name, {"u": describe(u), "v": describe(v)}, window)
                for name in ("commutator", "iterate", "twisted-jacobi")
            }
            for w in ws:
                jacobi_cells(R, u, v, w, window, ks_list, untwisted_reduction, builders)
            for b in builders.values():
                if b.cells:
                    cases.append(b.done())
    return cases


# tag registry ------------------------------------------------------------------

_JACOBI_PARTS = ("commutator", "iterate", "twisted-jacobi")
_JACOBI_PREFIXES = ("", "twisted-", "contragredient-", "extension-", "module-",
                    "sigma-twisted-module-")

IDENTITY_TAGS: frozenset[str] = frozenset(
    [p + j for p in _JACOBI_PREFIXES for j in _JACOBI_PARTS] + [
        "creation", "derivative", "twisted-derivative", "contragredient-derivative",
        "intertwiner-derivative",
        "e-commutation",
        "delta-vacuum", "delta-derivative", "delta-conjugation", "delta-closed-forms",
        "delta-inverse", "delta-composition",
        "simple-current", "simple-current-spectrum", "simple-current-character",
        "annihilation-conjugation", "creation-conjugation", "creation-shift",
        "exp-raising", "exp-lowering", "doubled-exp-raising", "doubled-exp-lowering",
        "translation-exponentials", "translation-exponentials-odd", "double-translation",
        "phi-intertwining", "bar-closed-forms", "odd-skew-symmetry",
        "extension-character", "extension-structure-constants",
        "double-twist-constant", "double-twist-commutes",
        "fixed-point-isomorphism", "fixed-point-closure", "summand-sigma",
        "contragredient-double", "virasoro-scaling", "virasoro-exponential",
        "weight-scaling", "exponential-conjugation",
        "shifted-virasoro-central", "shifted-virasoro-bracket", "shifted-virasoro-modes",
        "delta-contragredient-identity",
    ])
NEGATIVE_CONTROL_TAGS: frozenset[str] = frozenset(
    {"odd-skew-symmetry-wrong-sign", "virasoro-scaling-literal"})
PLUMBING_TAGS: frozenset[str] = frozenset({"sigma-scalar-fit"})


def tag_kind(tag: str) -> str | None:
    """"identity", "negative-control", "plumbing", or None for an unregistered tag."""
    if tag in IDENTITY_TAGS:
        return "identity"
    if tag in NEGATIVE_CONTROL_TAGS:
        return "negative-control"
    if tag in PLUMBING_TAGS:
        return "plumbing"
    return None


# suite runner ------------------------------------------------------------------

SUITES = ("axioms", "delta", "extension", "twisted", "contragredient", "lemmas")


def _run_one(args: tuple[str, dict[str, Any]]) -> CheckReport:
    from . import suites

    name, config = args
    start = time.perf_counter()
    report = suites.SUITE_FUNCTIONS[name](config)
    report.timing = {"seconds": f"{time.perf_counter() - start:.3f}"}
    return report


def run_suite(names: Sequence[str], config: dict[str, Any],
              workers: int | None = None) -> list[CheckReport]:
    """Run the named suites; the output order follows ``names`` whatever the execution order."""
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    if workers is None:
        workers = int(os.environ.get("VERTEXLAB_THREADS", "1") or 1)
    jobs = [(name, config) for name in names]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_one, jobs))
    return [_run_one(j) for j in jobs]


def combine(reports: Iterable[CheckReport], name: str) -> CheckReport:
    out = CheckReport(name)
    for r in reports:
        out.extend(r)
    return out


Scalarish = Scalar
