"""Conjugation identities for Heisenberg exponentials and vertex operators.

All checks apply both sides to basis vectors b of a lattice VOA and compare
the coefficients of z1^{e1} z2^{e2} inside a declared window.  Sides are
built from the operators of :mod:`vertexlab.series` with truncations chosen
so that every compared coefficient is complete.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from math import factorial
from typing import Any

from .fock import FockVector, Key, Lam, apply_e_minus, apply_e_plus, vscale
from .lattice import LatticeVOA
from .scalars import Q
from .series import (
    LinearForm,
    Series2,
    e_minus_op,
    e_plus_op,
    series_of_vector,
    vertex_op_series,
    zero_mode_power,
)
from .verifier import CaseBuilder, CheckCase, CheckReport

__all__ = [
    "CONJUGATION_VARIANTS",
    "conjugation_sides",
    "check_conjugation",
    "exp_operator",
    "check_exponential_identities",
    "creation_shift_sides",
    "creation_conjugation_sides",
    "check_two_variable",
]

Z1 = LinearForm.var(0)
Z2 = LinearForm.var(1)
Z1_MINUS_Z2 = LinearForm(1, 0, -1, 1)
MINUS_Z1_PLUS_Z2 = LinearForm(-1, 0, 1, 1)
Z2_PLUS_Z1 = LinearForm(1, 1, 1, 0)
Z1_PLUS_Z2 = LinearForm(1, 0, 1, 1)
Z2_MINUS_Z1 = LinearForm(1, 1, -1, 0)
MINUS_Z2_PLUS_Z1 = LinearForm(-1, 1, 1, 0)
MINUS_Z2 = LinearForm.var(1, -1)

# the annihilation form is the identity; the other two readings are kept as witnesses
CONJUGATION_VARIANTS = ("annihilation", "creation", "delta")


def _neg(h: Lam) -> Lam:
    return vscale(Q(-1), h)


def _window_keep(voa: LatticeVOA, e1_range: tuple[int, int], e2_bound: int,
                 cap: Q) -> Callable[[tuple[Q, Q], Key], bool]:
    lo, hi = e1_range

    def keep(e: tuple[Q, Q], k: Key) -> bool:
        return lo <= e[0] <= hi and abs(e[1]) <= e2_bound and voa.weight(k) <= cap

    return keep


def check_two_variable(builder: CaseBuilder, lhs: Series2, rhs: Series2,
                       keep: Callable[[tuple[Q, Q], Key], bool], cell: dict[str, Any]) -> None:
    left = lhs.restricted(keep)
    right = rhs.restricted(keep)
    for e in sorted(set(left) | set(right)):
        builder.compare({**cell, "z1": e[0], "z2": e[1]}, left.get(e, FockVector()),
                        right.get(e, FockVector()))


def conjugation_sides(voa: LatticeVOA, h: Lam, a: Key, b: Key, degree: int,
                      variant: str = "annihilation") -> tuple[Series2, Series2, Callable]:
    """Both sides of the conjugation of Y(a, z2) by Heisenberg exponentials in z1.

    annihilation: E^+(h,z1) Y(a,z2) E^+(-h,z1) b
                  = Y((1 - z2/z1)^{-h(0)} E^+(h, z1 - z2) a, z2) b
    creation:     the same right side with E^-(h,z1) ... E^-(-h,z1) on the left
    delta:        the annihilation left side against Y(z1^{h(0)} Delta(-h, z1 - z2) a, z2) b
    """
    space = voa.space
    D = degree
    wa, wb = voa.weight(a), voa.weight(b)
    cap = wa + wb + D
    floor_w = voa.min_weight(b[0])
    tfloor = voa.min_weight(tuple(x + y for x, y in zip(a[0], b[0])))
    sa, sb = series_of_vector({a: 1}), series_of_vector({b: 1})

    if variant == "creation":
        x = e_minus_op(space, _neg(h), sb, Z1, Q(1), D)
        y = vertex_op_series(voa, sa, x, 1, cap + D, tfloor)
        lhs = e_minus_op(space, h, y, Z1, Q(1), lambda e, w: min(D - int(e[0]), int(cap - w)),
                         voa.weight)
        e1 = (0, D)
    else:
        x = e_plus_op(space, _neg(h), sb, Z1)
        y = vertex_op_series(voa, sa, x, 1, cap + D, tfloor)
        lhs = e_plus_op(space, h, y, Z1)
        e1 = (-D, 0)

    if variant == "delta":
        # Delta(-h, w) = w^{-h(0)} E^+(h, -w) with w = z1 - z2
        arg = e_plus_op(space, h, sa, MINUS_Z1_PLUS_Z2, Q(1), D)
        arg = zero_mode_power(space, h, arg, Z1_MINUS_Z2, -1, D)
        arg = zero_mode_power(space, h, arg, Z1, 1)
    else:
        arg = e_plus_op(space, h, sa, Z1_MINUS_Z2, Q(1), D)
        arg = zero_mode_power(space, h, arg, Z1_MINUS_Z2, -1, D)
        arg = zero_mode_power(space, h, arg, Z1, 1)
    rhs = vertex_op_series(voa, arg, series_of_vector({b: 1}), 1, cap, tfloor)
    del floor_w
    return lhs, rhs, _window_keep(voa, e1, D, cap)


def check_conjugation(voa: LatticeVOA, h: Lam, vectors: Sequence[Key], degree: int,
                      variant: str = "annihilation", partners: Sequence[Key] | None = None,
                      tag: str | None = None) -> CheckReport:
    tag = tag or f"{variant}-conjugation"
    report = CheckReport("conjugation", meta={"variant": variant, "h": h, "degree": degree})
    partners = partners if partners is not None else vectors
    for a in vectors:
        b = CaseBuilder(tag, {"a": a, "h": h}, {"degree": degree})
        for w in partners:
            lhs, rhs, keep = conjugation_sides(voa, h, a, w, degree, variant)
            check_two_variable(b, lhs, rhs, keep, {"b": w})
        report.cases.append(b.done())
    return report


# exponentials of L(+-1) ------------------------------------------------------------

def exp_operator(op: Callable[[dict], dict], x: dict, degree: int) -> list[FockVector]:
    """Coefficients of e^{z op} x up to z^degree."""
    out = [FockVector(x)]
    cur: dict = x
    for n in range(1, degree + 1):
        cur = op(cur)
        out.append(FockVector(cur) * Q(1, factorial(n)))
    return out


def _compose_exps(op_b: Callable[[dict], dict], op_a: Callable[[dict], dict], x: dict,
                  degree: int) -> list[FockVector]:
    """Coefficients of e^{z B} e^{-z A} x up to z^degree."""
    inner = exp_operator(lambda v: FockVector(op_a(v)) * -1, x, degree)
    out = [FockVector() for _ in range(degree + 1)]
    for j, v in enumerate(inner):
        for i, w in enumerate(exp_operator(op_b, v, degree - j)):
            out[i + j].iadd_scaled(w)
    return out


def check_exponential_identities(voa: LatticeVOA, h: Lam, vectors: Sequence[Key], degree: int,
                                 tag_prefix: str = "") -> list[CheckCase]:
    """e^{z(L(1)-h(1))} e^{-zL(1)} = E^+(h,-z) and e^{z(L(-1)+h(-1))} e^{-zL(-1)} = E^-(h,z)."""
    space = voa.space

    def l1(v: dict) -> dict:
        return voa.virasoro(1, v)

    def l1h(v: dict) -> dict:
        return voa.virasoro(1, v) - voa.heisenberg(h, 1, v)

    def lm1(v: dict) -> dict:
        return voa.virasoro(-1, v)

    def lm1h(v: dict) -> dict:
        return voa.virasoro(-1, v) + voa.heisenberg(h, -1, v)

    lower = CaseBuilder(tag_prefix + "exp-lowering", {"h": h}, {"degree": degree})
    raise_ = CaseBuilder(tag_prefix + "exp-raising", {"h": h}, {"degree": degree})
    for k in vectors:
        x = {k: 1}
        left = _compose_exps(l1h, l1, x, degree)
        right = apply_e_plus(space, h, x, Q(1), arg_negated=True)
        for n in range(degree + 1):
            lower.compare({"vector": k, "power": n}, left[n], right.coefficient(-n))
        left = _compose_exps(lm1h, lm1, x, degree)
        right = apply_e_minus(space, h, x, degree)
        for n in range(degree + 1):
            raise_.compare({"vector": k, "power": n}, left[n], right.coefficient(n))
    return [lower.done(), raise_.done()]


# conjugation of a vertex operator by creation exponentials ----------------------------

def creation_shift_sides(voa: LatticeVOA, h: Lam, a: Key, b: Key,
                         degree: int) -> tuple[Series2, Series2, Callable]:
    """Y(E^-(h,z1)a, z2) b against
    E^-(h,z1+z2) E^-(-h,z2) Y(a,z2) z2^{-h(0)} E^+(h,z2) (z2+z1)^{h(0)} E^+(-h,z2+z1) b.
    """
    space = voa.space
    D = degree
    wa, wb = voa.weight(a), voa.weight(b)
    cap = wa + wb + D
    tfloor = voa.min_weight(tuple(x + y for x, y in zip(a[0], b[0])))
    sa, sb = series_of_vector({a: 1}), series_of_vector({b: 1})
    arg = e_minus_op(space, h, sa, Z1, Q(1), D)
    lhs = vertex_op_series(voa, arg, sb, 1, cap, tfloor)

    x = e_plus_op(space, _neg(h), sb, Z2_PLUS_Z1, Q(1), D)
    x = zero_mode_power(space, h, x, Z2_PLUS_Z1, 1, D)
    x = e_plus_op(space, h, x, Z2)
    x = zero_mode_power(space, h, x, Z2, -1)
    y = vertex_op_series(voa, sa, x, 1, cap, tfloor)
    y = e_minus_op(space, _neg(h), y, Z2, Q(1), lambda e, w: int(cap - w), voa.weight)
    rhs = e_minus_op(space, h, y, Z1_PLUS_Z2, Q(1), lambda e, w: int(cap - w), voa.weight)
    return lhs, rhs, _window_keep(voa, (0, D), D, cap)


def creation_conjugation_sides(voa: LatticeVOA, h: Lam, a: Key, b: Key,
                               degree: int) -> tuple[Series2, Series2, Callable]:
    """E^-(h,z1) Y(a,z2) E^-(-h,z1) b against Y(Delta(-h, z2-z1) Delta(h, z2) a, z2) b."""
    space = voa.space
    D = degree
    wa, wb = voa.weight(a), voa.weight(b)
    cap = wa + wb + D
    tfloor = voa.min_weight(tuple(x + y for x, y in zip(a[0], b[0])))
    sa, sb = series_of_vector({a: 1}), series_of_vector({b: 1})
    x = e_minus_op(space, _neg(h), sb, Z1, Q(1), D)
    y = vertex_op_series(voa, sa, x, 1, cap, tfloor)
    lhs = e_minus_op(space, h, y, Z1, Q(1), lambda e, w: min(D - int(e[0]), int(cap - w)),
                     voa.weight)
    # Delta(h, z2) a = z2^{h(0)} E^+(-h, -z2) a
    arg = e_plus_op(space, _neg(h), sa, MINUS_Z2)
    arg = zero_mode_power(space, h, arg, Z2, 1)
    # Delta(-h, w) = w^{-h(0)} E^+(h, -w) with w = z2 - z1
    arg = e_plus_op(space, h, arg, MINUS_Z2_PLUS_Z1, Q(1), D)
    arg = zero_mode_power(space, h, arg, Z2_MINUS_Z1, -1, D)
    rhs = vertex_op_series(voa, arg, sb, 1, cap, tfloor)
    return lhs, rhs, _window_keep(voa, (0, D), D, cap)
