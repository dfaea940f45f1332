"""Two-variable formal series with vector coefficients.

A :class:`Series2` maps exponent pairs ``(e1, e2)`` of ``z1, z2`` to
:class:`FockVector` coefficients.  The operators below apply exponentials of
Heisenberg modes, zero-mode powers and vertex operators in one of the two
variables.  Binomials ``(c1*za + c2*zb)^rho`` are always expanded in
nonnegative powers of the second listed variable ``zb``, and a negative base
is resolved as ``(-z)^rho = e^{pi i rho} z^rho``.

Every operator takes explicit truncation bounds; callers choose them so that
the coefficients they compare are complete.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from math import floor

from .fock import (
    FockVector,
    Key,
    Lam,
    PairingSpace,
    apply_e_plus,
    creation_series,
    merge_modes,
)
from .scalars import Q, Scalar, binomial, e_pi_i

__all__ = [
    "Series2",
    "LinearForm",
    "power_terms",
    "e_plus_op",
    "e_minus_op",
    "zero_mode_power",
    "multiply_terms",
    "vertex_op_series",
    "series_of_vector",
    "check_E_commutation",
]

Exp2 = tuple[Q, Q]


class Series2(dict):
    """Finitely supported map (e1, e2) -> FockVector."""

    def add_at(self, e: Exp2, vec: dict, coeff: Scalar = 1) -> None:
        if not coeff or not vec:
            return
        slot = self.get(e)
        if slot is None:
            slot = self[e] = FockVector()
        slot.iadd_scaled(vec, coeff)
        if not slot:
            del self[e]

    def add_term(self, e: Exp2, key: Key, coeff: Scalar) -> None:
        if not coeff:
            return
        slot = self.get(e)
        if slot is None:
            slot = self[e] = FockVector()
        slot.add_term(key, coeff)
        if not slot:
            del self[e]

    def terms(self) -> Iterable[tuple[Exp2, Key, Scalar]]:
        for e, vec in self.items():
            for k, c in vec.items():
                yield e, k, c

    def restricted(self, keep: Callable[[Exp2, Key], bool]) -> "Series2":
        out = Series2()
        for e, k, c in self.terms():
            if keep(e, k):
                out.add_term(e, k, c)
        return out


def series_of_vector(x: dict) -> Series2:
    out = Series2()
    out.add_at((Q(0), Q(0)), x)
    return out


@dataclass(frozen=True)
class LinearForm:
    """c1*z_{v1} + c2*z_{v2} with c in {1, -1}; v2 is None for a monomial.

    Variables are indexed 0 (z1) and 1 (z2).
    """

    c1: int
    v1: int
    c2: int = 0
    v2: int | None = None

    @staticmethod
    def var(v: int, c: int = 1) -> "LinearForm":
        return LinearForm(c, v)


def _shift(e: Exp2, var: int, d: Q) -> Exp2:
    return (e[0] + d, e[1]) if var == 0 else (e[0], e[1] + d)


def _unit_power(c: int, rho: Q) -> Scalar:
    return 1 if c == 1 else e_pi_i(rho)


def power_terms(form: LinearForm, rho: Q, second_bound: int) -> list[tuple[Exp2, Scalar]]:
    """Terms of form^rho; the second variable's degree is cut at ``second_bound``.

    For a nonnegative integer rho the expansion is a polynomial and the cut is
    only applied if it is smaller than rho.
    """
    rho = Q(rho)
    zero = (Q(0), Q(0))
    if form.v2 is None:
        return [(_shift(zero, form.v1, rho), _unit_power(form.c1, rho))]
    out = []
    top = second_bound
    if rho.denominator == 1 and rho >= 0:
        top = min(top, int(rho))
    for s in range(0, top + 1):
        c = binomial(rho, s)
        if not c:
            continue
        c = c * _unit_power(form.c1, rho - s) * (form.c2 ** s)
        e = _shift(_shift(zero, form.v1, rho - s), form.v2, Q(s))
        out.append((e, c))
    return out


def _second_degree(form: LinearForm, e: Exp2) -> Q:
    return e[form.v2] if form.v2 is not None else Q(0)


def multiply_terms(S: Series2, terms: Sequence[tuple[Exp2, Scalar]],
                   keep: Callable[[Exp2], bool] | None = None) -> Series2:
    out = Series2()
    for e, vec in S.items():
        for d, c in terms:
            e2 = (e[0] + d[0], e[1] + d[1])
            if keep is None or keep(e2):
                out.add_at(e2, vec, c)
    return out


def e_plus_op(space: PairingSpace, h: Lam, S: Series2, form: LinearForm, alpha: Q = Q(1),
              second_bound: int = 0) -> Series2:
    """E^+(alpha h, form) applied coefficientwise; always finite in the modes."""
    out = Series2()
    for e, vec in S.items():
        lv = apply_e_plus(space, h, vec, alpha)
        for ex, x in lv.items():
            # ex = -k; the k-th term carries form^{-k}
            for d, c in power_terms(form, ex, second_bound - int(_second_degree(form, e))
                                    if form.v2 is not None else 0):
                out.add_at((e[0] + d[0], e[1] + d[1]), x, c)
    return out


def e_minus_op(space: PairingSpace, h: Lam, S: Series2, form: LinearForm, alpha: Q = Q(1),
               max_added: Callable[[Exp2, Q], int] | int = 0,
               weight: Callable[[Key], Q] | None = None) -> Series2:
    """E^-(alpha h, form) applied coefficientwise.

    ``max_added`` bounds the created weight t, either as a constant or as a
    function of the exponent pair and the weight of the coefficient.
    """
    out = Series2()
    series = creation_series(h, alpha)
    for e, vec in S.items():
        for key, c in vec.items():
            if callable(max_added):
                assert weight is not None
                tmax = max_added(e, weight(key))
            else:
                tmax = max_added
            if tmax < 0:
                continue
            coeffs = series.upto(tmax)
            lam, modes = key
            for t in range(tmax + 1):
                for d, pc in power_terms(form, Q(t), tmax):
                    e2 = (e[0] + d[0], e[1] + d[1])
                    for mono, mc in coeffs[t].items():
                        out.add_term(e2, (lam, merge_modes(modes, mono)), c * pc * mc)
    return out


def zero_mode_power(space: PairingSpace, h: Lam, S: Series2, form: LinearForm, sign: int,
                    second_bound: int = 0) -> Series2:
    """form^{sign*h(0)}: each basis term gets form^{sign <h, lam>}."""
    hd = space.dual_coords(h)
    out = Series2()
    for e, key, c in S.terms():
        lam = key[0]
        rho = sign * sum((hd[i] * lam[i] for i in range(space.rank)), Q(0))
        bound = second_bound - int(_second_degree(form, e)) if form.v2 is not None else 0
        for d, pc in power_terms(form, rho, bound):
            out.add_term((e[0] + d[0], e[1] + d[1]), key, c * pc)
    return out


def vertex_op_series(voa, A: Series2, S: Series2, var: int, cap: Q,
                     floor_weight: Q) -> Series2:
    """Sum over coefficients of Y(A(z1,z2), z_var) S(z1,z2), outputs of weight <= cap.

    ``A`` holds the state argument (its exponents multiply the result); ``S``
    the vectors acted on.
    """
    out = Series2()
    for ea, va in A.items():
        for es, vs in S.items():
            base = (ea[0] + es[0], ea[1] + es[1])
            for ak, ac in va.items():
                wa = voa.weight(ak)
                for sk, sc in vs.items():
                    ws = voa.weight(sk)
                    pair = voa.space.pair(ak[0], sk[0])
                    # modes q lie in -<lam_a, lam_s> + Z; output weight wa + ws - q - 1
                    qmin = wa + ws - 1 - cap
                    q = -pair + _ceil(qmin + pair)
                    qmax = wa + ws - 1 - floor_weight
                    while q <= qmax:
                        r = voa.mode_key(ak, q, sk)
                        if r:
                            out.add_at(_shift(base, var, -q - 1), r, ac * sc)
                        q += 1
    return out


def _ceil(x: Q) -> int:
    return -floor(-x)


# E-commutation ------------------------------------------------------------------

def check_E_commutation(space: PairingSpace, alpha: Q, beta: Q, h: Lam, order: int,
                        vectors: Sequence[dict], tag: str = "e-commutation"):
    """E^+(a h,z1) E^-(b h,z2) = (1 - z2/z1)^{-g a b} E^-(b h,z2) E^+(a h,z1).

    Compared on every coefficient z1^{-p} z2^{q} with p + q <= order.
    """
    from .verifier import CaseBuilder, CheckReport

    alpha, beta = Q(alpha), Q(beta)
    gamma = space.pair(h, h)
    z1, z2 = LinearForm.var(0), LinearForm.var(1)
    rho = -gamma * alpha * beta
    factor = [((Q(-r), Q(r)), binomial(rho, r) * (-1) ** r) for r in range(order + 1)]
    report = CheckReport(tag, meta={"gamma": gamma, "alpha": alpha, "beta": beta,
                                    "order": order, "expansion": "nonnegative powers of z2/z1"})
    for x in vectors:
        b = CaseBuilder(tag, {"vector": x, "alpha": alpha, "beta": beta, "h": h},
                        {"order": order})
        s0 = series_of_vector(x)
        lhs = e_plus_op(space, h, e_minus_op(space, h, s0, z2, beta, order), z1, alpha)
        rhs = multiply_terms(e_minus_op(space, h, e_plus_op(space, h, s0, z1, alpha), z2, beta,
                                        order), factor)

        def inside(e: Exp2) -> bool:
            return e[0] <= 0 and e[1] >= 0 and -e[0] + e[1] <= order

        cells = sorted({e for e in list(lhs) + list(rhs) if inside(e)}
                       | {(Q(-p), Q(q)) for p in range(order + 1) for q in range(order + 1 - p)})
        for e in cells:
            b.compare({"z1": e[0], "z2": e[1]}, lhs.get(e, FockVector()), rhs.get(e, FockVector()))
        report.cases.append(b.done())
    return report
