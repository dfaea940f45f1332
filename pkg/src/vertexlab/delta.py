"""The operator Delta(h, z) and the modules it produces.

For a weight-one primary Heisenberg vector h,

    Delta(h, z) = z^{h(0)} exp( sum_{k>=1} h(k)/(-k) (-z)^{-k} ) = z^{h(0)} E^+(-h, -z),

which on any vector is a finite Laurent polynomial.  Composing a module's
vertex operator with it, Y(Delta(h,z) ., z), gives a new module (a simple
current twist when <h, L> is integral) or a twisted module (when the
pairings are fractional, with sigma = exp(2 pi i h(0))).
"""

from __future__ import annotations

from collections.abc import Hashable, Sequence
from math import floor, lcm
from typing import Any

from .fock import (
    FockVector,
    Key,
    Lam,
    LaurentVector,
    apply_e_plus,
    colored_partitions,
    key_order,
    vadd,
    vscale,
)
from .lattice import LatticeVOA, lattice_points
from .scalars import Q, Scalar, binomial
from .verifier import (
    CaseBuilder,
    CheckCase,
    CheckReport,
    Window,
    jacobi_cases,
)

__all__ = [
    "DeltaOperator",
    "DeltaModule",
    "delta_apply",
    "verify_delta_conditions",
    "compose",
    "shifted_vertex_op",
    "classify_twist",
    "twisted_from_delta",
    "twist_intertwiner",
    "intertwiner_derivative_check",
    "derivative_cases",
    "canonical_coset",
    "MAX_TWIST_ORDER",
]

# finite-order guard for sigma = exp(2 pi i h(0))
MAX_TWIST_ORDER = 64


def canonical_coset(v: Lam) -> Lam:
    """Representative of v + Z^r with coordinates in [0, 1)."""
    return tuple(Q(x - floor(x)) for x in v)


class DeltaOperator:
    """Delta(h, z) for a Cartan vector h of a lattice VOA."""

    def __init__(self, voa: LatticeVOA, h: Sequence[object], check: bool = True):
        self.voa = voa
        self.space = voa.space
        self.h: Lam = tuple(Q(x) for x in h)
        if len(self.h) != self.space.rank:
            raise ValueError(f"h needs {self.space.rank} coordinates")
        self.h_dual = self.space.dual_coords(self.h)
        self._cache: dict[tuple[Key, int, bool], LaurentVector] = {}
        if check:
            self.check_hypotheses()

    @property
    def gamma(self) -> Q:
        return self.space.pair(self.h, self.h)

    def charge(self, lam: Lam) -> Q:
        return sum((self.h_dual[i] * lam[i] for i in range(self.space.rank)), Q(0))

    def vector(self) -> FockVector:
        return self.voa.cartan_vector(self.h)

    def check_hypotheses(self, top: int = 3) -> None:
        """L(n)h = delta_{n,0} h and h(n)h = delta_{n,1} gamma 1 for n >= 0."""
        hv = self.vector()
        vac = {self.voa.vacuum_key(): 1}
        for n in range(0, top + 1):
            want = hv if n == 0 else FockVector()
            if self.voa.virasoro(n, hv) != want:
                raise ValueError(f"h is not a weight-one primary (L({n})h)")
            hn = self.voa.heisenberg(self.h, n, hv) if n else FockVector()
            want = FockVector(vac) * self.gamma if n == 1 else FockVector()
            if n and hn != want:
                raise ValueError(f"h({n})h differs from the Heisenberg relation")

    def integral_on(self, coset: Lam) -> bool:
        """Whether <h, lam> is an integer for every lam in coset + L."""
        if self.charge(coset).denominator != 1:
            return False
        return all(x.denominator == 1 for x in self.h_dual)

    def twist_order(self, coset: Lam | None = None) -> int:
        """Order of exp(2 pi i h(0)) on V_L (and on the given sector, if any)."""
        dens = [x.denominator for x in self.h_dual]
        if coset is not None:
            dens.append(self.charge(coset).denominator)
        return lcm(*dens)

    def apply_key(self, key: Key, direction: int = 1, zero_mode: bool = True) -> LaurentVector:
        ck = (key, direction, zero_mode)
        hit = self._cache.get(ck)
        if hit is not None:
            return hit
        h = self.h if direction == 1 else vscale(Q(-1), self.h)
        out = LaurentVector()
        shift = direction * self.charge(key[0]) if zero_mode else Q(0)
        for e, v in apply_e_plus(self.space, h, {key: 1}, Q(-1), arg_negated=True).items():
            out.add_at(e + shift, v)
        self._cache[ck] = out
        return out

    def apply(self, x: dict, direction: int = 1, zero_mode: bool = True) -> LaurentVector:
        """Delta(h, z)x (direction +1) or Delta(-h, z)x (direction -1)."""
        out = LaurentVector()
        for key, c in x.items():
            for e, v in self.apply_key(key, direction, zero_mode).items():
                out.add_at(e, v, c)
        return out

    def as_json(self) -> dict[str, Any]:
        return {"h": [str(x) for x in self.h], "gamma": str(self.gamma)}


def delta_apply(d: DeltaOperator, a: dict, direction: int = 1) -> LaurentVector:
    return d.apply(a, direction)


# module built from Delta -----------------------------------------------------------

class DeltaModule:
    """The sector V_{coset+L} with the action Y(Delta(h,z) ., z).

    ``zero_mode=False`` drops the z^{h(0)} factor; that operator is no longer in
    the group of admissible Delta's and serves as a negative control.
    """

    def __init__(self, d: DeltaOperator, coset: Lam | None = None, zero_mode: bool = True):
        self.d = d
        self.voa = d.voa
        self.coset = coset if coset is not None else d.space.zero
        self.zero_mode = zero_mode
        self._floor = self.voa.min_weight(self.coset)
        self._terms: dict[Key, tuple[tuple[Q, Key, Scalar], ...]] = {}
        self._acts: dict[tuple[Key, Q, Key], FockVector] = {}

    def _delta_terms(self, u: Key) -> tuple[tuple[Q, Key, Scalar], ...]:
        t = self._terms.get(u)
        if t is None:
            lv = self.d.apply_key(u, 1, self.zero_mode)
            t = tuple((e, k, c) for e in sorted(lv) for k, c in lv[e].items())
            self._terms[u] = t
        return t

    def act(self, u: Key, p: Q, w: Key) -> FockVector:
        ck = (u, p, w)
        hit = self._acts.get(ck)
        if hit is not None:
            return hit
        out = FockVector()
        for e, k, c in self._delta_terms(u):
            r = self.voa.mode_key(k, p + e, w)
            if r:
                out.iadd_scaled(r, c)
        self._acts[ck] = out
        return out

    def inner(self, u: Key, k: int, v: Key) -> FockVector:
        return self.voa.mode_key(u, Q(k), v)

    def degree(self, u: Key) -> Q:
        shift = self.d.charge(u[0]) if self.zero_mode else Q(0)
        return self.voa.weight(u) - shift

    def inner_degree(self, u: Key) -> Q:
        return self.voa.weight(u)

    def module_weight(self, w: Key) -> Q:
        return self.voa.weight(w)

    def module_floor(self) -> Q:
        return self._floor

    def mode_class(self, u: Key, w: Key) -> Q:
        x = -self.voa.space.pair(u[0], w[0])
        if self.zero_mode:
            x -= self.d.charge(u[0])
        return x - floor(x)

    def sign(self, u: Key, v: Key) -> int:
        return 1

    def vertex_op(self, a: dict, w: dict, cap: object) -> LaurentVector:
        """Y(Delta(h,z)a, z)w with all coefficients of output weight <= cap."""
        cap = Q(cap)
        out = LaurentVector(window=("weight", cap))
        da = self.d.apply(a, 1, self.zero_mode)
        for e, x in da.items():
            for xk, xc in x.items():
                for wk, wc in w.items():
                    for f, v in self.voa.expansion(xk, wk, cap).items():
                        if self.voa.weight(xk) + self.voa.weight(wk) + f <= cap:
                            out.add_at(e + f, v, xc * wc)
        return out


def shifted_vertex_op(d: DeltaOperator, a: dict, w: dict, cap: object,
                      coset: Lam | None = None) -> LaurentVector:
    """The shifted action Y(Delta(h,z)a, z)w, exact for output weights <= cap."""
    return DeltaModule(d, coset).vertex_op(a, w, cap)


def twist_intertwiner(d: DeltaOperator, u: dict, w: dict, cap: object) -> LaurentVector:
    """I(Delta(h,z)u, z)w for the lattice intertwining operator I across sectors."""
    return DeltaModule(d).vertex_op(u, w, cap)


# defining conditions ----------------------------------------------------------------

def _laurent_sub(a: LaurentVector, b: LaurentVector) -> LaurentVector:
    out = LaurentVector()
    for e, v in a.items():
        out.add_at(e, v)
    for e, v in b.items():
        out.add_at(e, v, -1)
    return out


def _derivative(lv: LaurentVector) -> LaurentVector:
    out = LaurentVector()
    for e, v in lv.items():
        if e:
            out.add_at(e - 1, v, e)
    return out


def _compare_laurent(b: CaseBuilder, cell: dict[str, Any], lhs: LaurentVector,
                     rhs: LaurentVector) -> None:
    for e in sorted(set(lhs) | set(rhs)):
        b.compare({**cell, "exponent": e}, lhs.get(e, FockVector()), rhs.get(e, FockVector()))


def _conjugation_cells(d: DeltaOperator, a: Key, b: Key, cap: Q, zero_mode: bool,
                       builder: CaseBuilder) -> None:
    """Y(Delta(z2+z0)a, z0)Delta(z2)b = Delta(z2)Y(a, z0)b, for z0-coefficients up to cap.

    (z2+z0)^e is expanded in nonnegative powers of z0.  Cells are indexed by the
    exponent A of z0 (output weight wt a + wt b + A <= cap) and the exponent B of z2.
    """
    voa = d.voa
    wa, wb = voa.weight(a), voa.weight(b)
    da = d.apply_key(a, 1, zero_mode)
    db = d.apply_key(b, 1, zero_mode)
    pair = voa.space.pair(a[0], b[0])
    floor_w = voa.min_weight(b[0])
    target_floor = voa.min_weight(vadd(a[0], b[0]))
    # z0 exponents A lie in -pair + Z with wt a + wt b + A between the sector floor and cap
    lo = floor_w - wa - wb
    A = pair + (-floor(-(lo - pair)))
    while wa + wb + A <= cap:
        rhs: dict[Q, FockVector] = {}
        y = voa.mode_key(a, -A - 1, b)
        for e, v in d.apply(y, 1, zero_mode).items():
            rhs[e] = v
        lhs: dict[Q, FockVector] = {}
        for e, xe in da.items():
            wx = voa.weight(next(iter(xe)))
            for f, yf in db.items():
                wy = voa.weight(next(iter(yf)))
                # (z2+z0)^e -> C(e,j) z2^{e-j} z0^j and Y(x,z0) contributes mode q = j - A - 1;
                # modes past the top one leave the target sector's weights
                qtop = wx + wy - 1 - target_floor
                for j in range(0, floor(qtop + A + 1) + 1):
                    c = binomial(e, j)
                    if not c:
                        continue
                    q = j - A - 1
                    acc = FockVector()
                    for xk, xc in xe.items():
                        for yk, yc in yf.items():
                            r = voa.mode_key(xk, q, yk)
                            if r:
                                acc.iadd_scaled(r, xc * yc)
                    if acc:
                        B = e - j + f
                        lhs.setdefault(B, FockVector()).iadd_scaled(acc, c)
        for B in sorted(set(lhs) | set(rhs)):
            builder.compare({"a": a, "b": b, "z0": A, "z2": B}, lhs.get(B, FockVector()),
                            rhs.get(B, FockVector()))
        A += 1


def verify_delta_conditions(d: DeltaOperator, vectors: Sequence[Key], partners: Sequence[Key],
                            window: Window, zero_mode: bool = True) -> CheckReport:
    """Vacuum fixing, the L(-1)-bracket condition and the conjugation condition.

    The conjugation condition is checked for each pair (a, b) from ``vectors``
    x ``partners`` on every z0-coefficient whose output weight is within the
    window's weight cut.
    """
    voa = d.voa
    report = CheckReport("delta", meta={"delta": d.as_json(), "zero_mode": zero_mode})
    win = window.to_json()
    vac = voa.vacuum_key()
    b = CaseBuilder("delta-vacuum", {"h": d.h}, win)
    got = d.apply({vac: 1}, 1, zero_mode)
    _compare_laurent(b, {}, got, LaurentVector({Q(0): {vac: 1}}))
    report.cases.append(b.done())

    b = CaseBuilder("delta-derivative", {"h": d.h}, win)
    for a in vectors:
        x = {a: 1}
        left = LaurentVector()
        for e, v in d.apply(x, 1, zero_mode).items():
            left.add_at(e, voa.virasoro(-1, v))
        right = d.apply(voa.virasoro(-1, x), 1, zero_mode)
        lhs = _laurent_sub(left, right)
        rhs = LaurentVector()
        for e, v in _derivative(d.apply(x, 1, zero_mode)).items():
            rhs.add_at(e, v, -1)
        _compare_laurent(b, {"a": a}, lhs, rhs)
    report.cases.append(b.done())

    for a in vectors:
        b = CaseBuilder("delta-conjugation", {"h": d.h, "a": a}, win)
        for w in partners:
            _conjugation_cells(d, a, w, window.wmax, zero_mode, b)
        report.cases.append(b.done())
    return report


def compose(d1: DeltaOperator, d2: DeltaOperator, a: dict) -> tuple[LaurentVector, CheckCase]:
    """Delta(h1,z)Delta(h2,z)a, checked against Delta(h1+h2,z)a."""
    out = LaurentVector()
    for e, v in d2.apply(a).items():
        for f, w in d1.apply(v).items():
            out.add_at(e + f, w)
    d12 = DeltaOperator(d1.voa, vadd(d1.h, d2.h), check=False)
    want = d12.apply(a)
    b = CaseBuilder("delta-composition", {"h1": d1.h, "h2": d2.h, "a": a}, {})
    _compare_laurent(b, {}, out, want)
    return out, b.done()


# simple currents ------------------------------------------------------------------

def _sector_states(voa: LatticeVOA, coset: Lam, h: Lam, wmax: Q) -> list[Key]:
    """States of V_{coset+L} whose twisted weight |lam+h|^2/2 + level is <= wmax."""
    space = voa.space
    out = []
    neg_h = vscale(Q(-1), h)
    for lam in lattice_points(space, coset, wmax, center=neg_h):
        shifted = vadd(lam, h)
        room = wmax - space.pair(shifted, shifted) / 2
        for n in range(0, floor(room) + 1):
            for modes in colored_partitions(n, voa.rank):
                out.append((lam, modes))
    return sorted(out, key=key_order)


def classify_twist(d: DeltaOperator, coset: Lam, wmax: object) -> tuple[Lam, CheckReport]:
    """Identify (V_{coset+L}, Y(Delta(h,z) ., z)) with a lattice sector.

    Computes the shifted zero modes of every alpha_i and the shifted L(0),
    both through the twisted action, and compares the joint spectrum with
    the basis of V_{coset+h+L}.  Returns the canonical label of coset + h.
    """
    voa = d.voa
    space = d.space
    wmax = Q(wmax)
    if not d.integral_on(space.zero):
        raise ValueError("h must pair integrally with L to give an untwisted module")
    M = DeltaModule(d, coset)
    target = canonical_coset(vadd(coset, d.h))
    report = CheckReport("twist", meta={"delta": d.as_json(), "source": coset,
                                        "target": target, "wmax": wmax})
    b = CaseBuilder("simple-current", {"h": d.h, "coset": coset}, {"wmax": str(wmax)})
    omega = voa.omega()
    found: list[tuple[tuple[Q, ...], Q]] = []
    probe_spectrum: list[Q] = []
    for w in _sector_states(voa, coset, d.h, wmax):
        x = {w: 1}
        eig = []
        for i in range(space.rank):
            got = FockVector()
            for u, c in voa.cartan_vector(space.basis(i)).items():
                got.iadd_scaled(M.act(u, Q(0), w), c)
            val = got.get(w, Q(0))
            b.require({"state": w, "probe": i}, got == FockVector(x) * val if val else not got,
                      {"image": got})
            eig.append(val)
        lw = FockVector()
        for u, c in omega.items():
            lw.iadd_scaled(M.act(u, Q(1), w), c)
        val = lw.get(w, Q(0))
        b.require({"state": w, "probe": "L(0)"}, lw == FockVector(x) * val, {"image": lw})
        found.append((tuple(eig), val))
        probe_spectrum.append(d.charge(w[0]) + d.gamma)
    # expected: dual coordinates and weights of V_{coset+h+L}
    expected = []
    for w in voa.basis(vadd(coset, d.h), wmax):
        expected.append((space.dual_coords(w[0]), voa.weight(w)))
    b.require({"compare": "spectrum"}, sorted(found) == sorted(expected),
              {"twisted": sorted(found)[:8], "target": sorted(expected)[:8]})
    report.cases.append(b.done())
    chars: dict[Q, int] = {}
    for _, wt in found:
        chars[wt] = chars.get(wt, 0) + 1
    report.meta["character"] = sorted(chars.items())
    report.meta["h_spectrum"] = sorted(set(probe_spectrum))
    report.meta["target_character"] = voa.character(vadd(coset, d.h), wmax)
    cb = CaseBuilder("simple-current-character", {"h": d.h, "coset": coset}, {"wmax": str(wmax)})
    cb.compare({"wmax": wmax}, sorted(chars.items()), voa.character(vadd(coset, d.h), wmax))
    report.cases.append(cb.done())
    return target, report


# twisted modules ---------------------------------------------------------------------

def derivative_cases(R: Any, lminus1, us: Sequence[Hashable], ws: Sequence[Hashable],
                     window: Window, tag: str = "derivative") -> CheckCase:
    """Y(L(-1)u, z) = d/dz Y(u, z): (L(-1)u)_p w = -p u_{p-1} w on all cells."""
    from .verifier import mode_range

    b = CaseBuilder(tag, {"count_u": len(us), "count_w": len(ws)}, window)
    for u in us:
        lu = lminus1(u)
        for w in ws:
            cls = R.mode_class(u, w)
            for p in mode_range(cls, window.mode_bound):
                left = FockVector()
                for k, c in lu.items():
                    r = R.act(k, p, w)
                    if r:
                        left.iadd_scaled(r, c)
                right = R.act(u, p - 1, w) * (-p)
                b.compare({"u": u, "w": w, "p": p}, left, right)
    return b.done()


def twisted_from_delta(d: DeltaOperator, coset: Lam | None, window: Window,
                       us: Sequence[Key] | None = None,
                       ws: Sequence[Key] | None = None) -> CheckReport:
    """Twisted-module checks for Y(Delta(h,z) ., z) when <h, L> is fractional.

    The algebra inputs are basis states, each an eigenvector of
    sigma = exp(2 pi i h(0)); the Jacobi identity is checked through the
    three-term twisted cell for fractional classes and through commutator
    and iterate cells for integral ones.
    """
    voa = d.voa
    coset = coset if coset is not None else d.space.zero
    order = d.twist_order(coset)
    if order > MAX_TWIST_ORDER:
        raise ValueError(f"twist order {order} exceeds {MAX_TWIST_ORDER}")
    M = DeltaModule(d, coset)
    us = us if us is not None else voa.basis(d.space.zero, window.wmax)
    ws = ws if ws is not None else voa.basis(coset, window.wmax)
    report = CheckReport("twisted", meta={"delta": d.as_json(), "coset": coset,
                                          "sigma_order": order})
    classes = sorted({M.mode_class(u, ws[0]) for u in us})
    report.meta["mode_classes"] = classes
    report.cases.extend(jacobi_cases(M, us, us, ws, window, prefix="twisted-"))
    report.cases.append(derivative_cases(M, lambda u: voa.virasoro(-1, {u: 1}), us, ws, window,
                                         tag="twisted-derivative"))
    return report


def intertwiner_derivative_check(d: DeltaOperator, us: Sequence[Key], ws: Sequence[Key],
                                 window: Window) -> CheckCase:
    """The twisted intertwiner keeps the L(-1)-derivative property."""
    voa = d.voa
    M = DeltaModule(d)
    return derivative_cases(M, lambda u: voa.virasoro(-1, {u: 1}), us, ws, window,
                            tag="intertwiner-derivative")
