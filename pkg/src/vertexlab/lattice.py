"""Lattice vertex operator algebras V_L and their modules V_{L+beta}.

The even lattice L is Z^r in the standard coordinates of a
:class:`~vertexlab.fock.PairingSpace`.  Sectors are cosets beta + L with
rational beta.  Signs come from a bimultiplicative cocycle on an integral
*ambient* lattice A containing L; a sector point lam is split as
lam = rep + nu with nu in A and rep a fixed coset representative, and the
operator e_lam sends e^mu to eps(nu_lam, nu_mu) e^{lam+mu}.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

from itertools import product
from math import floor, isqrt, prod

from .fock import (
    FockVector,
    Key,
    Lam,
    LaurentVector,
    Modes,
    PairingSpace,
    colored_partition_count,
    colored_partitions,
    creation_series,
    e_plus_substitute,
    heisenberg_on_key,
    invert_matrix,
    key_order,
    merge_modes,
    vadd,
)
from .scalars import Q, Scalar, binomial

__all__ = [
    "EvenLattice",
    "DualData",
    "Cocycle",
    "LatticeVOA",
    "dual_lattice",
    "build_cocycle",
    "lattice_points",
    "lattice_basis_of",
    "LatticeModule",
]


class EvenLattice:
    """Z^r with an even integral positive-definite Gram matrix.

    ``allow_odd`` accepts odd integral lattices, whose lattice algebra is a
    vertex superalgebra (the cocycle then carries the super sign).
    """

    def __init__(self, gram: Sequence[Sequence[object]], allow_odd: bool = False):
        self.space = PairingSpace(gram)
        g = self.space.gram
        for i, row in enumerate(g):
            for j, x in enumerate(row):
                if x.denominator != 1:
                    raise ValueError(f"gram entry ({i},{j}) = {x} is not an integer")
            if g[i][i] % 2 and not allow_odd:
                raise ValueError(f"gram diagonal entry {i} is odd; lattice is not even")
        if any(d <= 0 for d in _leading_minors(g)):
            raise ValueError("gram matrix is not positive definite")

    @property
    def rank(self) -> int:
        return self.space.rank

    @property
    def gram(self) -> tuple[tuple[Q, ...], ...]:
        return self.space.gram


def _det(m: Sequence[Sequence[Q]]) -> Q:
    a = [list(map(Q, row)) for row in m]
    n = len(a)
    det = Q(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            return Q(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def _leading_minors(g: Sequence[Sequence[Q]]) -> list[Q]:
    return [_det([row[:k] for row in g[:k]]) for k in range(1, len(g) + 1)]


class DualData:
    """Dual lattice P of L together with coset representatives of P/L."""

    def __init__(self, lattice: EvenLattice, dual_basis: tuple[Lam, ...], reps: tuple[Lam, ...],
                 invariant_factors: tuple[int, ...]):
        self.lattice = lattice
        self.dual_basis = dual_basis
        self.coset_reps = reps
        self.invariant_factors = invariant_factors

    @property
    def order(self) -> int:
        return len(self.coset_reps)


def _frac_part(v: Lam) -> Lam:
    return tuple(x - floor(x) for x in v)


def dual_lattice(lattice: EvenLattice) -> DualData:
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form

    g = lattice.gram
    if _det(g) == 0:
        raise ValueError("singular gram matrix")
    ginv = invert_matrix(g)
    dual_basis = tuple(tuple(row) for row in ginv)
    snf = smith_normal_form(Matrix([[int(x) for x in row] for row in g]))
    factors = tuple(abs(int(snf[i, i])) for i in range(lattice.rank))
    # closure of the dual generators modulo L
    zero = lattice.space.zero
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for v in frontier:
            for p in dual_basis:
                w = _frac_part(vadd(v, p))
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    reps = tuple(sorted(seen))
    assert len(reps) == prod(factors) == abs(_det(g))
    return DualData(lattice, dual_basis, reps, factors)


def lattice_basis_of(generators: Sequence[Lam]) -> tuple[Lam, ...]:
    """A Z-basis of the lattice spanned by rational generators (Hermite form)."""
    from sympy import Matrix
    from sympy.matrices.normalforms import hermite_normal_form

    den = 1
    for v in generators:
        for x in v:
            den = den * x.denominator // _gcd(den, x.denominator)
    m = Matrix([[int(x * den) for x in v] for v in generators])
    # column-style HNF on the transpose gives a basis of the row span
    h = hermite_normal_form(m.T)
    cols = [tuple(Q(int(h[i, j]), den) for i in range(h.rows)) for j in range(h.cols)]
    return tuple(c for c in cols if any(c))


def _gcd(a: int, b: int) -> int:
    from math import gcd
    return gcd(a, b)


class Cocycle:
    """eps(a, b) = (-1)^(x^T T y) where x, y are coordinates in the ambient basis."""

    def __init__(self, basis: tuple[Lam, ...], table: tuple[tuple[int, ...], ...]):
        self.basis = basis
        self.table = table
        self.inverse_basis = invert_matrix(basis)

    def coords(self, lam: Lam) -> tuple[Q, ...]:
        ib = self.inverse_basis
        r = len(lam)
        return tuple(sum((lam[i] * ib[i][j] for i in range(r) if lam[i]), Q(0))
                     for j in range(len(ib[0])))

    def nu(self, lam: Lam) -> tuple[int, ...]:
        """Integral ambient coordinates of lam minus its coset representative."""
        return tuple(floor(x) for x in self.coords(lam))

    def eps_coords(self, x: Sequence[int], y: Sequence[int]) -> int:
        t = self.table
        s = 0
        for i, xi in enumerate(x):
            if xi:
                row = t[i]
                for j, yj in enumerate(y):
                    if yj and row[j]:
                        s += xi * yj
        return -1 if s % 2 else 1

    def sign(self, lam: Lam, mu: Lam) -> int:
        return self.eps_coords(self.nu(lam), self.nu(mu))

    def as_json(self) -> dict[str, object]:
        return {
            "basis": [[str(x) for x in b] for b in self.basis],
            "table": [[(-1 if t else 1) for t in row] for row in self.table],
        }


def build_cocycle(space: PairingSpace, basis: Sequence[Lam] | None = None,
                  table: Sequence[Sequence[int]] | None = None) -> Cocycle:
    """Cocycle on the ambient lattice spanned by ``basis`` (default: standard basis).

    Without an explicit table the choice is eps(b_i, b_j) = (-1)^(G_ij + G_ii G_jj)
    for i > j and +1 otherwise, which is bimultiplicative and satisfies
    eps(a,b)/eps(b,a) = (-1)^(<a,b> + <a,a><b,b>).  An explicit ``table`` gives
    the values +-1 on basis pairs.
    """
    if basis is None:
        basis = tuple(space.basis(i) for i in range(space.rank))
    basis = tuple(tuple(Q(x) for x in b) for b in basis)
    n = len(basis)
    if table is None:
        g = [[space.pair(a, b) for b in basis] for a in basis]
        for row in g:
            for x in row:
                if x.denominator != 1:
                    raise ValueError("ambient lattice is not integral")
        t = tuple(tuple(int((g[i][j] + g[i][i] * g[j][j]) % 2) if i > j else 0 for j in range(n))
                  for i in range(n))
    else:
        if len(table) != n or any(len(row) != n for row in table):
            raise ValueError(f"cocycle table must be {n}x{n}")
        rows = []
        for row in table:
            vals = []
            for v in row:
                if v not in (1, -1):
                    raise ValueError(f"cocycle values must be +1 or -1, got {v!r}")
                vals.append(0 if v == 1 else 1)
            rows.append(tuple(vals))
        t = tuple(rows)
    return Cocycle(basis, t)


def cocycle_violations(space: PairingSpace, cocycle: Cocycle, bound: int = 2) -> list[tuple]:
    """Ambient points (small coordinates) where the commutator condition fails."""
    basis = cocycle.basis
    n = len(basis)
    bad = []
    rng = range(-bound, bound + 1)
    for x in product(rng, repeat=n):
        a = tuple(sum((x[k] * basis[k][i] for k in range(n)), Q(0)) for i in range(space.rank))
        for y in product(rng, repeat=n):
            b = tuple(sum((y[k] * basis[k][i] for k in range(n)), Q(0)) for i in range(space.rank))
            lhs = cocycle.eps_coords(x, y) * cocycle.eps_coords(y, x)
            e = space.pair(a, b) + space.pair(a, a) * space.pair(b, b)
            if lhs != (-1 if e % 2 else 1):
                bad.append((x, y))
    return bad


def _isqrt_floor(q: Q) -> int:
    if q <= 0:
        return 0
    return isqrt(q.numerator * q.denominator) // q.denominator


def lattice_points(space: PairingSpace, coset: Lam, bound: Q,
                   center: Lam | None = None) -> list[Lam]:
    """Points lam in coset + Z^r with <lam - c, lam - c>/2 <= bound, sorted."""
    bound = Q(bound)
    if bound < 0:
        return []
    r = space.rank
    if center is None:
        center = space.zero
    ginv = space.gram_inverse
    radius = 2 * bound
    ranges = []
    for i in range(r):
        s = coset[i] - center[i]
        b = _isqrt_floor(radius * ginv[i][i]) + 1
        lo = floor(-b - s)
        hi = floor(b - s) + 1
        ranges.append(range(lo, hi + 1))
    out = []
    for x in product(*ranges):
        lam = tuple(coset[i] + x[i] for i in range(r))
        y = tuple(lam[i] - center[i] for i in range(r))
        if space.pair(y, y) <= radius:
            out.append(lam)
    return sorted(out, key=lambda v: (space.pair(v, v), v))


class LatticeVOA:
    """The lattice VOA V_L acting on its sectors, with intertwiners between sectors.

    ``ambient`` is a Z-basis of an integral lattice A containing L and every
    sector difference used; the cocycle lives on A.
    """

    def __init__(self, gram: Sequence[Sequence[object]] | EvenLattice,
                 ambient: Sequence[Lam] | None = None,
                 cocycle: str | Sequence[Sequence[int]] | Cocycle = "auto"):
        self.lattice = gram if isinstance(gram, EvenLattice) else EvenLattice(gram)
        self.space = self.lattice.space
        if isinstance(cocycle, Cocycle):
            self.cocycle = cocycle
        else:
            table = None if cocycle == "auto" else cocycle
            self.cocycle = build_cocycle(self.space, ambient, table)  # type: ignore[arg-type]
        self._expansions: dict[tuple[Key, Key], tuple[Q, dict[Q, FockVector]]] = {}
        self._duals: dict[Lam, tuple[Q, ...]] = {}
        self._weights: dict[Key, Q] = {}
        self._modes: dict[tuple[Key, Q, Key], FockVector] = {}
        g = self.space.gram_inverse
        self._omega_dual = g

    # basic data ---------------------------------------------------------------
    @property
    def rank(self) -> int:
        return self.space.rank

    def weight(self, key: Key) -> Q:
        w = self._weights.get(key)
        if w is None:
            w = self._weights[key] = self.space.weight(key)
        return w

    def dual(self, lam: Lam) -> tuple[Q, ...]:
        d = self._duals.get(lam)
        if d is None:
            d = self._duals[lam] = self.space.dual_coords(lam)
        return d

    def vacuum_key(self, coset: Lam | None = None) -> Key:
        return (coset if coset is not None else self.space.zero, ())

    def basis(self, coset: Lam, wmax: object) -> list[Key]:
        """All basis states of V_{coset+L} of weight at most ``wmax``, in canonical order."""
        wmax = Q(wmax)
        out: list[Key] = []
        for lam in lattice_points(self.space, coset, wmax):
            room = wmax - self.space.pair(lam, lam) / 2
            for n in range(0, floor(room) + 1):
                for modes in colored_partitions(n, self.rank):
                    out.append((lam, modes))
        return sorted(out, key=lambda k: (self.weight(k), key_order(k)))

    def character(self, coset: Lam, wmax: object) -> list[tuple[Q, int]]:
        """Graded dimensions (weight, dim) of V_{coset+L} up to ``wmax``."""
        wmax = Q(wmax)
        dims: dict[Q, int] = {}
        for lam in lattice_points(self.space, coset, wmax):
            w0 = self.space.pair(lam, lam) / 2
            for n in range(0, floor(wmax - w0) + 1):
                dims[w0 + n] = dims.get(w0 + n, 0) + colored_partition_count(n, self.rank)
        return sorted(dims.items())

    # vertex operators -------------------------------------------------------------
    def _expand(self, ukey: Key, wkey: Key, cap: Q) -> dict[Q, FockVector]:
        """Y(u,z)w for basis states, all terms with output weight <= cap."""
        space = self.space
        g = space.gram
        lam, umodes = ukey
        mu, wmodes = wkey
        mu_dual = self.dual(mu)
        lam_dual = self.dual(lam)
        wt_uw = self.weight(ukey) + self.weight(wkey)

        # annihilation parts of the derived fields act on w first
        states: dict[tuple[int, Q, Modes], Scalar] = {(0, Q(0), wmodes): 1}
        for j, (i, n) in enumerate(umodes):
            new: dict[tuple[int, Q, Modes], Scalar] = {}

            def acc(k: tuple[int, Q, Modes], c: Scalar) -> None:
                v = new.get(k, 0) + c
                if v:
                    new[k] = v
                else:
                    new.pop(k, None)

            sgn = -1 if (n - 1) % 2 else 1
            for (mask, e, bos), c in states.items():
                acc((mask | (1 << j), e, bos), c)
                z0 = mu_dual[i]
                if z0:
                    acc((mask, e - n, bos), c * z0 * sgn)
                seen = set()
                for idx, m in enumerate(bos):
                    if m in seen:
                        continue
                    seen.add(m)
                    d, k = m
                    gg = g[i][d]
                    if not gg:
                        continue
                    coef = binomial(-k - 1, n - 1) * k * gg * bos.count(m)
                    acc((mask, e - k - n, bos[:idx] + bos[idx + 1:]), c * coef)
            states = new

        out: dict[Q, FockVector] = {}
        label = vadd(lam, mu)
        sign = self.cocycle.sign(lam, mu)
        zmode = space.pair(lam, mu)
        series = creation_series(lam)

        def neg_lam(k: int) -> Q:
            return Q(-1)

        for (mask, e1, bos1), c1 in states.items():
            deferred = [umodes[j] for j in range(len(umodes)) if mask >> j & 1]
            n_def = sum(n for _, n in deferred)
            for bos2, e2, c2 in e_plus_substitute((mu, bos1), lam_dual, neg_lam):
                e3 = e1 + e2 + zmode
                coeff = c1 * c2 * sign
                base = wt_uw + e3 - n_def
                budget = cap - base
                if budget < n_def:
                    continue
                partial: dict[tuple[Modes, int], Scalar] = {(bos2, 0): coeff}
                remaining = n_def
                for (i, n) in deferred:
                    remaining -= n
                    nxt: dict[tuple[Modes, int], Scalar] = {}
                    for (b, added), c in partial.items():
                        q = n
                        while added + q + remaining <= budget:
                            cf = binomial(q - 1, n - 1)
                            k2 = (merge_modes(b, ((i, q),)), added + q)
                            nxt[k2] = nxt.get(k2, 0) + c * cf
                            q += 1
                    partial = {k: v for k, v in nxt.items() if v}
                for (b, added), c in partial.items():
                    room = budget - added
                    if room < 0:
                        continue
                    tmax = floor(room)
                    coeffs = series.upto(tmax)
                    for t in range(tmax + 1):
                        exp = e3 - n_def + added + t
                        slot = out.get(exp)
                        if slot is None:
                            slot = out[exp] = FockVector()
                        for mono, pc in coeffs[t].items():
                            slot.add_term((label, merge_modes(b, mono)), c * pc)
        return {e: v for e, v in out.items() if v}

    def expansion(self, ukey: Key, wkey: Key, cap: object) -> dict[Q, FockVector]:
        cap = Q(cap)
        hit = self._expansions.get((ukey, wkey))
        if hit is not None and hit[0] >= cap:
            return hit[1]
        # grow in whole steps so neighbouring requests share the work
        new_cap = cap if hit is None else max(cap, hit[0] + 2)
        data = self._expand(ukey, wkey, new_cap)
        self._expansions[(ukey, wkey)] = (new_cap, data)
        return data

    def mode_key(self, ukey: Key, p: Q, wkey: Key) -> FockVector:
        """u_p w for basis states (zero if p is outside the exponent coset)."""
        ck = (ukey, p, wkey)
        hit = self._modes.get(ck)
        if hit is not None:
            return hit
        p = Q(p)
        out_wt = self.weight(ukey) + self.weight(wkey) - p - 1
        label = vadd(ukey[0], wkey[0])
        if out_wt < self.space.pair(label, label) / 2:
            res = FockVector()
        else:
            res = self.expansion(ukey, wkey, out_wt).get(-p - 1, FockVector())
        self._modes[ck] = res
        return res

    def mode(self, u: dict, p: object, w: dict) -> FockVector:
        p = Q(p)
        out = FockVector()
        for uk, uc in u.items():
            for wk, wc in w.items():
                v = self.mode_key(uk, p, wk)
                if v:
                    out.iadd_scaled(v, uc * wc)
        return out

    def vertex_op(self, u: dict, w: dict, cap: object) -> LaurentVector:
        """Y(u,z)w with every coefficient of output weight <= cap."""
        cap = Q(cap)
        out = LaurentVector(window=("weight", cap))
        for uk, uc in u.items():
            for wk, wc in w.items():
                for e, v in self.expansion(uk, wk, cap).items():
                    if self.weight(uk) + self.weight(wk) + e <= cap:
                        out.add_at(e, v, uc * wc)
        return out

    def min_weight(self, coset: Lam) -> Q:
        pts = lattice_points(self.space, coset, Q(self.space.pair(coset, coset) / 2) + 1)
        return min(self.space.pair(p, p) / 2 for p in pts)

    # Heisenberg and Virasoro ----------------------------------------------------
    def heisenberg(self, h: Lam, n: int, x: dict) -> FockVector:
        hd = self.space.dual_coords(h)
        out = FockVector()
        for key, c in x.items():
            for k2, v in heisenberg_on_key(self.space, hd, h, n, key):
                out.add_term(k2, c * v)
        return out

    def virasoro(self, n: int, x: dict) -> FockVector:
        """L(n)x from the quadratic Sugawara form of the standard conformal vector."""
        space = self.space
        r = self.rank
        ginv = space.gram_inverse
        out = FockVector()
        for key, c in x.items():
            vec = {key: c}
            top = max((k for _, k in key[1]), default=0)
            lo = min(0, n) - top
            hi = max(0, n) + top
            for i in range(r):
                a_i = space.basis(i)
                b_i = ginv[i]
                for p in range(lo, hi + 1):
                    q = n - p
                    # normal order: non-negative mode acts first
                    if p >= 0 and q < 0:
                        first, fp, second, sp = a_i, p, b_i, q
                    else:
                        first, fp, second, sp = b_i, q, a_i, p
                    y = self.heisenberg(first, fp, vec)
                    if y:
                        out.iadd_scaled(self.heisenberg(second, sp, y), Q(1, 2))
        return out

    def omega(self) -> FockVector:
        """The conformal vector 1/2 sum Ginv_ij alpha_i(-1) alpha_j(-1) 1."""
        ginv = self.space.gram_inverse
        zero = self.space.zero
        out = FockVector()
        for i in range(self.rank):
            for j in range(self.rank):
                if ginv[i][j]:
                    out.add_term((zero, merge_modes(((i, 1),), ((j, 1),))), ginv[i][j] / 2)
        return out

    def cartan_vector(self, h: Lam, coset: Lam | None = None) -> FockVector:
        """h(-1)e^coset, i.e. the weight-one vector h when coset is 0."""
        lam = coset if coset is not None else self.space.zero
        return FockVector({(lam, ((i, 1),)): c for i, c in enumerate(h) if c})

    def exp_vector(self, lam: Lam) -> FockVector:
        return FockVector({(tuple(Q(x) for x in lam), ()): 1})


def keys_of(vectors: Iterable[dict]) -> set[Key]:
    out: set[Key] = set()
    for v in vectors:
        out.update(v)
    return out


class LatticeModule:
    """Realization of V_L acting on the sector V_{coset+L} by the untwisted vertex operator."""

    def __init__(self, voa: LatticeVOA, coset: Lam | None = None):
        self.voa = voa
        self.coset = coset if coset is not None else voa.space.zero
        self._floor = voa.min_weight(self.coset)
        # the hot path of every cell check; skip one call layer
        self.act = voa.mode_key  # type: ignore[method-assign]

    def act(self, u: Key, p: Q, w: Key) -> FockVector:
        return self.voa.mode_key(u, p, w)

    def inner(self, u: Key, k: int, v: Key) -> FockVector:
        return self.voa.mode_key(u, Q(k), v)

    def degree(self, u: Key) -> Q:
        return self.voa.weight(u)

    inner_degree = degree

    def module_weight(self, w: Key) -> Q:
        return self.voa.weight(w)

    def module_floor(self) -> Q:
        return self._floor

    def mode_class(self, u: Key, w: Key) -> Q:
        x = -self.voa.space.pair(u[0], w[0])
        return x - floor(x)

    def sign(self, u: Key, v: Key) -> int:
        return 1
