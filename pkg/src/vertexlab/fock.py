"""Heisenberg Fock spaces with lattice labels.

A basis state is a pair ``(lam, modes)``: ``lam`` is the coordinate tuple of
the lattice point carried by ``e^lam`` and ``modes`` is the sorted multiset of
creation operators alpha_i(-k), stored as ``(i, k)`` pairs with higher levels
first.  Coordinates always refer to the standard basis alpha_1..alpha_r of the
pairing space.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence

from functools import lru_cache
from itertools import product
from typing import Union

from .scalars import Q, Scalar, format_scalar, parse_rational

Lam = tuple[Q, ...]
Mode = tuple[int, int]
Modes = tuple[Mode, ...]
Key = tuple[Lam, Modes]
Exponent = Q


def _mode_order(m: Mode) -> tuple[int, int]:
    return (-m[1], m[0])


def sort_modes(modes: Iterable[Mode]) -> Modes:
    return tuple(sorted(modes, key=_mode_order))


def merge_modes(a: Modes, b: Modes) -> Modes:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b, key=_mode_order))


def level(modes: Modes) -> int:
    return sum(k for _, k in modes)


class PairingSpace:
    """A rational symmetric form on Q^r, the Cartan data of the Heisenberg algebra."""

    def __init__(self, gram: Sequence[Sequence[object]]):
        rows = [tuple(Q(parse_rational(x)) for x in row) for row in gram]
        r = len(rows)
        if r == 0 or any(len(row) != r for row in rows):
            raise ValueError("gram matrix must be square and nonempty")
        for i in range(r):
            for j in range(r):
                if rows[i][j] != rows[j][i]:
                    raise ValueError("gram matrix must be symmetric")
        self.rank = r
        self.gram: tuple[tuple[Q, ...], ...] = tuple(rows)
        self.zero: Lam = tuple(Q(0) for _ in range(r))
        self._ginv: tuple[tuple[Q, ...], ...] | None = None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PairingSpace) and self.gram == other.gram

    def __hash__(self) -> int:
        return hash(self.gram)

    def vec(self, coords: Iterable[object]) -> Lam:
        out = tuple(Q(parse_rational(c)) for c in coords)
        if len(out) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(out)}")
        return out

    def basis(self, i: int) -> Lam:
        return tuple(Q(int(j == i)) for j in range(self.rank))

    def pair(self, a: Lam, b: Lam) -> Q:
        g = self.gram
        return sum((a[i] * g[i][j] * b[j] for i in range(self.rank) if a[i]
                    for j in range(self.rank) if b[j]), Q(0))

    def dual_coords(self, h: Lam) -> tuple[Q, ...]:
        """The pairings <h, alpha_i> for every basis direction."""
        return tuple(sum((self.gram[i][j] * h[j] for j in range(self.rank)), Q(0))
                     for i in range(self.rank))

    @property
    def gram_inverse(self) -> tuple[tuple[Q, ...], ...]:
        if self._ginv is None:
            self._ginv = invert_matrix(self.gram)
        return self._ginv

    def weight(self, key: Key) -> Q:
        lam, modes = key
        return self.pair(lam, lam) / 2 + level(modes)


def invert_matrix(m: Sequence[Sequence[Q]]) -> tuple[tuple[Q, ...], ...]:
    n = len(m)
    a = [[Q(x) for x in row] + [Q(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def vadd(a: Lam, b: Lam) -> Lam:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Lam, b: Lam) -> Lam:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c: Q, a: Lam) -> Lam:
    return tuple(c * x for x in a)


class FockVector(dict):
    """Finite linear combination of basis states; zero coefficients are never stored."""

    def __init__(self, data: object = (), /):
        dict.__init__(self, data)  # type: ignore[arg-type]
        if not all(self.values()):
            for k in [k for k, c in self.items() if not c]:
                del self[k]

    def add_term(self, key: Key, coeff: Scalar) -> None:
        if not coeff:
            return
        new = self.get(key, 0) + coeff
        if new:
            self[key] = new
        else:
            del self[key]

    def iadd_scaled(self, other: dict, coeff: Scalar = 1) -> "FockVector":
        if not coeff:
            return self
        get = self.get
        for k, c in other.items():
            new = get(k, 0) + c * coeff
            if new:
                self[k] = new
            elif k in self:
                del self[k]
        return self

    def __add__(self, other: dict) -> "FockVector":
        return FockVector(self).iadd_scaled(other)

    def __sub__(self, other: dict) -> "FockVector":
        return FockVector(self).iadd_scaled(other, -1)

    def __neg__(self) -> "FockVector":
        return FockVector({k: -c for k, c in self.items()})

    def scaled(self, coeff: Scalar) -> "FockVector":
        if not coeff:
            return FockVector()
        return FockVector({k: c * coeff for k, c in self.items()})

    def __mul__(self, coeff: Scalar) -> "FockVector":
        return self.scaled(coeff)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, dict):
            return dict.__eq__(self, other)
        if other == 0:
            return not self
        return NotImplemented

    def __ne__(self, other: object) -> bool:
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None  # type: ignore[assignment]

    @staticmethod
    def basis(key: Key) -> "FockVector":
        return FockVector({key: 1})

    def homogeneous_parts(self, space: PairingSpace) -> dict[Q, "FockVector"]:
        parts: dict[Q, FockVector] = {}
        for k, c in self.items():
            parts.setdefault(space.weight(k), FockVector())[k] = c
        return parts

    def to_json(self) -> dict[str, str]:
        return {format_key(k): format_scalar(c) for k, c in sorted(self.items(), key=_key_sort)}


def _key_sort(item: tuple[Key, Scalar]) -> tuple:
    return key_order(item[0])


def _is_tagged(key: tuple) -> bool:
    # sector-tagged keys (tag, key) of direct sums like V + V~
    return isinstance(key[0], int)


def key_order(key: Key) -> tuple:
    if _is_tagged(key):
        return (key[0],) + key_order(key[1])
    lam, modes = key
    return (level(modes), lam, tuple(_mode_order(m) for m in modes))


def format_key(key: Key) -> str:
    if _is_tagged(key):
        return f"<{key[0]}> " + format_key(key[1])
    lam, modes = key
    parts: list[str] = []
    i = 0
    while i < len(modes):
        j = i
        while j < len(modes) and modes[j] == modes[i]:
            j += 1
        d, k = modes[i]
        mult = j - i
        parts.append(f"a{d + 1}(-{k})" + (f"^{mult}" if mult > 1 else ""))
        i = j
    coords = ",".join(str(x) for x in lam)
    parts.append(f"e[{coords}]")
    return " ".join(parts)


class LaurentVector(dict):
    """Map from rational exponents to FockVectors, complete inside ``window``."""

    def __init__(self, data: dict | None = None, window: tuple[object, object] | None = None):
        super().__init__()
        self.window = window
        if data:
            for e, v in data.items():
                self.add_at(Q(e), v)

    def add_at(self, exponent: Q, vec: dict, coeff: Scalar = 1) -> None:
        if not vec or not coeff:
            return
        slot = self.get(exponent)
        if slot is None:
            slot = FockVector()
            self[exponent] = slot
        slot.iadd_scaled(vec, coeff)
        if not slot:
            del self[exponent]

    def coefficient(self, exponent: object) -> FockVector:
        return self.get(Q(exponent), FockVector())

    def to_json(self) -> dict[str, dict[str, str]]:
        return {str(e): v.to_json() for e, v in sorted(self.items())}


Vectorish = Union[FockVector, dict]


# Heisenberg mode action ------------------------------------------------------

def heisenberg_on_key(space: PairingSpace, h_dual: Sequence[Q], h: Lam, n: int,
                      key: Key) -> Iterator[tuple[Key, Scalar]]:
    """Terms of h(n) applied to one basis state.

    ``h_dual`` are the pairings <h, alpha_i>; ``h`` the coordinates of h.
    """
    lam, modes = key
    if n == 0:
        val = sum((h_dual[i] * lam[i] for i in range(space.rank)), Q(0))
        if val:
            yield key, val
        return
    if n < 0:
        for i, c in enumerate(h):
            if c:
                yield (lam, merge_modes(modes, ((i, -n),))), c
        return
    seen: set[Mode] = set()
    for idx, m in enumerate(modes):
        d, k = m
        if k != n or m in seen:
            continue
        seen.add(m)
        mult = modes.count(m)
        val = n * h_dual[d] * mult
        if val:
            rest = modes[:idx] + modes[idx + 1:]
            yield (lam, rest), val


def mode_action(space: PairingSpace, h: Lam, n: int, x: dict) -> FockVector:
    """h(n)x for the Heisenberg generator with coordinates ``h``."""
    h_dual = space.dual_coords(h)
    out = FockVector()
    for key, c in x.items():
        for k2, v in heisenberg_on_key(space, h_dual, h, n, key):
            out.add_term(k2, c * v)
    return out


# exponential operators -------------------------------------------------------

def e_plus_substitute(key: Key, shifts: Sequence[Q],
                      coeff_of_level) -> Iterator[tuple[Modes, Q, Q]]:
    """Expand exp(sum_k c_k h(k) z^{-k}) on one monomial.

    Since h(k) acts as k<h,alpha_i> d/d alpha_i(-k), the exponential substitutes
    alpha_i(-k) -> alpha_i(-k) + c_k k <h,alpha_i> z^{-k}.  Yields
    ``(remaining modes, exponent, coefficient)``; ``shifts`` are <h,alpha_i>
    and ``coeff_of_level(k)`` returns c_k * k.
    """
    _, modes = key
    # group equal modes so multiplicities expand binomially
    groups: list[tuple[Mode, int]] = []
    for m in modes:
        if groups and groups[-1][0] == m:
            groups[-1] = (m, groups[-1][1] + 1)
        else:
            groups.append((m, 1))
    options: list[list[tuple[Modes, Q, Q]]] = []
    for (d, k), mult in groups:
        s = coeff_of_level(k) * shifts[d]
        opts: list[tuple[Modes, Q, Q]] = []
        for r in range(mult + 1):
            if r and not s:
                break
            kept = ((d, k),) * (mult - r)
            opts.append((kept, Q(-k * r), _binom_int(mult, r) * s ** r))
        options.append(opts)
    for choice in product(*options):
        coeff = Q(1)
        exp = Q(0)
        kept: list[Mode] = []
        for m, e, c in choice:
            kept.extend(m)
            exp += e
            coeff *= c
        yield tuple(kept), exp, coeff


@lru_cache(maxsize=None)
def _binom_int(n: int, r: int) -> int:
    from math import comb
    return comb(n, r)


def apply_e_plus(space: PairingSpace, h: Lam, x: dict, alpha: Q = Q(1),
                 arg_negated: bool = False) -> LaurentVector:
    """E^+(alpha h, z) x, or E^+(alpha h, -z) x when ``arg_negated``; always finite."""
    shifts = space.dual_coords(h)
    alpha = Q(alpha)

    def coeff_of_level(k: int) -> Q:
        # c_k = alpha / k  (times (-1)^k for the negated argument); we need c_k * k
        return alpha * (-1) ** k if arg_negated else alpha

    out = LaurentVector()
    for key, c in x.items():
        lam = key[0]
        for modes, e, v in e_plus_substitute(key, shifts, coeff_of_level):
            out.add_at(e, {(lam, modes): c * v})
    return out


class CreationSeries:
    """Coefficients P_t of exp(sum_k alpha h(-k) z^k / k) as creation polynomials.

    P_t is stored as a dict from sorted mode tuples to rationals; computed
    lazily with the recurrence t P_t = sum_k k a_k P_{t-k}.
    """

    def __init__(self, h: Lam, alpha: Q = Q(1), arg_negated: bool = False):
        self.h = h
        self.alpha = Q(alpha)
        self.sign = -1 if arg_negated else 1
        self.coeffs: list[dict[Modes, Q]] = [{(): Q(1)}]

    def upto(self, t: int) -> list[dict[Modes, Q]]:
        while len(self.coeffs) <= t:
            n = len(self.coeffs)
            acc: dict[Modes, Q] = {}
            for k in range(1, n + 1):
                # k a_k = alpha (sign)^k h(-k)
                scale = self.alpha * self.sign ** k / n
                if not scale:
                    continue
                for modes, c in self.coeffs[n - k].items():
                    for i, hi in enumerate(self.h):
                        if hi:
                            m2 = merge_modes(modes, ((i, k),))
                            acc[m2] = acc.get(m2, Q(0)) + c * hi * scale
            self.coeffs.append({m: c for m, c in acc.items() if c})
        return self.coeffs


_series_cache: dict[tuple[Lam, Q, bool], CreationSeries] = {}


def creation_series(h: Lam, alpha: Q = Q(1), arg_negated: bool = False) -> CreationSeries:
    key = (h, Q(alpha), arg_negated)
    s = _series_cache.get(key)
    if s is None:
        s = _series_cache[key] = CreationSeries(h, alpha, arg_negated)
    return s


def apply_e_minus(space: PairingSpace, h: Lam, x: dict, max_degree: int,
                  alpha: Q = Q(1), arg_negated: bool = False) -> LaurentVector:
    """E^-(alpha h, z) x with all z-powers up to ``max_degree`` (window-complete)."""
    series = creation_series(h, alpha, arg_negated).upto(max_degree)
    out = LaurentVector(window=(None, max_degree))
    for t in range(max_degree + 1):
        for modes, c in series[t].items():
            for (lam, m0), v in x.items():
                out.add_at(Q(t), {(lam, merge_modes(m0, modes)): v * c})
    return out


def E_exp(space: PairingSpace, h: Lam, sign: str, arg_negated: bool, x: dict,
          window: int = 0, alpha: Q = Q(1)) -> LaurentVector:
    """E^{sign}(alpha h, z) or E^{sign}(alpha h, -z) applied to x.

    For ``sign == "-"`` the result is complete for exponents up to ``window``.
    """
    if sign == "+":
        return apply_e_plus(space, h, x, alpha, arg_negated)
    if sign == "-":
        return apply_e_minus(space, h, x, int(window), alpha, arg_negated)
    raise ValueError("sign must be '+' or '-'")


# monomial enumeration ----------------------------------------------------------

@lru_cache(maxsize=None)
def colored_partitions(total: int, colors: int, max_part: int | None = None) -> tuple[Modes, ...]:
    """All sorted mode multisets of the given level with ``colors`` directions."""
    if total == 0:
        return ((),)
    if max_part is None:
        max_part = total
    out: list[Modes] = []
    # first (largest) part k, then its colour; the rest is bounded lexicographically
    for k in range(min(total, max_part), 0, -1):
        for d in range(colors):
            for rest in colored_partitions(total - k, colors, k):
                if rest and (rest[0][1] == k and rest[0][0] < d):
                    continue
                out.append(((d, k),) + rest)
    return tuple(sort_modes(m) for m in out)


@lru_cache(maxsize=None)
def colored_partition_count(total: int, colors: int) -> int:
    """Coefficient of q^total in prod_k (1 - q^k)^(-colors)."""
    series = [1] + [0] * total
    for _ in range(colors):
        for k in range(1, total + 1):
            for i in range(k, total + 1):
                series[i] += series[i - k]
    return series[total]
