"""Exact scalars: rationals and elements of cyclotomic fields Q(zeta_N).

Rationals are plain ``int`` or ``gmpy2.mpq`` values (exported here as ``Q``),
which keeps the common case fast; :class:`fractions.Fraction` inputs are
accepted everywhere.  Elements that genuinely need a root of unity are
:class:`Cyclotomic` instances stored in the power basis modulo the N-th
cyclotomic polynomial.  Arithmetic between the two kinds works through the
usual operators, and a cyclotomic result that happens to be rational is
demoted back to a rational.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Union

from gmpy2 import mpq as Q

Rational = Union[int, Fraction, Q]
Scalar = Union[int, Fraction, Q, "Cyclotomic"]
RATIONAL_TYPES = (int, Fraction, type(Q(0)))

__all__ = [
    "Cyclotomic",
    "Q",
    "Scalar",
    "rational",
    "e_pi_i",
    "zeta",
    "unify",
    "binomial",
    "format_scalar",
    "parse_scalar",
    "parse_rational",
    "is_rational",
]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Division of integer polynomials (low degree first) by a monic divisor."""
    num = list(num)
    q = [0] * max(len(num) - len(den) + 1, 1)
    for shift in range(len(num) - len(den), -1, -1):
        c = num[shift + len(den) - 1]
        if c:
            q[shift] = c
            for j, d in enumerate(den):
                num[shift + j] -= c * d
    return q, num[: len(den) - 1]


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly, rem = _poly_divmod(poly, list(cyclotomic_polynomial(d)))
            assert not any(rem)
    return tuple(poly)


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Reduced coordinates of x^k mod Phi_n for 0 <= k < 2n."""
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    rows: list[tuple[int, ...]] = []
    cur = [0] * deg
    cur[0] = 1
    for _ in range(2 * n):
        rows.append(tuple(cur))
        # multiply by x and reduce with the monic relation
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * phi[j] for j, c in enumerate(cur)]
    return tuple(rows)


def _reduce(n: int, coeffs: list[Q]) -> tuple[Q, ...]:
    """Reduce a coefficient list of arbitrary length modulo Phi_n."""
    deg = totient(n)
    table = _power_table(n)
    out = [Q(0)] * deg
    for k, c in enumerate(coeffs):
        if not c:
            continue
        row = table[k % n] if k >= deg else None
        if row is None:
            out[k] += c
        else:
            for j, r in enumerate(row):
                if r:
                    out[j] += c * r
    return tuple(out)


class Cyclotomic:
    """An element of Q(zeta_N) written in the power basis 1, x, ..., x^(phi(N)-1)."""

    __slots__ = ("n", "coeffs", "_hash")

    def __init__(self, n: int, coeffs: tuple[Q, ...]):
        self.n = n
        self.coeffs = coeffs
        self._hash: int | None = None

    # construction helpers -------------------------------------------------
    @staticmethod
    def make(n: int, coeffs: list[Q] | tuple[Q, ...]) -> Scalar:
        red = _reduce(n, list(coeffs))
        if not any(red[1:]):
            return _demote(red[0])
        return Cyclotomic(n, red)

    def embed(self, m: int) -> "Cyclotomic":
        """Re-express in Q(zeta_m); ``m`` must be a multiple of the conductor."""
        if m == self.n:
            return self
        step = m // self.n
        coeffs = [Q(0)] * ((len(self.coeffs) - 1) * step + 1)
        for k, c in enumerate(self.coeffs):
            coeffs[k * step] = c
        return Cyclotomic(m, _reduce(m, coeffs))

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other: object) -> tuple["Cyclotomic", "Cyclotomic"] | None:
        if isinstance(other, Cyclotomic):
            m = _lcm(self.n, other.n)
            return self.embed(m), other.embed(m)
        if isinstance(other, RATIONAL_TYPES):
            c = [Q(0)] * len(self.coeffs)
            c[0] = Q(other)
            return self, Cyclotomic(self.n, tuple(c))
        return None

    def __add__(self, other: object) -> Scalar:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Cyclotomic.make(a.n, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self) -> "Cyclotomic":
        return Cyclotomic(self.n, tuple(-c for c in self.coeffs))

    def __sub__(self, other: object) -> Scalar:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Cyclotomic.make(a.n, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other: object) -> Scalar:
        return (-self) + other

    def __mul__(self, other: object) -> Scalar:
        if isinstance(other, RATIONAL_TYPES):
            if not other:
                return 0
            return Cyclotomic(self.n, tuple(c * other for c in self.coeffs))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        prod = [Q(0)] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        prod[i + j] += x * y
        return Cyclotomic.make(a.n, prod)

    __rmul__ = __mul__

    def inverse(self) -> Scalar:
        # extended Euclid in Q[x]: s*self + t*Phi = 1
        phi = [Q(c) for c in cyclotomic_polynomial(self.n)]
        a = _trim(list(self.coeffs))
        r0, r1 = phi, a
        s0: list[Q] = [Q(0)]
        s1: list[Q] = [Q(1)]
        while len(r1) > 1 or r1[0]:
            q, r = _qdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _trim(_sub(s0, _mul(q, s1)))
        # r0 is a nonzero constant
        c = r0[0]
        return Cyclotomic.make(self.n, [x / c for x in s0])

    def __truediv__(self, other: object) -> Scalar:
        if isinstance(other, RATIONAL_TYPES):
            if not other:
                raise ZeroDivisionError("division by zero scalar")
            return Cyclotomic(self.n, tuple(c / other for c in self.coeffs))
        if isinstance(other, Cyclotomic):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other: object) -> Scalar:
        if isinstance(other, RATIONAL_TYPES):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, k: int) -> Scalar:
        if k < 0:
            return self.inverse() ** (-k)  # type: ignore[operator]
        result: Scalar = 1
        base: Scalar = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other: object) -> bool:
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a.coeffs == b.coeffs

    def __hash__(self) -> int:
        # the normalized trace is invariant under the embeddings between fields
        if self._hash is None:
            self._hash = hash(_normalized_trace(self))
        return self._hash

    def __repr__(self) -> str:
        return format_scalar(self)


def _trim(p: list[Q]) -> list[Q]:
    while len(p) > 1 and not p[-1]:
        p.pop()
    return p or [Q(0)]


def _sub(a: list[Q], b: list[Q]) -> list[Q]:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]


def _mul(a: list[Q], b: list[Q]) -> list[Q]:
    out = [Q(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _qdivmod(a: list[Q], b: list[Q]) -> tuple[list[Q], list[Q]]:
    a = list(a)
    b = _trim(list(b))
    if len(a) < len(b):
        return [Q(0)], _trim(a)
    q = [Q(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for shift in range(len(a) - len(b), -1, -1):
        c = a[shift + len(b) - 1] / lead
        q[shift] = c
        if c:
            for j, d in enumerate(b):
                a[shift + j] -= c * d
    return _trim(q), _trim(a[: len(b) - 1] or [Q(0)])


@lru_cache(maxsize=None)
def _mobius(n: int) -> int:
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    return -result if m > 1 else result


def _normalized_trace(x: Cyclotomic) -> Q:
    # Tr(zeta_n^k) / phi(n) = mu(d) / phi(d) with d = n / gcd(n, k)
    total = Q(0)
    for k, c in enumerate(x.coeffs):
        if c:
            d = x.n // gcd(x.n, k)
            total += c * Q(_mobius(d), totient(d))
    return total


def _demote(c: Q) -> Rational:
    return int(c.numerator) if c.denominator == 1 else Q(c)


def is_rational(x: Scalar) -> bool:
    return isinstance(x, RATIONAL_TYPES)


def rational(p: int, q: int = 1) -> Rational:
    """The rational p/q in lowest terms (an ``int`` when integral)."""
    if q == 0:
        raise ZeroDivisionError("rational with zero denominator")
    return _demote(Q(p, q))


@lru_cache(maxsize=None)
def zeta(n: int, k: int = 1) -> Scalar:
    """The power zeta_n^k of the primitive root exp(2 pi i / n)."""
    k %= n
    if n in (1, 2):
        return 1 if k == 0 else -1
    coeffs = [Q(0)] * (k + 1)
    coeffs[k] = Q(1)
    return Cyclotomic.make(n, coeffs)


def e_pi_i(alpha: Rational) -> Scalar:
    """exp(alpha * pi * i) for rational alpha, exactly."""
    a = Q(alpha)
    return zeta(2 * a.denominator, a.numerator)


def unify(a: Scalar, b: Scalar) -> tuple[Scalar, Scalar]:
    """Both values written over the common field of conductor lcm(N_a, N_b)."""
    na = a.n if isinstance(a, Cyclotomic) else 1
    nb = b.n if isinstance(b, Cyclotomic) else 1
    m = _lcm(na, nb)
    if m == 1:
        return a, b
    return _as_cyclotomic(a, m), _as_cyclotomic(b, m)


def _as_cyclotomic(x: Scalar, m: int) -> Cyclotomic:
    if isinstance(x, Cyclotomic):
        return x.embed(m)
    coeffs = [Q(0)] * totient(m)
    coeffs[0] = Q(x)
    return Cyclotomic(m, tuple(coeffs))


_BINOM: dict[tuple[object, int], Rational] = {}


def binomial(top: Rational, k: int) -> Rational:
    """Generalized binomial coefficient C(top, k) for rational top and k >= 0."""
    hit = _BINOM.get((top, k))
    if hit is not None:
        return hit
    if k < 0:
        val: Rational = 0
    elif isinstance(top, int) and 0 <= top < k:
        val = 0
    else:
        t = Q(top)
        out = Q(1)
        for j in range(k):
            out = out * (t - j) / (j + 1)
        val = _demote(out)
    _BINOM[(top, k)] = val
    return val


# text serialization ---------------------------------------------------------

def _fmt_rat(c: Rational) -> str:
    c = Q(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_scalar(x: Scalar) -> str:
    if isinstance(x, Cyclotomic):
        terms = [f"{_fmt_rat(c)}*z{{{x.n}}}^{k}" for k, c in enumerate(x.coeffs) if c]
        return " + ".join(terms)
    return _fmt_rat(x)


_RAT = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_TERM = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\*z\{(\d+)\}\^(\d+)\s*$")


def parse_rational(text: str | int | Fraction) -> Rational:
    """Parse "p/q" or an integer.  Floats are rejected on purpose."""
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, RATIONAL_TYPES):
        return _demote(Q(text))
    m = _RAT.match(str(text))
    if not m:
        raise ValueError(f"not a rational: {text!r}")
    return rational(int(m.group(1)), int(m.group(2) or 1))


def parse_scalar(text: str) -> Scalar:
    if "*z{" not in text:
        return parse_rational(text)
    total: Scalar = 0
    for part in text.split(" + "):
        m = _TERM.match(part)
        if not m:
            raise ValueError(f"not a scalar term: {part!r}")
        total = total + parse_rational(m.group(1)) * zeta(int(m.group(2)), int(m.group(3)))
    return total
