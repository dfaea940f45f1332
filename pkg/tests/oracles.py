"""Independent reference computations used to freeze expected values.

Nothing here imports vertexlab: characters come from a brute-force theta
series times colored partition numbers from the divisor-sum recurrence.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from sympy import divisor_sigma


def colored_partitions(n: int, colors: int) -> int:
    """Coefficient of q^n in prod_k (1 - q^k)^(-colors).

    Uses n a(n) = colors * sum_k sigma(k) a(n - k).
    """
    a = [1]
    for m in range(1, n + 1):
        total = sum(int(divisor_sigma(k)) * a[m - k] for k in range(1, m + 1))
        a.append(colors * total // m)
    return a[n]


def theta(gram: list[list[int]], coset: list[Fraction], wmax: Fraction,
          reach: int = 6) -> dict[Fraction, int]:
    """Norms <v,v>/2 <= wmax of v in coset + Z^r, counted with multiplicity."""
    out: dict[Fraction, int] = {}
    r = len(gram)
    for shift in itertools.product(range(-reach, reach + 1), repeat=r):
        v = [Fraction(c) + s for c, s in zip(coset, shift)]
        norm = sum(v[i] * gram[i][j] * v[j] for i in range(r) for j in range(r)) / 2
        if norm <= wmax:
            out[norm] = out.get(norm, 0) + 1
    return out


def character(gram: list[list[int]], coset: list[Fraction],
              wmax: Fraction) -> list[tuple[Fraction, int]]:
    """Graded dimension of V_{coset+L} up to wmax."""
    dims: dict[Fraction, int] = {}
    rank = len(gram)
    for w0, mult in theta(gram, coset, wmax).items():
        n = 0
        while w0 + n <= wmax:
            dims[w0 + n] = dims.get(w0 + n, 0) + mult * colored_partitions(n, rank)
            n += 1
    return sorted(dims.items())


def shifted_central_charge(gram: list[list[int]], h: list[Fraction]) -> Fraction:
    """rank - 12 <h,h> for the conformal vector omega + h(-2)1."""
    r = len(gram)
    norm = sum(h[i] * gram[i][j] * h[j] for i in range(r) for j in range(r))
    return r - 12 * norm
