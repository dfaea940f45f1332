from __future__ import annotations

from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertexlab.scalars import (
    Cyclotomic,
    Q,
    binomial,
    e_pi_i,
    format_scalar,
    is_rational,
    parse_rational,
    parse_scalar,
    rational,
    unify,
    zeta,
)

small_rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12).map(Q)
conductors = st.sampled_from([1, 2, 3, 4, 6, 8, 12, 16])


@st.composite
def cyclotomics(draw):
    n = draw(conductors)
    coeffs = draw(st.lists(small_rationals, min_size=1, max_size=6))
    total = 0
    for k, c in enumerate(coeffs):
        total = total + c * zeta(n, k)
    return total


class TestRootsOfUnity:
    @pytest.mark.parametrize("n", [3, 4, 5, 6, 8, 12, 16, 24])
    def test_order(self, n: int):
        z = zeta(n)
        assert z**n == 1
        assert all(z**k != 1 for k in range(1, n))

    @pytest.mark.parametrize("n", [3, 4, 5, 8, 9, 12])
    def test_sum_of_powers_vanishes(self, n: int):
        assert sum((zeta(n, k) for k in range(n)), 0) == 0

    def test_square_roots(self):
        i = e_pi_i(Fraction(1, 2))
        assert i * i == -1
        s2 = zeta(8) + zeta(8, 7)
        assert s2 * s2 == 2
        s3 = zeta(12) + zeta(12, 11)
        assert s3 * s3 == 3

    def test_integral_exponents_are_signs(self):
        assert e_pi_i(0) == 1
        assert e_pi_i(1) == -1
        assert e_pi_i(-3) == -1
        assert is_rational(e_pi_i(4))

    @given(a=small_rationals, b=small_rationals)
    def test_e_pi_i_is_a_character(self, a, b):
        assert e_pi_i(a + b) == e_pi_i(a) * e_pi_i(b)

    @given(a=small_rationals)
    def test_e_pi_i_period_two(self, a):
        assert e_pi_i(a + 2) == e_pi_i(a)
        assert e_pi_i(a) * e_pi_i(-a) == 1


class TestFieldLaws:
    @given(x=cyclotomics(), y=cyclotomics(), z=cyclotomics())
    @settings(max_examples=60)
    def test_ring_axioms(self, x, y, z):
        assert x + y == y + x
        assert x * y == y * x
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        assert x - x == 0

    @given(x=cyclotomics(), y=cyclotomics())
    @settings(max_examples=60)
    def test_division(self, x, y):
        if y == 0:
            return
        assert (x / y) * y == x

    @given(x=cyclotomics())
    def test_rational_results_demote(self, x):
        d = x - x + 3
        assert is_rational(d) and d == 3

    @given(x=cyclotomics(), y=cyclotomics())
    def test_unify_preserves_values(self, x, y):
        a, b = unify(x, y)
        assert a == x and b == y

    @given(x=cyclotomics())
    def test_hash_matches_equality(self, x):
        y = (x + 1) - 1
        assert y == x and hash(y) == hash(x)


class TestRationals:
    @given(p=st.integers(-1000, 1000), q=st.integers(1, 1000))
    def test_parse_matches_fraction(self, p: int, q: int):
        assert parse_rational(f"{p}/{q}") == Fraction(p, q)
        assert rational(p, q) == Fraction(p, q)

    @pytest.mark.parametrize("bad", ["0.5", "1/2/3", "", "x", "1e3", "1/"])
    def test_parse_rejects(self, bad: str):
        with pytest.raises(ValueError):
            parse_rational(bad)

    def test_zero_denominator(self):
        with pytest.raises(ZeroDivisionError):
            rational(1, 0)

    @given(x=cyclotomics())
    def test_scalar_text_round_trip(self, x):
        assert parse_scalar(format_scalar(x)) == x

    @given(n=st.integers(0, 30), k=st.integers(0, 30))
    def test_binomial_integers(self, n: int, k: int):
        assert binomial(n, k) == comb(n, k)

    @given(t=small_rationals, k=st.integers(0, 12))
    def test_binomial_pascal(self, t, k: int):
        assert binomial(t, k) + binomial(t, k + 1) == binomial(t + 1, k + 1)

    def test_binomial_half(self):
        # (1 + x)^(1/2) = 1 + x/2 - x^2/8 + x^3/16 - ...
        assert [binomial(Fraction(1, 2), k) for k in range(4)] == [
            1, Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16)]

    def test_cyclotomic_is_not_a_rational(self):
        assert isinstance(zeta(4), Cyclotomic)
        assert not is_rational(zeta(4))
