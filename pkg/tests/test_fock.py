from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import colored_partitions as partition_oracle
from vertexlab.fock import (
    FockVector,
    LaurentVector,
    PairingSpace,
    colored_partition_count,
    colored_partitions,
    format_key,
    level,
    mode_action,
    sort_modes,
)
from vertexlab.scalars import Q

A2 = PairingSpace([[2, -1], [-1, 2]])

coords = st.integers(-2, 2).map(Q)
lams = st.tuples(coords, coords)
modes = st.lists(st.tuples(st.integers(0, 1), st.integers(1, 3)), max_size=3).map(sort_modes)
keys = st.tuples(lams, modes)
cartans = st.tuples(st.fractions(-2, 2, max_denominator=4).map(Q),
                    st.fractions(-2, 2, max_denominator=4).map(Q))


def commutator(h1, m: int, h2, n: int, x: dict) -> FockVector:
    a = mode_action(A2, h1, m, mode_action(A2, h2, n, x))
    b = mode_action(A2, h2, n, mode_action(A2, h1, m, x))
    return FockVector(a) + (-FockVector(b))


class TestHeisenberg:
    @given(key=keys, h1=cartans, h2=cartans, m=st.integers(-3, 3), n=st.integers(-3, 3))
    @settings(max_examples=150)
    def test_canonical_commutator(self, key, h1, h2, m, n):
        x = {key: 1}
        want = FockVector()
        if m + n == 0:
            want.add_term(key, m * A2.pair(h1, h2))
        assert commutator(h1, m, h2, n, x) == want

    @given(key=keys, h=cartans)
    def test_zero_mode_is_charge(self, key, h):
        lam, _ = key
        want = FockVector()
        want.add_term(key, A2.pair(h, lam))
        assert mode_action(A2, h, 0, {key: 1}) == want

    @given(key=keys, h=cartans, n=st.integers(1, 3))
    def test_creation_raises_weight(self, key, h, n):
        out = mode_action(A2, h, -n, {key: 1})
        assert all(A2.weight(k) == A2.weight(key) + n for k in out)

    def test_annihilation_kills_vacuum_sector(self):
        vac = (A2.zero, ())
        for n in range(1, 4):
            assert mode_action(A2, A2.basis(0), n, {vac: 1}) == FockVector()


class TestPartitions:
    @pytest.mark.parametrize("colors", [1, 2, 3])
    def test_count_matches_generating_function(self, colors: int):
        for n in range(0, 12):
            assert colored_partition_count(n, colors) == partition_oracle(n, colors)

    @pytest.mark.parametrize("n,colors", [(4, 1), (5, 2), (3, 3)])
    def test_enumeration_is_canonical(self, n: int, colors: int):
        parts = colored_partitions(n, colors)
        assert len(parts) == len(set(parts)) == colored_partition_count(n, colors)
        assert all(level(p) == n and sort_modes(p) == p for p in parts)

    @given(m=modes)
    def test_sort_idempotent(self, m):
        assert sort_modes(m) == m
        assert sort_modes(reversed(m)) == m


class TestVectors:
    def test_zero_coefficients_vanish(self):
        k = (A2.zero, ((0, 1),))
        v = FockVector({k: 2})
        v.iadd_scaled({k: 1}, -2)
        assert v == FockVector() and not v

    def test_laurent_coefficients(self):
        k = (A2.zero, ())
        lv = LaurentVector()
        lv.add_at(Q(-1), {k: 1}, 3)
        lv.add_at(Q(-1), {k: 1}, -3)
        lv.add_at(Q(1, 2), {k: 1})
        assert lv.coefficient(-1) == FockVector()
        assert lv.coefficient(Fraction(1, 2)) == FockVector({k: 1})

    def test_key_text(self):
        key = ((Q(1), Q(0)), sort_modes(((0, 1), (1, 2))))
        assert format_key(key) == "a2(-2) a1(-1) e[1,0]"
        assert A2.weight(key) == 4
