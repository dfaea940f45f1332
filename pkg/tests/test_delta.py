from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertexlab.delta import (
    DeltaOperator,
    canonical_coset,
    classify_twist,
    compose,
    twisted_from_delta,
)
from vertexlab.fock import LaurentVector, PairingSpace, sort_modes, vscale
from vertexlab.lattice import LatticeVOA
from vertexlab.scalars import Q
from vertexlab.series import check_E_commutation
from vertexlab.verifier import Window

V8 = LatticeVOA([[8]])
ZERO = V8.space.zero
BASIS3 = V8.basis(ZERO, 3)
rational_h = st.fractions(-2, 2, max_denominator=8).map(lambda f: (Q(f),))


class TestClosedForms:
    """Delta(h,z) on 1, h and omega, written out term by term."""

    @pytest.mark.parametrize("h", [Q(1, 2), Q(1, 4), Q(1), Q(-3, 8)])
    def test_vacuum_h_omega(self, h):
        d = DeltaOperator(V8, (h,))
        vac = V8.vacuum_key()
        hv = d.vector()
        g = d.gamma
        assert g == 8 * h * h
        assert d.apply({vac: 1}) == LaurentVector({0: {vac: 1}})
        assert d.apply(hv) == LaurentVector({0: hv, -1: {vac: g}})
        omega = V8.omega()
        assert d.apply(omega) == LaurentVector({0: omega, -1: hv, -2: {vac: g / 2}})

    def test_gamma_values(self):
        # [TRIVIAL] gamma = <h,h> with <alpha,alpha> = 8
        assert [DeltaOperator(V8, (h,)).gamma for h in (Q(1, 2), Q(1, 4), Q(1))] == [2, Q(1, 2), 8]

    def test_zero_is_identity(self):
        d = DeltaOperator(V8, (Q(0),))
        for k in BASIS3:
            assert d.apply({k: 1}) == LaurentVector({0: {k: 1}})


class TestGroupLaws:
    @given(h1=rational_h, h2=rational_h, i=st.integers(0, len(BASIS3) - 1))
    @settings(max_examples=40, deadline=None)
    def test_composition(self, h1, h2, i):
        _, case = compose(DeltaOperator(V8, h1), DeltaOperator(V8, h2), {BASIS3[i]: 1})
        assert case.passed, case.counterexample

    @given(h=rational_h, i=st.integers(0, len(BASIS3) - 1))
    @settings(max_examples=40, deadline=None)
    def test_inverse(self, h, i):
        k = BASIS3[i]
        out, _ = compose(DeltaOperator(V8, h), DeltaOperator(V8, vscale(Q(-1), h)), {k: 1})
        assert out == LaurentVector({0: {k: 1}})


class TestTwists:
    def test_twist_order(self):
        a1 = LatticeVOA([[2]])
        assert DeltaOperator(a1, (Q(1, 2),)).twist_order() == 1
        assert DeltaOperator(a1, (Q(1, 4),)).twist_order() == 2
        assert DeltaOperator(a1, (Q(1, 8),)).twist_order() == 4

    def test_canonical_coset(self):
        assert canonical_coset((Q(5, 2), Q(-1, 3))) == (Q(1, 2), Q(2, 3))

    def test_simple_current_target(self):
        a1 = LatticeVOA([[2]])
        target, rep = classify_twist(DeltaOperator(a1, (Q(1, 2),)), a1.space.zero, 3)
        assert target == (Q(1, 2),)
        assert rep.passed

    def test_twisted_module_small_window(self):
        a1 = LatticeVOA([[2]])
        rep = twisted_from_delta(DeltaOperator(a1, (Q(1, 4),)), None, Window(Q(2), Q(3, 2)))
        assert rep.passed
        assert rep.meta["sigma_order"] == 2


class TestECommutation:
    @pytest.mark.parametrize("alpha,beta,gram", [(1, 1, [[2]]), (1, -1, [[2]]), (2, 1, [[1]]),
                                                 (Q(1, 2), Q(1, 3), [[2]])])
    def test_bidegree_five(self, alpha, beta, gram):
        space = PairingSpace(gram)
        zero = space.zero
        vectors = [{(zero, ()): 1}, {(zero, sort_modes(((0, 1), (0, 2)))): 1},
                   {(space.basis(0), ((0, 1),)): 1}]
        rep = check_E_commutation(space, Q(alpha), Q(beta), space.basis(0), 5, vectors)
        assert rep.passed, [c.counterexample for c in rep.failures()]

    def test_no_factor_when_beta_vanishes(self):
        space = PairingSpace([[2]])
        rep = check_E_commutation(space, Q(1), Q(0), space.basis(0), 3, [{(space.zero, ()): 1}])
        assert rep.passed
        assert rep.meta["gamma"] == 2
