from __future__ import annotations

from fractions import Fraction

import pytest

from oracles import shifted_central_charge
from vertexlab.contragredient import (
    Grading,
    exp_L1,
    shifted_virasoro_check,
    verify_conjugation_formulas,
    verify_contragredient_module,
    verify_delta_contragredient,
    verify_double_contragredient,
)
from vertexlab.fock import FockVector
from vertexlab.lattice import LatticeVOA
from vertexlab.scalars import Q, e_pi_i, format_scalar
from vertexlab.verifier import Window

A1 = LatticeVOA([[2]])
ZERO = A1.space.zero
HALF = (Q(1, 2),)

# [DERIVED] c_e of omega + h(-2)1 on V_{A1}, frozen from the closed-form oracle
FROZEN_CENTRAL = {Q(0): 1, Q(1, 4): Q(-1, 2), Q(1, 2): -5, Q(1): -23}


class TestShiftedVirasoro:
    @pytest.mark.parametrize("h", sorted(FROZEN_CENTRAL))
    def test_central_value(self, h):
        sv, rep = shifted_virasoro_check(A1, (h,), wmax=1, bound=2)
        assert rep.passed
        assert sv.central == sv.central_check == FROZEN_CENTRAL[h]
        assert FROZEN_CENTRAL[h] == shifted_central_charge([[2]], [Fraction(int(h.numerator),
                                                                            int(h.denominator))])

    def test_rank_two(self):
        a2 = LatticeVOA([[2, -1], [-1, 2]])
        h = (Q(1, 3), Q(2, 3))
        sv, rep = shifted_virasoro_check(a2, h, wmax=1, bound=2)
        assert rep.passed
        assert sv.central == shifted_central_charge([[2, -1], [-1, 2]],
                                                    [Fraction(1, 3), Fraction(2, 3)])

    def test_twisted_sector_modes(self):
        _, rep = shifted_virasoro_check(A1, HALF, wmax=Q(9, 4), bound=2, coset=HALF)
        assert rep.passed


class TestGrading:
    def test_weights_shift_by_charge(self):
        g = Grading(A1, (Q(1, 4),))
        for k in A1.basis(HALF, 2):
            assert g.weight(k) == A1.weight(k) - g.charge(k[0])

    def test_lower_is_l1_minus_2h1(self):
        g = Grading(A1, HALF)
        for k in A1.basis(ZERO, 3):
            want = A1.virasoro(1, {k: 1})
            want.iadd_scaled(A1.heisenberg(HALF, 1, {k: 1}), -2)
            assert g.lower({k: 1}) == want

    def test_exp_lowering_terminates(self):
        top = A1.basis(ZERO, 3)[-1]
        coeffs = exp_L1(A1, {top: 1}, "L(1)")
        assert len(coeffs) <= 4 and coeffs[0] == FockVector({top: 1})

    def test_raising_needs_bound(self):
        with pytest.raises(ValueError):
            exp_L1(A1, {A1.vacuum_key(): 1}, "L(-1)")


class TestContragredient:
    @pytest.mark.parametrize("grading_h", [ZERO, (Q(1, 8),)])
    def test_module_and_double_dual(self, grading_h):
        M, rep = verify_contragredient_module([[2]], grading_h, HALF, Window(Q(1), Q(3, 2)),
                                              voa=A1)
        assert rep.passed, [c.counterexample for c in rep.failures()]
        g = Grading(A1, grading_h)
        case = verify_double_contragredient(M, g.basis(ZERO, 1), g.basis(HALF, 1), 2)
        assert case.passed, case.counterexample

    def test_sigma_order_of_eighth_grading(self):
        _, rep = verify_contragredient_module([[2]], (Q(1, 8),), HALF, Window(Q(1), Q(1)),
                                              voa=A1)
        assert rep.meta["sigma_squared_order"] == 2

    def test_conjugation_formulas(self):
        small = A1.basis(ZERO, 1)
        rep = verify_conjugation_formulas(A1, small, small, degree=2, z0_range=(-2, 1))
        assert rep.passed
        assert rep.meta["literal_scaling_form"]["holds"] is False


class TestDeltaIdentity:
    def test_phases_are_cyclotomic(self):
        vectors = A1.basis(ZERO, 2) + A1.basis(HALF, 2)
        rep = verify_delta_contragredient(A1, HALF, vectors)
        assert rep.passed
        assert format_scalar(e_pi_i(Q(-1, 2))) in rep.meta["phases"]
        assert "1" in rep.meta["phases"] and "-1" in rep.meta["phases"]
