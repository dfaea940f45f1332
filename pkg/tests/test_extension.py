from __future__ import annotations

import pytest

from vertexlab.extension import (
    ModulePair,
    build_extension,
    lattice_equivalence_check,
    module_pair,
    verify_bar_routes,
    verify_skew_symmetry,
    verify_super_jacobi,
)
from vertexlab.fock import FockVector
from vertexlab.scalars import Q
from vertexlab.verifier import Window


@pytest.fixture(scope="module")
def even():
    E, rep = build_extension([[8]], ["1/2"])
    assert rep.passed
    return E


@pytest.fixture(scope="module")
def odd():
    E, rep = build_extension([[4]], ["1/2"])
    assert rep.passed
    return E


class TestConstruction:
    def test_parity(self, even, odd):
        assert (even.gamma, even.as_json()["parity"]) == (2, "even")
        assert (odd.gamma, odd.as_json()["parity"]) == (1, "odd")

    @pytest.mark.parametrize("gram,h", [([[2]], ["1/2"]), ([[8]], ["1/8"]), ([[8]], ["1/3"])])
    def test_non_integral_gamma_rejected(self, gram, h):
        with pytest.raises(ValueError, match="gamma"):
            build_extension(gram, h)

    def test_rank_two_half_vector(self):
        E, rep = build_extension([[2, 0], [0, 2]], ["1/2", "1/2"], check_wmax=1)
        assert E.gamma == 1 and rep.passed

    def test_translation_round_trip(self, even):
        for k in even.voa.basis(even.zero, 2):
            x = FockVector({k: 1})
            assert even.phi_inverse(even.phi(x)) == x
            assert even.psi(even.phi(x)) != x  # lands two steps away from V

    def test_character(self, even):
        # [DERIVED] V_{A1}: 1, 3, 4 at weights 0, 1, 2
        assert even.character(2) == [(0, 1), (1, 3), (2, 4)]


class TestIdentities:
    def test_routes_agree(self, even, odd):
        assert verify_bar_routes(even, 2).passed
        assert verify_bar_routes(odd, 2).passed

    def test_skew_signs(self, even, odd):
        for E, good in ((even, 1), (odd, -1)):
            ws = E.basis(2, 1)
            assert verify_skew_symmetry(E, ws, ws, 2).passed
            wrong = verify_skew_symmetry(E, ws, ws, 2, sign=-good,
                                         tag="odd-skew-symmetry-wrong-sign")
            assert not wrong.passed and wrong.counterexample is not None

    def test_super_jacobi_small(self, odd):
        gens = odd.basis(1)
        rep = verify_super_jacobi(odd, gens, gens, odd.basis(2), Window(Q(2), Q(2)))
        assert rep.passed, [c.counterexample for c in rep.failures()]

    def test_equivalence_odd_is_a_superalgebra(self, odd):
        rep = lattice_equivalence_check(odd, 2)
        assert rep.passed
        assert [[str(x) for x in row] for row in rep.meta["ambient_gram"]] == [["1"]]


class TestModulePairs:
    @pytest.mark.parametrize("mu,twisted", [("1/4", False), ("1/8", True), ("0", False)])
    def test_classification(self, even, mu, twisted):
        assert ModulePair(even, [mu]).twisted is twisted

    def test_sigma_twisted_has_half_integer_modes(self, even):
        M, rep = module_pair(even, ["1/8"], Window(Q(2), Q(3, 2)))
        assert rep.passed
        odd_u = even.basis(1, 1)[0]
        w = M.basis(1)[0]
        assert M.mode_class(odd_u, w) == Q(1, 2)
