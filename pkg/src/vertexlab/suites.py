"""Named verification suites run by the CLI and the suite runner.

Each suite takes a plain config mapping and returns one :class:`CheckReport`.
Config values may be strings ("p/q"), integers or rationals; missing keys
fall back to the defaults listed on each suite.  Negative controls are run
inside the suites and reported under ``meta`` so that they never count as
failures of the suite itself.
"""

from __future__ import annotations

from collections.abc import Callable
from typing import Any

from .conjugation import (
    check_conjugation,
    check_exponential_identities,
    check_two_variable,
    creation_conjugation_sides,
    creation_shift_sides,
)
from .contragredient import (
    Grading,
    shifted_virasoro_check,
    verify_conjugation_formulas,
    verify_double_contragredient,
    verify_contragredient_module,
    verify_delta_contragredient,
)
from .delta import (
    DeltaOperator,
    classify_twist,
    compose,
    derivative_cases,
    twisted_from_delta,
    verify_delta_conditions,
)
from .extension import (
    build_extension,
    lattice_equivalence_check,
    module_pair,
    sigma_isomorphism_check,
    split_fixed_module,
    verify_bar_routes,
    verify_double_translation,
    verify_double_twist_map,
    verify_skew_symmetry,
    verify_super_jacobi,
    verify_translation_exponentials,
)
from .fock import FockVector, LaurentVector, PairingSpace, sort_modes, vscale
from .lattice import LatticeModule, LatticeVOA, cocycle_violations
from .scalars import Q, parse_rational
from .verifier import CaseBuilder, CheckReport, Window, jacobi_cases

__all__ = ["SUITE_FUNCTIONS", "normalize_config", "DEFAULTS"]

DEFAULTS: dict[str, dict[str, Any]] = {
    "axioms": {"gram": [[2]], "wmax": 4, "mode_bound": 4},
    "delta": {"gram": [[8]], "h": ["1/2"], "wmax": 4},
    "twisted": {"gram": [[2]], "h": ["1/2"], "wmax": 4, "mode_bound": "5/2"},
    "extension": {"gram": [[8]], "h": ["1/2"], "wmax": 4, "mode_bound": 4},
    "contragredient": {"gram": [[2]], "h": ["1/2"], "coset": ["1/2"], "wmax": 2,
                       "mode_bound": 2},
    "lemmas": {"gram": [[4]], "h": ["1/2"], "wmax": 3, "degree": 5},
}


def _vec(x: Any) -> tuple[Q, ...]:
    if isinstance(x, (str, int)) or isinstance(x, type(Q(0))):
        x = [x]
    return tuple(Q(parse_rational(v) if isinstance(v, str) else v) for v in x)


def normalize_config(suite: str, config: dict[str, Any]) -> dict[str, Any]:
    """Merge ``config`` over the suite defaults and parse every rational."""
    raw = {**DEFAULTS.get(suite, {}), **{k: v for k, v in config.items() if v is not None}}
    out: dict[str, Any] = dict(raw)
    out["gram"] = [list(_vec(row)) for row in raw["gram"]]
    rank = len(out["gram"])
    for key in ("h", "coset", "grading_h", "h_twisted"):
        if key in raw:
            out[key] = _vec(raw[key])
            if len(out[key]) != rank:
                raise ValueError(f"{key} needs {rank} coordinates")
    for key in ("wmax", "mode_bound"):
        if key in raw:
            out[key] = Q(parse_rational(raw[key]) if isinstance(raw[key], str) else raw[key])
    if "degree" in raw:
        out["degree"] = int(raw["degree"])
    if "mu_list" in raw:
        out["mu_list"] = [_vec(m) for m in raw["mu_list"]]
    if "h_list" in raw:
        out["h_list"] = [_vec(m) for m in raw["h_list"]]
    out.setdefault("cocycle", "auto")
    return out


def _voa(cfg: dict[str, Any]) -> LatticeVOA:
    return LatticeVOA(cfg["gram"], cocycle=cfg["cocycle"])


def _zero(cfg: dict[str, Any]) -> tuple[Q, ...]:
    return tuple(Q(0) for _ in cfg["gram"])


# axioms ------------------------------------------------------------------------------

def axioms_suite(config: dict[str, Any]) -> CheckReport:
    """Commutator, iterate, creation and L(-1) identities of V_L on itself."""
    cfg = normalize_config("axioms", config)
    voa = _voa(cfg)
    zero = _zero(cfg)
    window = Window(cfg["wmax"], cfg["mode_bound"])
    R = LatticeModule(voa)
    basis = voa.basis(zero, cfg["wmax"])
    report = CheckReport("axioms", meta={
        "gram": cfg["gram"], "cocycle": voa.cocycle.as_json(),
        "cocycle_violations": len(cocycle_violations(voa.space, voa.cocycle, 1)),
        "basis_size": len(basis)})
    report.cases += jacobi_cases(R, basis, basis, basis, window)

    vac = voa.vacuum_key()
    b = CaseBuilder("creation", {"count": len(basis)}, window)
    bound = int(cfg["mode_bound"])
    for u in basis:
        b.compare({"u": u, "p": -1}, voa.mode_key(u, Q(-1), vac), FockVector({u: 1}))
        for p in range(0, bound + 1):
            b.compare({"u": u, "p": p}, voa.mode_key(u, Q(p), vac), FockVector())
        for p in range(-bound, bound + 1):
            want = FockVector({u: 1}) if p == -1 else FockVector()
            b.compare({"vacuum_mode": p, "w": u}, voa.mode_key(vac, Q(p), u), want)
    report.cases.append(b.done())
    report.cases.append(derivative_cases(R, lambda u: voa.virasoro(-1, {u: 1}), basis, basis,
                                         window, tag="derivative"))
    return report


# Delta operator laws -----------------------------------------------------------------

def _e_commutation_cases(order: int) -> list:
    """(alpha, beta, gamma) in {(1,1,2), (1,-1,2), (2,1,1)} on 1 and one excited vector."""
    from .series import check_E_commutation

    out = []
    for alpha, beta, gram in ((1, 1, [[2]]), (1, -1, [[2]]), (2, 1, [[1]])):
        space = PairingSpace(gram)
        zero = space.zero
        vectors = [{(zero, ()): 1}, {(zero, sort_modes(((0, 1), (0, 2)))): 1}]
        rep = check_E_commutation(space, Q(alpha), Q(beta), space.basis(0), order, vectors)
        out += rep.cases
    return out


def delta_suite(config: dict[str, Any]) -> CheckReport:
    """Closed forms, composition and inverse laws, Delta conditions, E-commutation.

    Cartan vectors: ``h_list`` if given, else h, h/2 and 2h.
    """
    cfg = normalize_config("delta", config)
    voa = _voa(cfg)
    zero = _zero(cfg)
    wmax = cfg["wmax"]
    h = cfg["h"]
    hs = cfg.get("h_list") or [h, vscale(Q(1, 2), h), vscale(Q(2), h)]
    basis = voa.basis(zero, wmax)
    report = CheckReport("delta", meta={"gram": cfg["gram"], "h_list": hs, "wmax": wmax})
    ops = [DeltaOperator(voa, x) for x in hs]
    vac = voa.vacuum_key()
    omega = voa.omega()
    for d in ops:
        hv = d.vector()
        g = d.gamma
        b = CaseBuilder("delta-closed-forms", {"h": d.h}, {})
        _cmp_lv(b, {"on": "vacuum"}, d.apply({vac: 1}), LaurentVector({0: {vac: 1}}))
        _cmp_lv(b, {"on": "h"}, d.apply(hv), LaurentVector({0: hv, -1: {vac: g}}))
        _cmp_lv(b, {"on": "omega"}, d.apply(omega),
                LaurentVector({0: omega, -1: hv, -2: {vac: g / 2}}))
        report.cases.append(b.done())

        inv = DeltaOperator(voa, vscale(Q(-1), d.h))
        b = CaseBuilder("delta-inverse", {"h": d.h}, {"wmax": str(wmax)})
        for k in basis:
            out, _ = compose(d, inv, {k: 1})
            _cmp_lv(b, {"a": k}, out, LaurentVector({0: {k: 1}}))
        report.cases.append(b.done())
        for d2 in ops:
            b = CaseBuilder("delta-composition", {"h1": d.h, "h2": d2.h}, {"wmax": str(wmax)})
            for k in basis:
                _, case = compose(d, d2, {k: 1})
                b.require({"a": k}, case.passed, case.counterexample)
            report.cases.append(b.done())
        small = voa.basis(zero, min(wmax, Q(2)))
        report.cases += verify_delta_conditions(d, small, small, Window(min(wmax, Q(3)),
                                                                        Q(3))).cases
    report.cases += _e_commutation_cases(6)
    return report


def _cmp_lv(b: CaseBuilder, cell: dict, lhs: LaurentVector, rhs: LaurentVector) -> None:
    for e in sorted(set(lhs) | set(rhs)):
        b.compare({**cell, "z": e}, lhs.coefficient(e), rhs.coefficient(e))


# twists ------------------------------------------------------------------------------

def twisted_suite(config: dict[str, Any]) -> CheckReport:
    """Simple-current twist by h and the twisted module of h_twisted (default h/2)."""
    cfg = normalize_config("twisted", config)
    voa = _voa(cfg)
    zero = _zero(cfg)
    h = cfg["h"]
    report = CheckReport("twisted", meta={"gram": cfg["gram"], "h": h})
    d = DeltaOperator(voa, h)
    if d.integral_on(zero):
        coset = cfg.get("coset", zero)
        target, rep = classify_twist(d, coset, cfg["wmax"])
        report.cases += rep.cases
        spectrum = rep.meta["h_spectrum"]
        want = d.charge(tuple(x + y for x, y in zip(coset, h))) % 1
        b = CaseBuilder("simple-current-spectrum", {"h": h, "coset": coset}, {})
        for s in spectrum:
            b.require({"eigenvalue": s}, (s - want) % 1 == 0)
        report.cases.append(b.done())
        report.meta.update({"target": target, "h_spectrum": spectrum[:12],
                            "character": rep.meta["character"],
                            "target_character": rep.meta["target_character"]})
    else:
        report.meta["simple_current"] = "skipped: <h, L> is not integral"
    ht = cfg.get("h_twisted", vscale(Q(1, 2), h))
    dt = DeltaOperator(voa, ht)
    window = Window(min(cfg["wmax"], Q(3)), cfg["mode_bound"])
    rep = twisted_from_delta(dt, None, window)
    report.cases += rep.cases
    report.meta.update({"h_twisted": ht, "sigma_order": rep.meta["sigma_order"],
                        "mode_classes": rep.meta["mode_classes"]})
    return report


# lemmas ------------------------------------------------------------------------------

def _two_variable_case(tag: str, voa: LatticeVOA, h, vectors, degree: int,
                       sides: Callable) -> Any:
    b = CaseBuilder(tag, {"h": h}, {"degree": degree})
    for a in vectors:
        for w in vectors:
            lhs, rhs, keep = sides(voa, h, a, w, degree)
            check_two_variable(b, lhs, rhs, keep, {"a": a, "b": w})
    return b.done()


def lemmas_suite(config: dict[str, Any]) -> CheckReport:
    """Conjugation, exponential, translation and creation lemmas on one lattice.

    The translation lemmas need the extension hypotheses (gamma integral,
    2h in L); when they fail those checks are listed as not applicable.
    """
    cfg = normalize_config("lemmas", config)
    voa = _voa(cfg)
    zero = _zero(cfg)
    h = cfg["h"]
    wmax = cfg["wmax"]
    degree = cfg["degree"]
    vectors = voa.basis(zero, wmax)
    small = voa.basis(zero, min(wmax, Q(2)))
    report = CheckReport("lemmas", meta={"gram": cfg["gram"], "h": h, "wmax": wmax,
                                         "degree": degree})
    report.cases += check_conjugation(voa, h, vectors, degree, "annihilation").cases
    report.cases += check_exponential_identities(voa, h, vectors, degree)
    report.cases.append(_two_variable_case("creation-shift", voa, h, small, degree,
                                           creation_shift_sides))
    report.cases.append(_two_variable_case("creation-conjugation", voa, h, small, degree,
                                           creation_conjugation_sides))
    # the two other readings of the conjugation formula, as witnesses
    probe = voa.basis(zero, 1)
    for variant in ("creation", "delta"):
        rep = check_conjugation(voa, h, probe, min(degree, 3), variant)
        bad = rep.failures()
        report.meta[f"{variant}_reading"] = {
            "holds": not bad, "witness": bad[0].counterexample["cell"] if bad else None}
    try:
        E, _ = build_extension(cfg["gram"], h, cfg["cocycle"], check_wmax=1)
    except ValueError as exc:
        report.meta["translation_lemmas"] = f"not applicable: {exc}"
        return report
    report.cases.append(verify_translation_exponentials(E, E.zero, wmax, degree))
    report.cases.append(verify_translation_exponentials(E, E.odd_coset, wmax, degree,
                                                        tag="translation-exponentials-odd"))
    report.cases.append(verify_double_translation(E, min(wmax, Q(2)), degree))
    return report


# extension -----------------------------------------------------------------------------

def extension_suite(config: dict[str, Any]) -> CheckReport:
    """V + V~: construction, skew-symmetry, super-Jacobi, lattice equivalence, module pairs."""
    cfg = normalize_config("extension", config)
    h = cfg["h"]
    wmax = cfg["wmax"]
    E, rep = build_extension(cfg["gram"], h, cfg["cocycle"])
    report = CheckReport("extension", meta={**rep.meta})
    report.cases += rep.cases
    report.cases.append(verify_bar_routes(E, min(wmax, Q(3))))
    odd = E.basis(min(wmax, Q(3)), 1)
    report.cases.append(verify_skew_symmetry(E, odd, odd, wmax))
    neg = verify_skew_symmetry(E, odd, odd, wmax, sign=-((-1) ** int(E.gamma)),
                               tag="odd-skew-symmetry-wrong-sign")
    report.meta["skew_negative_control"] = {"sign": -((-1) ** int(E.gamma)),
                                            "passed": neg.passed,
                                            "witness": neg.counterexample}
    gens = E.basis(min(wmax, Q(2)))
    report.cases += verify_super_jacobi(E, gens, gens, E.basis(wmax),
                                        Window(wmax, cfg["mode_bound"])).cases
    eq = lattice_equivalence_check(E, wmax)
    report.cases += eq.cases
    report.meta["equivalence"] = eq.meta
    mus = cfg.get("mu_list") or [vscale(Q(1, 2), h), vscale(Q(1, 4), h)]
    twin = Window(min(wmax, Q(3)), Q(5, 2))
    pairs = []
    for mu in mus:
        M, r = module_pair(E, mu, twin)
        report.cases += r.cases
        s = sigma_isomorphism_check(M, min(wmax, Q(3)))
        report.cases += s.cases
        r2 = verify_double_twist_map(E, mu, min(wmax, Q(3)))
        report.cases += r2.cases
        pairs.append({"mu": M.mu, "sigma_twisted": M.twisted, "pi_scalars": r2.meta["scalars"],
                      "sigma_fit": s.meta.get("fit")})
    report.meta["module_pairs"] = pairs
    # the splitting of W + W~ is exercised on the degenerate case h' = 2h in L
    E2, _ = build_extension(cfg["gram"], vscale(Q(2), h), cfg["cocycle"], check_wmax=1)
    _, r = split_fixed_module(E2, _zero(cfg), min(wmax, Q(3)))
    report.cases += r.cases
    report.meta["split"] = {"h": E2.h, **r.meta}
    return report


# contragredient -------------------------------------------------------------------------

def contragredient_suite(config: dict[str, Any]) -> CheckReport:
    """Contragredient twisted modules, conjugation formulas, shifted Virasoro, Delta(-2h).

    The rational grading comes from omega + g(-2)1 with g = ``grading_h``
    (default h/4).
    """
    cfg = normalize_config("contragredient", config)
    voa = _voa(cfg)
    zero = _zero(cfg)
    h = cfg["h"]
    coset = cfg["coset"]
    g = cfg.get("grading_h", vscale(Q(1, 4), h))
    wmax = cfg["wmax"]
    window = Window(wmax, cfg["mode_bound"])
    report = CheckReport("contragredient", meta={"gram": cfg["gram"], "h": h, "coset": coset})
    for grading_h, label in ((zero, "omega"), (g, "shifted")):
        M, rep = verify_contragredient_module(cfg["gram"], grading_h, coset, window, voa=voa)
        report.cases += rep.cases
        grading = Grading(voa, grading_h)
        report.cases.append(verify_double_contragredient(
            M, grading.basis(zero, min(wmax, Q(1))), grading.basis(coset, wmax),
            cfg["mode_bound"]))
        report.meta[label] = rep.meta
    small = voa.basis(zero, min(wmax, Q(2)))
    rep = verify_conjugation_formulas(voa, small, small)
    report.cases += rep.cases
    report.meta["literal_scaling_form"] = rep.meta["literal_scaling_form"]
    sv, rep = shifted_virasoro_check(voa, h, min(wmax, Q(2)))
    report.cases += rep.cases
    report.meta["central"] = {"from_2": sv.central, "from_3": sv.central_check}
    three = Q(3)
    vectors = voa.basis(zero, three) + voa.basis(coset, three)
    rep = verify_delta_contragredient(voa, h, vectors)
    report.cases += rep.cases
    report.meta["delta_contragredient_phases"] = rep.meta["phases"]
    report.cases += check_exponential_identities(voa, vscale(Q(2), h), voa.basis(zero, three), 5,
                                                 tag_prefix="doubled-")
    return report


SUITE_FUNCTIONS: dict[str, Callable[[dict[str, Any]], CheckReport]] = {
    "axioms": axioms_suite,
    "delta": delta_suite,
    "twisted": twisted_suite,
    "extension": extension_suite,
    "contragredient": contragredient_suite,
    "lemmas": lemmas_suite,
}
