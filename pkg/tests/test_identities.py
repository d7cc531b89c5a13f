import numpy as np
import pytest

from acmcheck import identities as ids
from acmcheck.structure import BUILTINS, StructureNotValidated, dump_spec, parse_spec, sample, validated

E = np.eye(3)


def frames(s, count=100, seed=42):
    pts, frs = sample(s.dimension, count, seed)
    for p, fr in zip(pts, frs):
        yield s.geometry(p), fr.X, fr.Y, fr.Z


def closed_form_nijenhuis(geo, X, Y, Z):
    """Sasakian only: (D_X 'F)(Y,Z) = g(X,Y)A(Z) - A(Y)g(X,Z)."""
    def K(a, b, c):
        return geo.g(a, b) * geo.A(c) - geo.A(b) * geo.g(a, c)
    Xb, Yb, Zb = geo.bar(X), geo.bar(Y), geo.bar(Z)
    return K(Xb, Y, Z) - K(Yb, X, Z) + K(X, Y, Zb) - K(Y, X, Zb)


def test_nijenhuis_golden_value(sas3):
    geo = sas3.geometry([0.0, 0.0, 0.0])
    assert ids.nijenhuis(geo, E[0], E[1], E[2]) == pytest.approx(-0.25, abs=1e-15)


def test_nijenhuis_two_paths(structures):
    for name in ("sasakian-3", "sasakian-5"):
        for geo, X, Y, Z in frames(structures[name], 50):
            assert abs(ids.nijenhuis(geo, X, Y, Z) - closed_form_nijenhuis(geo, X, Y, Z)) <= 1e-9


def test_exact_antisymmetry(structures):
    for s in structures.values():
        for geo, X, Y, Z in frames(s, 30):
            assert ids.nijenhuis(geo, X, Y, Z) == -ids.nijenhuis(geo, Y, X, Z)
            assert ids.d_primeF(geo, X, Y, Z) == -ids.d_primeF(geo, Y, X, Z)
            assert ids.d_primeF(geo, X, Y, Y) == 0.0


def test_repeated_argument_zero(structures):
    for s in structures.values():
        for geo, X, _, _ in frames(s, 20):
            assert ids.res_gen_quasi_sasakian(geo, X, X, X) == 0.0
            assert ids.d_primeF(geo, X, X, geo.bar(X)) == 0.0


@pytest.mark.parametrize("name", BUILTINS)
def test_cosymplectic_and_quasi_sasakian(structures, name):
    for geo, X, Y, Z in frames(structures[name]):
        assert abs(ids.res_gen_cosymplectic(geo, X, Y, Z)) <= 1e-9
        assert abs(ids.res_gen_quasi_sasakian(geo, X, Y, Z)) <= 1e-9
        assert abs(ids.res_gen_cosymplectic(geo, X, Y, Y)) <= 1e-9


def test_flat_everything_zero(flat3):
    for geo, X, Y, Z in frames(flat3, 20):
        assert ids.nijenhuis(geo, X, Y, Z) == 0.0
        assert ids.d_primeF(geo, X, Y, Z) == 0.0
        assert ids.res_gen_cosymplectic(geo, X, Y, Z) == 0.0


def test_sasakian_fprime_closed(structures):
    for name in ("sasakian-3", "sasakian-5"):
        for geo, X, Y, Z in frames(structures[name]):
            assert abs(ids.d_primeF(geo, X, Y, Z)) <= 1e-9


def test_classification(structures):
    for name in ("flat-cosymplectic-3", "flat-cosymplectic-5"):
        assert ids.classify_T(structures[name]).label == "both"
    for name in ("sasakian-3", "sasakian-5"):
        c = ids.classify_T(structures[name])
        assert c.label == "first-class"
        assert c.first_residual <= 1e-9 and c.second_residual > 0.1


def test_classify_refuses_unvalidated(sas3):
    flipped = parse_spec(dump_spec(sas3).replace("T 3 = 2", "T 3 = -2"))
    assert validated(flipped)[0] is None
    with pytest.raises(StructureNotValidated):
        ids.classify_T(flipped)


def test_registry_shape():
    assert len(ids.REGISTRY) >= 20
    assert set(ids.ASSERT_SUITE) <= {c.id for c in ids.REGISTRY if c.asserted}
    audit = {c.id for c in ids.select(mode="audit")}
    assert {"T2.3", "T2.6", "T2.7", "C2.1"} <= audit
    assert all(c.premise is not None for c in ids.REGISTRY if c.mode == "assert-conditional")


def test_select_order_and_errors():
    order = [c.id for c in ids.select(["T2.1", "E5", "C2.1", "E11"])]
    assert order == ["E5", "E11", "T2.1", "C2.1"]
    with pytest.raises(KeyError):
        ids.select(["BOGUS"])


@pytest.mark.parametrize("name", BUILTINS)
def test_assert_suite_passes(structures, name):
    reports = ids.run_checks(structures[name], ids.select(list(ids.ASSERT_SUITE)))
    bad = [(r.check_id, r.max_abs_residual) for r in reports if r.verdict != "pass"]
    assert not bad


def test_first_class_carries_to_B(sas3):
    r = ids.run_check(sas3, "T2.2")
    assert r.verdict == "pass" and r.premise_residual <= 1e-9 and r.max_abs_residual <= 1e-9


def test_audit_reports_premise_and_conclusion(structures):
    for s in structures.values():
        for r in ids.run_checks(s, ids.select(["T2.3", "T2.6", "T2.7", "C2.1"])):
            assert r.verdict == "reported"
            assert r.premise_residual is not None and r.max_abs_residual is not None


def test_printed_normality_differs(sas3):
    # the B form with +g(X,Y) is off by 2A(Z)g(X,Y)
    for geo, X, Y, Z in frames(sas3, 20):
        gap = ids.normality_B_printed(geo, X, Y, Z) - ids.normality_B(geo, X, Y, Z)
        assert abs(abs(gap) - abs(2 * geo.A(Z) * geo.g(X, Y))) <= 1e-9


def test_failed_assert_carries_frame(sas3):
    # a tiny tolerance makes noise-level residuals fail
    r = ids.run_check(sas3, "E11", points=10, tol=1e-300)
    if r.verdict == "fail":
        assert set(r.worst_frame) == {"point", "X", "Y", "Z"}


def test_unknown_check_id(sas3):
    with pytest.raises(KeyError):
        ids.run_check(sas3, "T9.9")
