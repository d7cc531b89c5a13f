import numpy as np
import pytest

from acmcheck import expr, fuzz
from acmcheck.fields import (
    Chart,
    FieldError,
    SingularMetricError,
    TensorField,
    apply11,
    evaluate,
    fprime,
    fundamental_form,
    metric_at,
    partials,
)
from acmcheck.structure import parse_spec, sample

from oracles import central_difference


def test_flat_metric_is_identity(flat3):
    assert np.array_equal(evaluate(flat3.g, [0.3, -1, 2]), np.eye(3))


def test_flat_T(flat3):
    assert evaluate(flat3.T, [1.5, 0, -2]).tolist() == [0, 0, 1]


def test_sasakian_A_at_y4(sas3):
    # A = (dz - y dx)/2 at y = 4
    assert evaluate(sas3.A, [0, 4, 0]).tolist() == [-2, 0, 0.5]


def test_constant_field_partials_vanish(flat3):
    assert not partials(flat3.F, [0.1, 0.2, 0.3]).any()


def test_sasakian_g11_partial(sas3):
    # g11 = (1 + y^2)/4, so d_y g11 = y/2
    assert partials(sas3.g, [0.0, 2.0, 0.0])[0, 0, 1] == 1.0


def test_metric_at_sasakian_y0(sas3):
    gm, ginv = metric_at(sas3.g, [0.7, 0.0, -1.1])
    assert np.array_equal(gm, np.diag([0.25] * 3))
    assert np.allclose(ginv, np.diag([4.0] * 3), rtol=0, atol=1e-14)


def test_identity_metric_inverse(flat3):
    gm, ginv = metric_at(flat3.g, [0, 0, 0])
    assert np.array_equal(gm, np.eye(3)) and np.array_equal(ginv, np.eye(3))


def test_zero_metric_is_singular():
    s = parse_spec("dimension = 3\ncoordinates = x y z\n[metric]\n[T]\nT 3 = 1\n")
    with pytest.raises(SingularMetricError):
        metric_at(s.g, [0, 0, 0])


def test_field_error_carries_index():
    chart = Chart(("x", "y", "z"))
    f = TensorField.from_array(chart, (0, 1), ["1", "ln(x)", "0"], "w")
    with pytest.raises(FieldError) as info:
        evaluate(f, [0, 0, 0])
    assert info.value.index == (1,)


def test_valence_bound():
    chart = Chart(("x", "y", "z"))
    with pytest.raises(ValueError):
        TensorField.zeros(chart, (2, 2))


def test_apply11_flat(flat3):
    Fm = evaluate(flat3.F, [0, 0, 0])
    assert apply11(Fm, [1, 0, 0]).tolist() == [0, 1, 0]
    assert not apply11(Fm, [0, 0, 0]).any()


def test_apply11_shape_mismatch():
    with pytest.raises(ValueError):
        apply11(np.eye(3), np.ones(2))


def test_F_kills_T(structures):
    for s in structures.values():
        p = np.full(s.dimension, 0.9)
        assert np.max(np.abs(evaluate(s.F, p) @ evaluate(s.T, p))) <= 1e-9


def test_fprime_flat(flat3):
    Fm, gm = evaluate(flat3.F, [0, 0, 0]), np.eye(3)
    X = np.array([1.0, 0, 0])
    assert fprime(gm, Fm, X, Fm @ X) == 1.0


def test_fprime_antisymmetric_and_hybrid(structures):
    for s in structures.values():
        pts, frames = sample(s.dimension, 100, 42)
        for p, fr in zip(pts, frames):
            geo = s.geometry(p)
            Fm, gm = geo.Fm, geo.gm
            assert abs(fprime(gm, Fm, fr.X, fr.Y) + fprime(gm, Fm, fr.Y, fr.X)) <= 1e-9
            assert abs(fprime(gm, Fm, Fm @ fr.X, Fm @ fr.Y) - fprime(gm, Fm, fr.X, fr.Y)) <= 1e-9
            assert abs(fprime(gm, Fm, geo.Tv, fr.Y)) <= 1e-9


def test_fundamental_form_partials_two_ways(structures):
    # symbolic 'F differentiated directly vs product rule on F and g
    for s in structures.values():
        Fp = fundamental_form(s.F, s.g)
        rng = np.random.default_rng(1)
        for p in rng.uniform(-2, 2, (10, s.dimension)):
            direct = partials(Fp, p)
            F, dF = evaluate(s.F, p), partials(s.F, p)
            g, dg = evaluate(s.g, p), partials(s.g, p)
            product = np.einsum("lik,lj->ijk", dF, g) + np.einsum("li,ljk->ijk", F, dg)
            assert np.max(np.abs(direct - product)) <= 1e-12
            assert np.max(np.abs(evaluate(Fp, p) - F.T @ g)) <= 1e-15


def test_partials_match_differences_on_fuzzed_fields():
    chart = Chart(("x", "y", "z"))
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 30:
        comps = [fuzz.random_tree(rng, chart.coordinates, 4) for _ in range(3)]
        f = TensorField(chart, (1, 0), tuple(comps), "v")
        p = rng.uniform(-2, 2, 3)
        try:
            vals, grads = evaluate(f, p), partials(f, p)
            fd = np.array([central_difference(c, p) for c in comps])
        except (FieldError, expr.ExprError):
            continue
        scale = np.maximum(1.0, np.maximum(np.abs(fd), np.abs(vals)[:, None]))
        if np.max(scale) > 1e4:
            continue
        assert np.max(np.abs(grads - fd) / scale) <= 1e-5
        checked += 1


def test_multilinearity(structures):
    rng = np.random.default_rng(9)
    for s in structures.values():
        geo = s.geometry(rng.uniform(-2, 2, s.dimension))
        X, X2, Y, Z = rng.standard_normal((4, s.dimension))
        a, b = rng.uniform(-3, 3, 2)
        Fm, gm = geo.Fm, geo.gm
        lhs = fprime(gm, Fm, a * X + b * X2, Y)
        assert abs(lhs - a * fprime(gm, Fm, X, Y) - b * fprime(gm, Fm, X2, Y)) <= 1e-10
        lhs = geo.dFp(a * X + b * X2, Y, Z)
        assert abs(lhs - a * geo.dFp(X, Y, Z) - b * geo.dFp(X2, Y, Z)) <= 1e-10
        lhs = geo.bFp(X, Y, a * Z + b * X2)
        assert abs(lhs - a * geo.bFp(X, Y, Z) - b * geo.bFp(X, Y, X2)) <= 1e-10


def test_product_then_contract_gives_A_of_T(sas3):
    from acmcheck.fields import contract, tensor_product
    AT = contract(tensor_product(sas3.T, sas3.A), 0, 0)
    assert AT.valence == (0, 0)
    for p in ([0, 0, 0], [1.2, -0.4, 2.0]):
        assert evaluate(AT, p) == pytest.approx(1.0, abs=1e-15)
