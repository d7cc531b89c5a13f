import numpy as np
import pytest

from acmcheck import analytic, expr
from acmcheck.analytic import OneFormField
from acmcheck.fields import TensorField
from acmcheck.structure import BUILTINS, sample


def form(s, comps, name="w"):
    return OneFormField(TensorField.from_array(s.chart, (0, 1), comps, name), "user-spec")


def frames(s, count=100, seed=42):
    pts, frs = sample(s.dimension, count, seed)
    return [(p, fr.X, fr.Y) for p, fr in zip(pts, frs)]


def test_form_valence_checked(flat3):
    with pytest.raises(ValueError):
        OneFormField(flat3.T, "user-spec")


def test_constant_form_flat(flat3):
    w = form(flat3, [0, 0, 3.5])
    for p, X, Y in frames(flat3, 20):
        assert analytic.caa_residual_D(flat3, w, X, Y, p) == 0.0


def test_zero_form(structures):
    for s in structures.values():
        w = form(s, [0] * s.dimension)
        for p, X, Y in frames(s, 10):
            assert analytic.caa_residual_B(s, w, X, Y, p) == 0.0
            assert analytic.caa_residual_D(s, w, X, Y, p) == 0.0


def test_linearity_in_w(structures):
    for s in structures.values():
        w1, w2 = analytic.fuzzed_forms(s.chart, 2, seed=5)
        summed = [expr.add(a, b) for a, b in zip(w1.field.components, w2.field.components)]
        both = form(s, summed)
        for p, X, Y in frames(s, 20):
            for fn in (analytic.caa_residual_D, analytic.caa_residual_B):
                lhs = fn(s, both, X, Y, p)
                assert abs(lhs - fn(s, w1, X, Y, p) - fn(s, w2, X, Y, p)) <= 1e-10 * max(1, abs(lhs))


def test_gap_two_ways(structures):
    for s in structures.values():
        forms = analytic.fuzzed_forms(s.chart, 3, seed=42)
        for p, X, Y in frames(s, 30):
            geo = s.geometry(p)
            for w in forms:
                wp = w.at(geo)
                direct = analytic.caa_B(geo, wp, X, Y) - analytic.caa_D(geo, wp, X, Y)
                assert abs(direct - analytic.caa_gap(geo, wp, X, Y)) <= 1e-10 * max(1, abs(direct))


def test_gap_for_A(structures):
    for s in structures.values():
        A = analytic.structure_form(s)
        for p, X, Y in frames(s, 30):
            geo = s.geometry(p)
            gap = analytic.caa_residual_B(s, A, X, Y, p) - analytic.caa_residual_D(s, A, X, Y, p)
            assert abs(abs(gap) - 2 * abs(geo.g(geo.bar(X), geo.bar(Y)))) <= 1e-9


def test_A_residual_two_paths(sas3):
    # (D_X A)(Y) = -'F(X,Y) and (D_X F)Y = g(X,Y)T - A(Y)X give a closed form
    A = analytic.structure_form(sas3)
    for p, X, Y in frames(sas3, 50):
        geo = sas3.geometry(p)

        def dA(a, b):
            return -geo.fp(a, b)

        def dF(a, b):
            return geo.g(a, b) * geo.Tv - geo.A(b) * a

        closed = geo.A(dF(X, Y) - dF(Y, X)) - dA(geo.bar(X), Y) + dA(X, geo.bar(Y))
        assert abs(analytic.caa_residual_D(sas3, A, X, Y, p) - closed) <= 1e-9


def test_gap_vanishes_along_T(structures):
    for s in structures.values():
        w = analytic.fuzzed_forms(s.chart, 1, seed=1)[0]
        for p, _, Y in frames(s, 20):
            geo = s.geometry(p)
            assert abs(analytic.caa_gap(geo, w.at(geo), geo.Tv, Y)) <= 1e-12
            assert abs(analytic.res_theorem_3_1(s, w, geo.Tv, Y, p)) <= 1e-9


def test_dx_on_flat_is_connection_blind(flat3):
    w = form(flat3, ["1", "0", "0"])
    for p, X, Y in frames(flat3, 30):
        assert analytic.caa_residual_B(flat3, w, X, Y, p) == analytic.caa_residual_D(flat3, w, X, Y, p)


@pytest.mark.parametrize("name", BUILTINS)
def test_gap_identity_fuzzed(structures, name):
    s = structures[name]
    forms = analytic.fuzzed_forms(s.chart, 10, seed=42)
    for p, X, Y in frames(s):
        geo = s.geometry(p)
        for w in forms:
            assert abs(analytic.gap_identity(geo, w.at(geo), X, Y)) <= 1e-9


def test_dA_flat_pair(flat3):
    dA, dtA, res = analytic.dA_forms(flat3, [1, 0, 0], [0, 1, 0], [0.5, 0.5, 0.5])
    assert (dA, dtA, res) == (0.0, -2.0, 0.0)


@pytest.mark.parametrize("name", BUILTINS)
def test_dA_identity(structures, name):
    s = structures[name]
    for p, X, Y in frames(s):
        dA, dtA, res = analytic.dA_forms(s, X, Y, p)
        assert abs(res) <= 1e-9
        assert analytic.dA_forms(s, X, X, p) == (0.0, 0.0, 0.0) or max(
            map(abs, analytic.dA_forms(s, X, X, p))) <= 1e-15
        back = analytic.dA_forms(s, Y, X, p)
        assert dA == -back[0] and dtA == -back[1]


def test_printed_bracket_agrees_with_forced_gap(structures):
    # g(F^2 X, Y) = -g(FX, FY) makes the usual bracket equal the closed-form gap
    for s in structures.values():
        w = analytic.fuzzed_forms(s.chart, 1, seed=2)[0]
        for p, X, Y in frames(s, 20):
            geo = s.geometry(p)
            wp = w.at(geo)
            assert abs(analytic.printed_bracket(geo, wp, X, Y) - analytic.caa_gap(geo, wp, X, Y)) <= 1e-9
