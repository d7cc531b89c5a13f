"""Covariant almost analytic 1-forms under D and B.

A 1-form w is covariant almost analytic for a connection nabla when

    w((nabla_X F)Y - (nabla_Y F)X) = (nabla_{FX} w)(Y) - (nabla_X w)(FY).

The residuals below are left side minus right side.  Passing from D to B
shifts the residual by exactly ``-2 w(T) g(FX, FY)``; ``res_theorem_3_1``
measures the failure of that identity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr
from .connections import FormAtPoint, PointGeometry
from .fields import Chart, TensorField, evaluate_with_partials


@dataclass(frozen=True)
class OneFormField:
    field: TensorField
    provenance: str  # "user-spec" or "fuzzed(<seed>)"

    def __post_init__(self):
        if self.field.valence != (0, 1):
            raise ValueError(f"a 1-form needs valence (0, 1), got {self.field.valence}")

    def at(self, geo: PointGeometry) -> FormAtPoint:
        values, grads = evaluate_with_partials(self.field, geo.point)
        return geo.one_form(values, grads)


def fuzzed_forms(chart: Chart, count: int, seed: int) -> list[OneFormField]:
    """Random 1-forms with polynomial components of degree <= 2."""
    rng = np.random.default_rng([seed, 3])
    n = chart.dimension
    coords = [expr.Var(k, name) for k, name in enumerate(chart.coordinates)]
    forms = []
    for f in range(count):
        comps = []
        for _ in range(n):
            node = expr.const(round(float(rng.uniform(-1, 1)), 6))
            for i in range(n):
                node = expr.add(node, expr.mul(expr.const(round(float(rng.uniform(-1, 1)), 6)), coords[i]))
                for j in range(i, n):
                    c = expr.const(round(float(rng.uniform(-1, 1)), 6))
                    node = expr.add(node, expr.mul(c, expr.mul(coords[i], coords[j])))
            comps.append(node)
        forms.append(OneFormField(TensorField(chart, (0, 1), tuple(comps), f"w{f}"), f"fuzzed({seed})"))
    return forms


def structure_form(s, which: str = "A") -> OneFormField:
    return OneFormField(getattr(s, which), "user-spec")


# --- residuals on a prepared point -------------------------------------------


def caa_D(geo: PointGeometry, w: FormAtPoint, X, Y) -> float:
    bracket = geo.dF(X, Y) - geo.dF(Y, X)
    return w(bracket) - w.d(geo.bar(X), Y) + w.d(X, geo.bar(Y))


def caa_B(geo: PointGeometry, w: FormAtPoint, X, Y) -> float:
    bracket = geo.bF(X, Y) - geo.bF(Y, X)
    return w(bracket) - w.b(geo.bar(X), Y) + w.b(X, geo.bar(Y))


def caa_gap(geo: PointGeometry, w: FormAtPoint, X, Y) -> float:
    """Closed form of caa_B - caa_D."""
    return -2.0 * w(geo.Tv) * geo.g(geo.bar(X), geo.bar(Y))


def gap_identity(geo: PointGeometry, w: FormAtPoint, X, Y) -> float:
    return (caa_B(geo, w, X, Y) - caa_D(geo, w, X, Y)) - caa_gap(geo, w, X, Y)


def printed_bracket(geo: PointGeometry, w: FormAtPoint, X, Y) -> float:
    """w(T) [g(F^2 X, Y) - g(FX, FY)], the correction term as usually written."""
    return w(geo.Tv) * (geo.g(geo.bar(geo.bar(X)), Y) - geo.g(geo.bar(X), geo.bar(Y)))


def exterior_pair(geo: PointGeometry, X, Y) -> tuple[float, float, float]:
    """(dA, dA under B, residual of dA_B = dA + 2 g(X, FY))."""
    dA = geo.dA(X, Y) - geo.dA(Y, X)
    dtA = geo.bA(X, Y) - geo.bA(Y, X)
    return dA, dtA, dtA - dA - 2.0 * geo.g(X, geo.bar(Y))


# --- point-level entry points ------------------------------------------------


def _prepare(s, w: OneFormField, point):
    geo = PointGeometry(s, point)
    return geo, w.at(geo)


def caa_residual_D(s, w: OneFormField, X, Y, point: Sequence[float]) -> float:
    geo, wp = _prepare(s, w, point)
    return caa_D(geo, wp, np.asarray(X, float), np.asarray(Y, float))


def caa_residual_B(s, w: OneFormField, X, Y, point: Sequence[float]) -> float:
    geo, wp = _prepare(s, w, point)
    return caa_B(geo, wp, np.asarray(X, float), np.asarray(Y, float))


def res_theorem_3_1(s, w: OneFormField, X, Y, point: Sequence[float]) -> float:
    geo, wp = _prepare(s, w, point)
    return gap_identity(geo, wp, np.asarray(X, float), np.asarray(Y, float))


def dA_forms(s, X, Y, point: Sequence[float]) -> tuple[float, float, float]:
    return exterior_pair(PointGeometry(s, point), np.asarray(X, float), np.asarray(Y, float))
