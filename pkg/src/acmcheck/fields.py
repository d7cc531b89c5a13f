"""Tensor fields over a single coordinate chart.

A field of valence (p, q) stores ``n**(p+q)`` component expressions in
row-major order, contravariant slots first.  So for a (1,1) field ``F`` the
component ``F[i, j]`` is ``F^i_j`` and ``(FX)^i = F[i, j] X^j``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr
from .expr import Node

SINGULAR_DET = 1e-12


class FieldError(Exception):
    """Evaluation failure tagged with the component multi-index."""

    def __init__(self, field: str, index: tuple[int, ...], cause: Exception):
        shown = "".join(f"[{i + 1}]" for i in index)
        super().__init__(f"{field}{shown}: {cause}")
        self.index = index
        self.cause = cause


class SingularMetricError(ValueError):
    def __init__(self, det: float, point: Sequence[float] | None = None):
        where = "" if point is None else f" at {list(map(float, point))}"
        super().__init__(f"singular metric (det = {det:.3e}){where}")
        self.det = det
        self.point = None if point is None else np.asarray(point, dtype=float)


@dataclass(frozen=True)
class Chart:
    coordinates: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        if not self.coordinates:
            raise ValueError("a chart needs at least one coordinate")
        if len(set(self.coordinates)) != len(self.coordinates):
            raise ValueError(f"duplicate coordinate names: {self.coordinates}")
        for name in self.coordinates:
            if not expr._IDENT.fullmatch(name) or name in expr.FUNCTIONS:
                raise ValueError(f"invalid coordinate name {name!r}")

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def parse(self, source: str) -> Node:
        return expr.parse_expression(source, self.coordinates)


@dataclass(frozen=True)
class TensorField:
    chart: Chart
    valence: tuple[int, int]
    components: tuple[Node, ...]
    name: str = "field"

    def __post_init__(self):
        p, q = self.valence
        if p < 0 or q < 0 or p + q > 3:
            raise ValueError(f"unsupported valence {self.valence}")
        n = self.chart.dimension
        if len(self.components) != n ** (p + q):
            raise ValueError(f"{self.name}: expected {n ** (p + q)} components, got {len(self.components)}")
        for node in self.components:
            bad = [k for k in expr.variables(node) if k >= n]
            if bad:
                raise ValueError(f"{self.name}: component references coordinate {bad[0]} outside the chart")

    @property
    def rank(self) -> int:
        return sum(self.valence)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.chart.dimension,) * self.rank

    def indices(self):
        return itertools.product(range(self.chart.dimension), repeat=self.rank)

    def component(self, *index: int) -> Node:
        return self.components[int(np.ravel_multi_index(index, self.shape))] if index else self.components[0]

    @classmethod
    def from_array(cls, chart: Chart, valence: tuple[int, int], comps, name: str = "field") -> "TensorField":
        """Build from a nested array of nodes, numbers or source strings."""
        flat = []
        for item in np.asarray(comps, dtype=object).reshape(-1):
            if isinstance(item, str):
                item = chart.parse(item)
            elif isinstance(item, (int, float, np.floating, np.integer)):
                item = expr.const(float(item))
            flat.append(item)
        return cls(chart, valence, tuple(flat), name)

    @classmethod
    def zeros(cls, chart: Chart, valence: tuple[int, int], name: str = "field") -> "TensorField":
        return cls(chart, valence, (expr.ZERO,) * chart.dimension ** sum(valence), name)


def evaluate(field: TensorField, point: Sequence[float]) -> np.ndarray:
    point = _check_point(field.chart, point)
    out = np.empty(len(field.components))
    for k, node in enumerate(field.components):
        try:
            out[k] = expr.evaluate(node, point)
        except expr.ExprError as exc:
            raise FieldError(field.name, _unravel(k, field.shape), exc) from exc
    return out.reshape(field.shape)


def partials(field: TensorField, point: Sequence[float]) -> np.ndarray:
    """Array of shape ``field.shape + (n,)``; entry ``[I, k]`` is d_k of component I."""
    point = _check_point(field.chart, point)
    n = field.chart.dimension
    out = np.empty((len(field.components), n))
    for k, node in enumerate(field.components):
        try:
            out[k] = expr.evaluate_dual(node, point).partials
        except expr.ExprError as exc:
            raise FieldError(field.name, _unravel(k, field.shape), exc) from exc
    return out.reshape(field.shape + (n,))


def evaluate_with_partials(field: TensorField, point: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    point = _check_point(field.chart, point)
    n = field.chart.dimension
    vals = np.empty(len(field.components))
    grads = np.empty((len(field.components), n))
    for k, node in enumerate(field.components):
        try:
            d = expr.evaluate_dual(node, point)
        except expr.ExprError as exc:
            raise FieldError(field.name, _unravel(k, field.shape), exc) from exc
        vals[k] = d.value
        grads[k] = d.partials
    return vals.reshape(field.shape), grads.reshape(field.shape + (n,))


def _unravel(k: int, shape: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(k, shape)) if shape else ()


def _check_point(chart: Chart, point) -> np.ndarray:
    point = np.asarray(point, dtype=float)
    if point.shape != (chart.dimension,):
        raise ValueError(f"point has shape {point.shape}, chart dimension is {chart.dimension}")
    return point


def metric_at(g: TensorField, point: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    if g.valence != (0, 2):
        raise ValueError(f"metric must have valence (0, 2), got {g.valence}")
    gm = evaluate(g, point)
    return gm, invert_metric(gm, point)


def invert_metric(gm: np.ndarray, point=None) -> np.ndarray:
    det = np.linalg.det(gm)
    if not np.isfinite(det) or abs(det) < SINGULAR_DET:
        raise SingularMetricError(float(det), point)
    # LAPACK gesv: LU with partial pivoting
    return np.linalg.solve(gm, np.eye(len(gm)))


# --- index algebra on component expressions --------------------------------


def tensor_product(a: TensorField, b: TensorField, name: str | None = None) -> TensorField:
    """Outer product; the result keeps a's contravariant slots, then b's,
    then a's covariant slots, then b's."""
    if a.chart != b.chart:
        raise ValueError("fields live on different charts")
    (pa, qa), (pb, qb) = a.valence, b.valence
    n = a.chart.dimension
    A = np.asarray(a.components, dtype=object).reshape(a.shape or ())
    B = np.asarray(b.components, dtype=object).reshape(b.shape or ())
    out = np.empty((n,) * (pa + qa + pb + qb), dtype=object)
    for idx in itertools.product(range(n), repeat=pa + qa + pb + qb):
        ia = idx[:pa] + idx[pa + pb: pa + pb + qa]
        ib = idx[pa: pa + pb] + idx[pa + pb + qa:]
        out[idx] = expr.mul(A[ia] if ia else A[()], B[ib] if ib else B[()])
    return TensorField(a.chart, (pa + pb, qa + qb), tuple(out.reshape(-1)), name or f"{a.name}*{b.name}")


def contract(field: TensorField, upper: int, lower: int, name: str | None = None) -> TensorField:
    """Trace a contravariant slot against a covariant slot (slot numbers are
    positions within each group)."""
    p, q = field.valence
    if not (0 <= upper < p and 0 <= lower < q):
        raise ValueError(f"cannot contract slots ({upper}, {lower}) of valence {field.valence}")
    n = field.chart.dimension
    A = np.asarray(field.components, dtype=object).reshape(field.shape)
    iu, il = upper, p + lower
    rest = [s for s in range(p + q) if s not in (iu, il)]
    out = np.empty((n,) * len(rest), dtype=object)
    for idx in itertools.product(range(n), repeat=len(rest)):
        total = expr.ZERO
        for m in range(n):
            full = [0] * (p + q)
            for s, v in zip(rest, idx):
                full[s] = v
            full[iu] = full[il] = m
            total = expr.add(total, A[tuple(full)])
        out[idx] = total
    return TensorField(field.chart, (p - 1, q - 1), tuple(out.reshape(-1)), name or f"tr({field.name})")


def lower_index(values: np.ndarray, gm: np.ndarray, slot: int = 0) -> np.ndarray:
    """Lower contravariant slot ``slot`` of an evaluated array; the new
    covariant slot takes its place."""
    return np.moveaxis(np.tensordot(gm, values, axes=([1], [slot])), 0, slot)


def raise_index(values: np.ndarray, ginv: np.ndarray, slot: int = 0) -> np.ndarray:
    return np.moveaxis(np.tensordot(ginv, values, axes=([1], [slot])), 0, slot)


def apply11(Fm: np.ndarray, v: np.ndarray) -> np.ndarray:
    """The bar map X -> FX."""
    Fm = np.asarray(Fm, dtype=float)
    v = np.asarray(v, dtype=float)
    if Fm.ndim != 2 or Fm.shape[1] != v.shape[0]:
        raise ValueError(f"shape mismatch: {Fm.shape} applied to {v.shape}")
    return Fm @ v


def fprime(gm: np.ndarray, Fm: np.ndarray, X: np.ndarray, Y: np.ndarray) -> float:
    """'F(X, Y) = g(FX, Y)."""
    return float(apply11(Fm, X) @ gm @ Y)


def fundamental_form(F: TensorField, g: TensorField) -> TensorField:
    """'F as a (0,2) field: 'F_ij = F^l_i g_lj.

    Contracted term by term; F (x) g would have rank 4.
    """
    if F.chart != g.chart:
        raise ValueError("fields live on different charts")
    n = F.chart.dimension
    comps = []
    for i, j in itertools.product(range(n), repeat=2):
        total = expr.ZERO
        for m in range(n):
            total = expr.add(total, expr.mul(F.component(m, i), g.component(m, j)))
        comps.append(total)
    return TensorField(F.chart, (0, 2), tuple(comps), "'F")
