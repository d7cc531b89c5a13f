"""The Levi-Civita connection D and the semi-symmetric non-metric connection B.

Connection coefficients are stored as ``C[k, i, j]`` with
``nabla_{d_i} d_j = C[k, i, j] d_k``; the middle index is the direction.
For B the coefficients are ``gamma + corr`` with
``corr[k, i, j] = 'F_ij T^k``, i.e. ``B_X Y = D_X Y + 'F(X, Y) T``.

Covariant derivatives of fields carry the derivative slot last, so
``(nabla_X W)[I] = nabla W[I, k] X^k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fields import TensorField, evaluate_with_partials, invert_metric

SUPPORTED = {(1, 0), (0, 1), (1, 1), (0, 2)}


@dataclass(frozen=True)
class ConnectionCoefficients:
    point: np.ndarray
    gamma: np.ndarray
    correction: np.ndarray

    @property
    def b(self) -> np.ndarray:
        return self.gamma + self.correction


@dataclass(frozen=True)
class CovariantDerivative:
    values: np.ndarray
    connection: str  # "D" or "B"
    valence: tuple[int, int]

    def along(self, X: np.ndarray) -> np.ndarray:
        return self.values @ X


def christoffel(gm: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Levi-Civita symbols from the metric and ``dg[i, j, k] = d_k g_ij``."""
    ginv = invert_metric(gm)
    dg = 0.5 * (dg + dg.transpose(1, 0, 2))
    # s[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij, symmetric in (i, j) term by term
    s = dg.transpose(2, 0, 1) + dg.transpose(0, 2, 1) - dg
    return 0.5 * np.einsum("kl,ijl->kij", ginv, s)


def christoffel_at(g: TensorField, point: Sequence[float]) -> np.ndarray:
    gm, dg = evaluate_with_partials(g, point)
    return christoffel(gm, dg)


def covariant(values: np.ndarray, grads: np.ndarray, valence: tuple[int, int], coeffs: np.ndarray) -> np.ndarray:
    """Covariant derivative of an evaluated field.

    ``values`` has the field's shape, ``grads`` one extra trailing slot of
    partial derivatives and ``coeffs`` is ``C[k, i, j]`` as above.
    """
    if tuple(valence) not in SUPPORTED:
        raise ValueError(f"covariant derivative of valence {valence} is not supported")
    p, q = valence
    out = np.array(grads, dtype=float)
    rank = p + q
    for s in range(rank):
        if s < p:
            # + C^a_{k m} W^{..m..}
            term = np.tensordot(coeffs, values, axes=([2], [s]))  # [a, k, rest...]
            out += np.moveaxis(np.moveaxis(term, 1, -1), 0, s)
        else:
            # - C^m_{k b} W_{..m..}
            term = np.tensordot(coeffs, values, axes=([0], [s]))  # [k, b, rest...]
            out -= np.moveaxis(np.moveaxis(term, 0, -1), 0, s)
    return out


def fprime_array(Fm: np.ndarray, gm: np.ndarray) -> np.ndarray:
    """'F_ij = g(F d_i, d_j)."""
    return Fm.T @ gm


def correction(Fm: np.ndarray, gm: np.ndarray, Tv: np.ndarray) -> np.ndarray:
    return np.einsum("ij,k->kij", fprime_array(Fm, gm), Tv)


def connection_coefficients(structure, point: Sequence[float]) -> ConnectionCoefficients:
    gm, dg = evaluate_with_partials(structure.g, point)
    Fm, _ = evaluate_with_partials(structure.F, point)
    Tv, _ = evaluate_with_partials(structure.T, point)
    return ConnectionCoefficients(np.asarray(point, dtype=float), christoffel(gm, dg), correction(Fm, gm, Tv))


def covD(field: TensorField, point: Sequence[float], g: TensorField) -> CovariantDerivative:
    values, grads = evaluate_with_partials(field, point)
    return CovariantDerivative(covariant(values, grads, field.valence, christoffel_at(g, point)), "D", field.valence)


def covB(field: TensorField, point: Sequence[float], structure) -> CovariantDerivative:
    coeffs = connection_coefficients(structure, point)
    values, grads = evaluate_with_partials(field, point)
    return CovariantDerivative(covariant(values, grads, field.valence, coeffs.b), "B", field.valence)


class PointGeometry:
    """Every array the identity checks need at one point of a structure.

    Method names follow ``<connection><object>``: ``dA(X, Y)`` is
    ``(D_X A)(Y)``, ``bFp(X, Y, Z)`` is ``(B_X 'F)(Y, Z)`` and so on.
    """

    def __init__(self, structure, point: Sequence[float]):
        self.point = np.asarray(point, dtype=float)
        self.gm, dg = evaluate_with_partials(structure.g, point)
        self.Fm, dF = evaluate_with_partials(structure.F, point)
        self.Tv, dT = evaluate_with_partials(structure.T, point)
        self.Av, dA = evaluate_with_partials(structure.A, point)
        self.ginv = invert_metric(self.gm, point)
        self.gamma = christoffel(self.gm, dg)
        self.Fp = fprime_array(self.Fm, self.gm)
        self.corr = np.einsum("ij,k->kij", self.Fp, self.Tv)
        bco = self.gamma + self.corr
        # d_k 'F_ij by the product rule on F and g
        dFp = np.einsum("lik,lj->ijk", dF, self.gm) + np.einsum("li,ljk->ijk", self.Fm, dg)
        self.D = {
            "F": covariant(self.Fm, dF, (1, 1), self.gamma),
            "T": covariant(self.Tv, dT, (1, 0), self.gamma),
            "A": covariant(self.Av, dA, (0, 1), self.gamma),
            "g": covariant(self.gm, dg, (0, 2), self.gamma),
            "Fp": covariant(self.Fp, dFp, (0, 2), self.gamma),
        }
        self.B = {
            "F": covariant(self.Fm, dF, (1, 1), bco),
            "T": covariant(self.Tv, dT, (1, 0), bco),
            "A": covariant(self.Av, dA, (0, 1), bco),
            "g": covariant(self.gm, dg, (0, 2), bco),
            "Fp": covariant(self.Fp, dFp, (0, 2), bco),
        }
        self.coefficients = ConnectionCoefficients(self.point, self.gamma, self.corr)

    # algebra at the point
    def bar(self, X):
        return self.Fm @ X

    def g(self, X, Y) -> float:
        return float(X @ self.gm @ Y)

    def A(self, X) -> float:
        return float(self.Av @ X)

    def fp(self, X, Y) -> float:
        return float(X @ self.Fp @ Y)

    # derivatives
    def dF(self, X, Y):
        return np.einsum("ijk,k,j->i", self.D["F"], X, Y)

    def bF(self, X, Y):
        return np.einsum("ijk,k,j->i", self.B["F"], X, Y)

    def dA(self, X, Y) -> float:
        return float(np.einsum("jk,k,j->", self.D["A"], X, Y))

    def bA(self, X, Y) -> float:
        return float(np.einsum("jk,k,j->", self.B["A"], X, Y))

    def dFp(self, X, Y, Z) -> float:
        return float(np.einsum("ijk,k,i,j->", self.D["Fp"], X, Y, Z))

    def bFp(self, X, Y, Z) -> float:
        return float(np.einsum("ijk,k,i,j->", self.B["Fp"], X, Y, Z))

    def dg(self, X, Y, Z) -> float:
        return float(np.einsum("ijk,k,i,j->", self.D["g"], X, Y, Z))

    def bg(self, X, Y, Z) -> float:
        return float(np.einsum("ijk,k,i,j->", self.B["g"], X, Y, Z))

    # torsion from the coefficients; constant frame vectors have zero bracket
    def torsionB(self, X, Y):
        # computed as a difference so that S(X, Y) + S(Y, X) is exactly zero
        b = self.gamma + self.corr
        return np.einsum("kij,i,j->k", b, X, Y) - np.einsum("kij,i,j->k", b, Y, X)

    def torsionB3(self, X, Y, Z) -> float:
        return self.g(self.torsionB(X, Y), Z)

    def torsionD(self, X, Y):
        return np.einsum("kij,i,j->k", self.gamma - self.gamma.transpose(0, 2, 1), X, Y)

    def nonmetricityB(self, X, Y, Z) -> float:
        return self.bg(X, Y, Z)

    def one_form(self, values: np.ndarray, grads: np.ndarray) -> "FormAtPoint":
        bco = self.gamma + self.corr
        return FormAtPoint(
            values,
            covariant(values, grads, (0, 1), self.gamma),
            covariant(values, grads, (0, 1), bco),
        )


@dataclass(frozen=True)
class FormAtPoint:
    """A 1-form w at a point with D w and B w."""

    w: np.ndarray
    Dw: np.ndarray
    Bw: np.ndarray

    def __call__(self, X) -> float:
        return float(self.w @ X)

    def d(self, X, Y) -> float:
        return float(np.einsum("jk,k,j->", self.Dw, X, Y))

    def b(self, X, Y) -> float:
        return float(np.einsum("jk,k,j->", self.Bw, X, Y))
