"""Residual evaluators and the theorem registry.

Every residual is ``left side - right side`` of an identity at one point and
frame (X, Y, Z).  Checks run in one of these modes:

``assert``
    an identity that holds on every valid structure;
``assert-equivalence``
    two residual routes that must agree frame by frame;
``assert-conditional``
    asserted only where the premise holds, otherwise reported;
``audit``
    premise and conclusion residuals are reported, never judged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import analytic
from .connections import PointGeometry
from .fields import partials
from .structure import (
    DEFAULT_POINTS,
    DEFAULT_SEED,
    DEFAULT_TOL,
    AlmostContactStructure,
    CheckReport,
    Frame,
    require_validated,
    sample,
)

FUZZED_FORMS = 10


# --- class conditions ----------------------------------------------------------


def res_gen_cosymplectic(geo: PointGeometry, X, Y, Z) -> float:
    return geo.dFp(X, Y, Z) - geo.A(Y) * geo.dA(X, geo.bar(Z)) + geo.A(Z) * geo.dA(X, geo.bar(Y))


def res_gen_cosymplectic_B(geo: PointGeometry, X, Y, Z) -> float:
    """The same condition rewritten with B."""
    lhs = geo.bFp(X, Y, Z)
    rhs = geo.A(Y) * (geo.bA(X, geo.bar(Z)) + geo.g(X, Z)) - geo.A(Z) * (geo.bA(X, geo.bar(Y)) + geo.g(X, Y))
    return lhs - rhs


def _cyclic(geo: PointGeometry, fn, X, Y, Z) -> float:
    return math.fsum((fn(X, Y, Z), fn(Y, Z, X), fn(Z, X, Y)))


def _alt(fn):
    """Antisymmetrize the first two slots so swaps are exact in floating point."""
    return lambda X, Y, Z: 0.5 * (fn(X, Y, Z) - fn(Y, X, Z))


def res_gen_quasi_sasakian(geo: PointGeometry, X, Y, Z) -> float:
    lhs = _cyclic(geo, _alt(geo.dFp), X, Y, Z)
    fX, fY, fZ = geo.bar(X), geo.bar(Y), geo.bar(Z)
    rhs = math.fsum((
        geo.A(X) * (geo.dA(Y, fZ) - geo.dA(Z, fY)),
        geo.A(Y) * (geo.dA(Z, fX) - geo.dA(X, fZ)),
        geo.A(Z) * (geo.dA(X, fY) - geo.dA(Y, fX)),
    ))
    return lhs - rhs


def nijenhuis(geo: PointGeometry, X, Y, Z) -> float:
    fX, fY, fZ = geo.bar(X), geo.bar(Y), geo.bar(Z)
    # paired so that swapping X and Y negates the value exactly
    return (geo.dFp(fX, Y, Z) - geo.dFp(fY, X, Z)) + (geo.dFp(X, Y, fZ) - geo.dFp(Y, X, fZ))


def d_primeF(geo: PointGeometry, X, Y, Z) -> float:
    """Plain cyclic sum of (D 'F), no normalization factor."""
    return _cyclic(geo, _alt(geo.dFp), X, Y, Z)


def first_class_chain(geo: PointGeometry, X, Y) -> float:
    a = geo.dA(X, geo.bar(Y))
    b = -geo.dA(geo.bar(X), Y)
    c = geo.dA(Y, geo.bar(X))
    return max(abs(a - b), abs(b - c))


def second_class_chain(geo: PointGeometry, X, Y) -> float:
    a = geo.dA(X, geo.bar(Y))
    b = geo.dA(geo.bar(X), Y)
    c = -geo.dA(Y, geo.bar(X))
    return max(abs(a - b), abs(b - c))


def dT_F(geo: PointGeometry) -> float:
    """max |D_T F| over matrix entries."""
    return float(np.max(np.abs(geo.D["F"] @ geo.Tv)))


def normality(geo: PointGeometry, X, Y, Z) -> float:
    return geo.dFp(X, Y, Z) - geo.A(Y) * geo.dA(Z, geo.bar(X)) - geo.A(Z) * geo.dA(geo.bar(X), Y)


def normality_B(geo: PointGeometry, X, Y, Z) -> float:
    """Normality condition rewritten with B, signs as forced by the
    B-to-D conversion of (B_X A)."""
    rhs = geo.A(Y) * (geo.bA(Z, geo.bar(X)) + geo.g(X, Z)) + geo.A(Z) * (geo.bA(geo.bar(X), Y) - geo.g(X, Y))
    return geo.bFp(X, Y, Z) - rhs


def normality_B_printed(geo: PointGeometry, X, Y, Z) -> float:
    """As ``normality_B`` with +g(X,Y) in the second bracket."""
    rhs = geo.A(Y) * (geo.bA(Z, geo.bar(X)) + geo.g(X, Z)) + geo.A(Z) * (geo.bA(geo.bar(X), Y) + geo.g(X, Y))
    return geo.bFp(X, Y, Z) - rhs


# --- the registry -----------------------------------------------------------


@dataclass
class Sample:
    """One point with its frame; the geometry is built on first use."""

    structure: AlmostContactStructure
    point: np.ndarray
    frame: Frame
    forms: Sequence[analytic.OneFormField] = ()
    _geo: PointGeometry | None = None
    _forms_at: list | None = None

    @property
    def geo(self) -> PointGeometry:
        if self._geo is None:
            self._geo = self.structure.geometry(self.point)
        return self._geo

    @property
    def forms_at(self):
        if self._forms_at is None:
            self._forms_at = [w.at(self.geo) for w in self.forms]
        return self._forms_at

    @property
    def XYZ(self):
        return self.frame.X, self.frame.Y, self.frame.Z


Evaluator = Callable[[Sample], float]


@dataclass(frozen=True)
class TheoremCheck:
    id: str
    mode: str
    location: str
    description: str
    conclusion: Evaluator
    premise: Evaluator | None = None
    note: str = ""

    @property
    def asserted(self) -> bool:
        return self.mode.startswith("assert")


def _vec(v) -> float:
    return float(np.max(np.abs(v)))


def _e11(s: Sample) -> float:
    g = s.geo
    X, Y, _ = s.XYZ
    S = g.torsionB(X, Y)
    return max(_vec(S - 2.0 * g.fp(X, Y) * g.Tv), _vec(S + g.torsionB(Y, X)))


def _e12(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    return abs(g.nonmetricityB(X, Y, Z) + g.A(Y) * g.fp(X, Z) + g.A(Z) * g.fp(X, Y))


def _e13(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    return abs(g.torsionB3(X, Y, Z) - 2.0 * g.A(Z) * g.fp(X, Y))


def _e14(s: Sample) -> float:
    g = s.geo
    X, Y, _ = s.XYZ
    return _vec(g.bF(X, Y) - g.dF(X, Y) - g.g(g.bar(X), g.bar(Y)) * g.Tv)


def _e15(s: Sample) -> float:
    g = s.geo
    X, Y, _ = s.XYZ
    return abs(g.bA(X, Y) - g.dA(X, Y) + g.g(g.bar(X), Y))


def _e22(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    return abs(g.dFp(X, Y, Z) - g.bFp(X, Y, Z))


def _e7(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    return max(
        abs(nijenhuis(g, X, Y, Z) + nijenhuis(g, Y, X, Z)),
        abs(d_primeF(g, X, Y, Z) + d_primeF(g, Y, X, Z)),
        abs(d_primeF(g, X, Y, Z) + d_primeF(g, X, Z, Y)),
        abs(d_primeF(g, X, Y, Z) + d_primeF(g, Z, Y, X)),
    )


def _first_class(s: Sample) -> float:
    X, Y, _ = s.XYZ
    return max(first_class_chain(s.geo, X, Y), dT_F(s.geo))


def _second_class(s: Sample) -> float:
    X, Y, _ = s.XYZ
    return max(second_class_chain(s.geo, X, Y), dT_F(s.geo))


def _t21(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    return abs(g.torsionB3(g.bar(X), g.bar(Y), Z) - g.torsionB3(X, Y, Z))


def _t22(s: Sample) -> float:
    g = s.geo
    X, Y, _ = s.XYZ
    a = g.bA(X, g.bar(Y))
    b = -g.bA(g.bar(X), Y)
    c = g.bA(Y, g.bar(X))
    BT_F = float(np.max(np.abs(g.B["F"] @ g.Tv)))
    return max(abs(a - b), abs(b - c), BT_F)


def _t23_premise(s: Sample) -> float:
    return abs(_cyclic(s.geo, _alt(s.geo.bFp), *s.XYZ))


def _e5(s: Sample) -> float:
    return abs(res_gen_cosymplectic(s.geo, *s.XYZ))


def _e6(s: Sample) -> float:
    return abs(res_gen_quasi_sasakian(s.geo, *s.XYZ))


def _e25(s: Sample) -> float:
    return abs(normality(s.geo, *s.XYZ))


def _e26(s: Sample) -> float:
    return abs(res_gen_cosymplectic_B(s.geo, *s.XYZ))


def _t24(s: Sample) -> float:
    return abs(normality(s.geo, *s.XYZ) - normality_B(s.geo, *s.XYZ))


def _t25(s: Sample) -> float:
    return abs(res_gen_cosymplectic(s.geo, *s.XYZ) - res_gen_cosymplectic_B(s.geo, *s.XYZ))


def _t26_premise(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    return max(_e5(s), abs(g.bFp(X, Y, Z) + g.bFp(Y, X, Z)))


def _t26(s: Sample) -> float:
    g = s.geo
    X, _, Z = s.XYZ
    return abs(g.bA(X, g.bar(Z)) + g.g(X, Z))


def _t27_premise(s: Sample) -> float:
    g = s.geo
    X, Y, _ = s.XYZ
    return max(_e5(s), abs(g.dA(X, Y) + g.dA(Y, X)))


def _t27(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    lhs = nijenhuis(g, X, Y, Z) - d_primeF(g, X, Y, g.bar(Z))
    return abs(lhs - 2.0 * g.A(Z) * g.bA(g.bar(Y), g.bar(X)))


def _c21_premise(s: Sample) -> float:
    return abs(d_primeF(s.geo, *s.XYZ))


def _c21(s: Sample) -> float:
    g = s.geo
    X, Y, Z = s.XYZ
    return abs(nijenhuis(g, X, Y, g.bar(Z)))


def _t28_premise(s: Sample) -> float:
    g = s.geo
    X, Y, _ = s.XYZ
    return max(_e5(s), abs(g.bFp(X, Y, g.Tv) - g.bFp(Y, X, g.Tv)))


def _t28(s: Sample) -> float:
    return abs(d_primeF(s.geo, *s.XYZ))


def _t31(s: Sample) -> float:
    X, Y, _ = s.XYZ
    return max((abs(analytic.gap_identity(s.geo, w, X, Y)) for w in s.forms_at), default=0.0)


def _e40(s: Sample) -> float:
    X, Y, _ = s.XYZ
    return abs(analytic.exterior_pair(s.geo, X, Y)[2])


def _t32_premise(s: Sample) -> float:
    g = s.geo
    X, Y, _ = s.XYZ
    A = g.one_form(g.Av, partials(s.structure.A, s.point))
    return abs(analytic.caa_D(g, A, X, Y))


REGISTRY: list[TheoremCheck] = [
    TheoremCheck("E5", "assert", "§1 Eq. 5", "generalized co-symplectic condition", _e5),
    TheoremCheck("E6", "assert", "§1 Eq. 6", "generalized quasi-Sasakian condition", _e6),
    TheoremCheck("E7", "assert", "§1 Eq. 7", "'N and d'F antisymmetry", _e7),
    TheoremCheck("E8", "audit", "§1 Eq. 8", "first class chain and D_T F = 0", _first_class),
    TheoremCheck("E9", "audit", "§1 Eq. 9", "second class chain and D_T F = 0", _second_class),
    TheoremCheck("E11", "assert", "§2 Eq. 11", "torsion of B is 2'F(X,Y)T", _e11),
    TheoremCheck("E12", "assert", "§2 Eq. 12", "non-metricity (B_X g)(Y,Z) = -A(Y)'F(X,Z) - A(Z)'F(X,Y)", _e12),
    TheoremCheck("E13", "assert", "§2 Eq. 13", "g(S(X,Y),Z) = 2A(Z)'F(X,Y)", _e13),
    TheoremCheck("E14", "assert", "§2 Eq. 14", "(B_X F)Y = (D_X F)Y + g(FX,FY)T", _e14),
    TheoremCheck("E15", "assert", "§2 Eq. 15", "(B_X A)Y = (D_X A)Y - g(FX,Y)", _e15),
    TheoremCheck("E22", "assert", "§2 Eq. 22", "D 'F = B 'F", _e22),
    TheoremCheck("E25", "audit", "§2 Eq. 25", "normality condition with D", _e25),
    TheoremCheck("E26", "audit", "§2 Eq. 26", "generalized co-symplectic condition with B", _e26),
    TheoremCheck("E40", "assert", "§3 Eq. 40", "dA under B = dA + 2g(X,FY)", _e40),
    TheoremCheck("T2.1", "assert", "§2 Theorem 2.1", "torsion 3-form is hybrid: S(FX,FY,Z) = S(X,Y,Z)", _t21),
    TheoremCheck(
        "T2.2", "assert-conditional", "§2 Theorem 2.2",
        "first class under D implies first class under B (chain and B_T F = 0)", _t22, _first_class,
    ),
    TheoremCheck(
        "T2.3", "audit", "§2 Theorem 2.3",
        "cyclic B'F sum vanishes => quasi-Sasakian condition", _e6, _t23_premise,
        note="'first kind' is not defined; only the displayed equation is checked",
    ),
    TheoremCheck(
        "T2.4", "assert-equivalence", "§2 Theorem 2.4",
        "normality condition: D form and B form agree", _t24,
        note="B form uses -g(X,Y) in the second bracket; the printed +g(X,Y) differs by 2A(Z)g(X,Y)",
    ),
    TheoremCheck(
        "T2.5", "assert-equivalence", "§2 Theorem 2.5",
        "generalized co-symplectic condition: D form and B form agree", _t25,
    ),
    TheoremCheck(
        "T2.6", "audit", "§2 Theorem 2.6",
        "F Killing under B => (B_X A)(FZ) + g(X,Z) = 0", _t26, _t26_premise,
    ),
    TheoremCheck(
        "T2.7", "audit", "§2 Theorem 2.7",
        "T Killing => 'N(X,Y,Z) - d'F(X,Y,FZ) = 2A(Z)(B_FY A)(FX)", _t27, _t27_premise,
        note="U is read as the structure vector T",
    ),
    TheoremCheck("C2.1", "audit", "§2 Corollary 2.1", "d'F = 0 => 'N(X,Y,FZ) = 0", _c21, _c21_premise),
    TheoremCheck(
        "T2.8", "assert-conditional", "§2 Theorem 2.8",
        "symmetric (B_X 'F)(Y,T) on a generalized co-symplectic manifold => cyclic D'F sum = 0", _t28, _t28_premise,
    ),
    TheoremCheck(
        "T3.1", "assert", "§3 Theorem 3.1",
        "caa_B - caa_D = -2 w(T) g(FX,FY) for fuzzed 1-forms", _t31,
    ),
    TheoremCheck(
        "T3.2", "assert", "§3 Theorem 3.2",
        "dA under B = dA + 2g(X,FY); analyticity premise reported, unused", _e40, _t32_premise,
    ),
]

CHECKS = {c.id: c for c in REGISTRY}
ASSERT_SUITE = ("E11", "E12", "E13", "E14", "E15", "E22", "T2.1", "T2.2", "T2.4", "T2.5", "E5", "E6", "T3.1", "T3.2")


def _sort_key(check_id: str):
    kind = check_id[0]
    nums = tuple(int(t) for t in check_id[1:].split("."))
    return ({"E": 0, "T": 1, "C": 2}[kind], nums)


def select(ids: Sequence[str] | None = None, mode: str = "all") -> list[TheoremCheck]:
    if ids:
        unknown = [i for i in ids if i not in CHECKS]
        if unknown:
            raise KeyError(f"unknown check id(s): {', '.join(unknown)}")
        chosen = [CHECKS[i] for i in dict.fromkeys(ids)]
    else:
        chosen = list(REGISTRY)
    if mode == "assert":
        chosen = [c for c in chosen if c.asserted]
    elif mode == "audit":
        chosen = [c for c in chosen if not c.asserted]
    elif mode != "all":
        raise ValueError(f"unknown mode {mode!r}")
    return sorted(chosen, key=lambda c: _sort_key(c.id))


def build_samples(s: AlmostContactStructure, points: int, seed: int, forms=None) -> list[Sample]:
    pts, frames = sample(s.dimension, points, seed)
    if forms is None:
        forms = analytic.fuzzed_forms(s.chart, FUZZED_FORMS, seed)
    return [Sample(s, p, fr, forms) for p, fr in zip(pts, frames)]


def _evaluate(check: TheoremCheck, samples: Sequence[Sample]):
    worst, where = 0.0, None
    for smp in samples:
        r = check.conclusion(smp)
        if r > worst or math.isnan(r):
            worst, where = r, smp
    premise = None
    if check.premise is not None:
        premise = max((check.premise(smp) for smp in samples), default=0.0)
    return worst, where, premise


def run_samples(check: TheoremCheck, samples: Sequence[Sample], seed: int, tol: float) -> CheckReport:
    worst, where, premise = _evaluate(check, samples)
    desc = check.description + (f" [{check.note}]" if check.note else "")
    n = len(samples)
    if check.mode == "audit" or (check.mode == "assert-conditional" and not premise <= tol):
        return CheckReport(check.id, desc, n, seed, worst, tol, "reported", premise_residual=premise)
    rep = CheckReport.judged(check.id, desc, n, seed, worst, tol, premise_residual=premise)
    if rep.verdict == "fail" and where is not None:
        rep = replace(rep, worst_frame={
            "point": where.point.tolist(),
            "X": where.frame.X.tolist(), "Y": where.frame.Y.tolist(), "Z": where.frame.Z.tolist(),
        })
    return rep


def run_check(s: AlmostContactStructure, check: TheoremCheck | str, points: int = DEFAULT_POINTS,
              seed: int = DEFAULT_SEED, tol: float = DEFAULT_TOL, force: bool = False) -> CheckReport:
    if isinstance(check, str):
        if check not in CHECKS:
            raise KeyError(f"unknown check id: {check}")
        check = CHECKS[check]
    if not force:
        require_validated(s)
    return run_samples(check, build_samples(s, points, seed), seed, tol)


def run_checks(s: AlmostContactStructure, checks: Sequence[TheoremCheck], points: int = DEFAULT_POINTS,
               seed: int = DEFAULT_SEED, tol: float = DEFAULT_TOL, force: bool = False) -> list[CheckReport]:
    if not force:
        require_validated(s)
    samples = build_samples(s, points, seed)
    return [run_samples(c, samples, seed, tol) for c in sorted(checks, key=lambda c: _sort_key(c.id))]


# --- classification --------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    first_class: bool
    second_class: bool
    first_residual: float
    second_residual: float

    @property
    def label(self) -> str:
        if self.first_class and self.second_class:
            return "both"
        if self.first_class:
            return "first-class"
        if self.second_class:
            return "second-class"
        return "neither"


def classify_T(s: AlmostContactStructure, points: int = DEFAULT_POINTS, seed: int = DEFAULT_SEED,
               tol: float = DEFAULT_TOL, force: bool = False) -> Classification:
    if not force:
        require_validated(s)
    samples = build_samples(s, points, seed, forms=())
    r1 = max(_first_class(smp) for smp in samples)
    r2 = max(_second_class(smp) for smp in samples)
    return Classification(r1 <= tol, r2 <= tol, r1, r2)
