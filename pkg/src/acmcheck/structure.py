"""Almost contact metric structures (F, T, A, g) on one chart.

Builtins, axiom validation, sampling, and the line-oriented manifold-spec
format::

    dimension = 3
    coordinates = x y z
    [metric]
    g 1 1 = (1 + y^2)/4
    [F]
    F 2 1 = 1          # F^2_1, first index contravariant
    [T]
    T 3 = 2
    [A]
    A 1 = -y/2

Indices are 1-based, omitted components are zero and ``g i j`` also sets
``g j i``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import expr
from .connections import PointGeometry
from .fields import (
    Chart,
    FieldError,
    SingularMetricError,
    TensorField,
    evaluate,
    evaluate_with_partials,
    fundamental_form,
)

BOX = 2.0
DEFAULT_POINTS = 100
DEFAULT_SEED = 42
DEFAULT_TOL = 1e-9


class SpecFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class StructureNotValidated(RuntimeError):
    pass


@dataclass(frozen=True)
class Certificate:
    points: int
    seed: int
    tol: float
    max_residuals: dict[str, float]


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    description: str
    points_sampled: int
    seed: int
    max_abs_residual: float
    tolerance: float
    verdict: str  # pass | fail | reported
    premise_residual: float | None = None
    worst_frame: dict | None = None

    @classmethod
    def judged(cls, check_id, description, points, seed, residual, tol, **extra) -> "CheckReport":
        # a residual exactly at the tolerance passes
        verdict = "pass" if residual <= tol else "fail"
        return cls(check_id, description, points, seed, float(residual), float(tol), verdict, **extra)

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class AlmostContactStructure:
    name: str
    chart: Chart
    F: TensorField
    T: TensorField
    A: TensorField
    g: TensorField
    certificate: Certificate | None = field(default=None, compare=False)

    def __post_init__(self):
        for f, valence in ((self.F, (1, 1)), (self.T, (1, 0)), (self.A, (0, 1)), (self.g, (0, 2))):
            if f.valence != valence:
                raise ValueError(f"{f.name} must have valence {valence}, got {f.valence}")
            if f.chart != self.chart:
                raise ValueError(f"{f.name} is defined on a different chart")

    @property
    def dimension(self) -> int:
        return self.chart.dimension

    @property
    def validated(self) -> bool:
        return self.certificate is not None

    def fundamental_form(self) -> TensorField:
        return fundamental_form(self.F, self.g)

    def geometry(self, point: Sequence[float]) -> PointGeometry:
        return PointGeometry(self, point)


# --- sampling ----------------------------------------------------------------


@dataclass(frozen=True)
class Frame:
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray


def sample(n: int, count: int, seed: int) -> tuple[np.ndarray, list[Frame]]:
    """Points uniform in [-2, 2]^n and one frame per point.

    The first n frames cycle through coordinate basis vectors, the rest are
    random unit vectors. numpy's PCG64 via ``default_rng(seed)``.
    """
    rng = np.random.default_rng(seed)
    points = rng.uniform(-BOX, BOX, size=(count, n))
    eye = np.eye(n)
    frames = []
    for i in range(count):
        if i < n:
            frames.append(Frame(eye[i], eye[(i + 1) % n], eye[(i + 2) % n]))
        else:
            v = rng.standard_normal((3, n))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            frames.append(Frame(v[0], v[1], v[2]))
    return points, frames


# --- validation ----------------------------------------------------------------

AXIOMS = [
    ("E1", "F^2 X + X = A(X) T"),
    ("E2", "A(FX) = 0"),
    ("E3", "'F(X,Y) = g(FX,Y) is antisymmetric"),
    ("E4", "g(FX,FY) = g(X,Y) - A(X)A(Y)"),
    ("AT", "A(T) = 1"),
    ("FT", "F T = 0"),
    ("AG", "A(X) = g(X,T)"),
]


def axiom_residuals(geo: PointGeometry, fr: Frame) -> dict[str, float]:
    F, g, A, T = geo.Fm, geo.gm, geo.Av, geo.Tv
    X, Y = fr.X, fr.Y
    FX, FY = F @ X, F @ Y
    return {
        "E1": float(np.max(np.abs(F @ FX + X - (A @ X) * T))),
        "E2": abs(float(A @ FX)),
        "E3": abs(float(FX @ g @ Y + FY @ g @ X)),
        "E4": abs(float(FX @ g @ FY - X @ g @ Y + (A @ X) * (A @ Y))),
        "AT": abs(float(A @ T) - 1.0),
        "FT": float(np.max(np.abs(F @ T))),
        "AG": float(np.max(np.abs(A - g @ T))),
    }


def validate_structure(
    s: AlmostContactStructure,
    points: int = DEFAULT_POINTS,
    seed: int = DEFAULT_SEED,
    tol: float = DEFAULT_TOL,
) -> list[CheckReport]:
    if points < 1:
        raise ValueError("points must be >= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    pts, frames = sample(s.dimension, points, seed)
    worst = {key: (0.0, None) for key, _ in AXIOMS}
    failure = None
    for p, fr in zip(pts, frames):
        try:
            geo = s.geometry(p)
        except (SingularMetricError, FieldError) as exc:
            failure = (p, str(exc))
            break
        for key, r in axiom_residuals(geo, fr).items():
            if r > worst[key][0] or np.isnan(r):
                worst[key] = (r, (p, fr))
    reports = []
    for key, desc in AXIOMS:
        if failure is not None:
            reports.append(
                CheckReport(key, desc, points, seed, float("inf"), tol, "fail",
                            worst_frame={"point": failure[0].tolist(), "error": failure[1]})
            )
            continue
        r, where = worst[key]
        rep = CheckReport.judged(key, desc, points, seed, r, tol)
        if rep.verdict == "fail":
            rep = dataclasses.replace(rep, worst_frame=_frame_dict(*where))
        reports.append(rep)
    return reports


def _frame_dict(p, fr: Frame) -> dict:
    return {"point": np.asarray(p).tolist(), "X": fr.X.tolist(), "Y": fr.Y.tolist(), "Z": fr.Z.tolist()}


def validated(s: AlmostContactStructure, points=DEFAULT_POINTS, seed=DEFAULT_SEED, tol=DEFAULT_TOL):
    """Return ``(structure with certificate or None, reports)``."""
    reports = validate_structure(s, points, seed, tol)
    if all(r.passed for r in reports):
        cert = Certificate(points, seed, tol, {r.check_id: r.max_abs_residual for r in reports})
        return dataclasses.replace(s, certificate=cert), reports
    return None, reports


def require_validated(s: AlmostContactStructure) -> None:
    if not s.validated:
        raise StructureNotValidated(f"structure {s.name!r} not validated")


def fundamental_form_audit(s: AlmostContactStructure, points=DEFAULT_POINTS, seed=DEFAULT_SEED) -> CheckReport:
    """Compare 'F with -2 dA, where dA(X,Y) = (X A(Y) - Y A(X) - A([X,Y]))/2.

    Convention dependent, so the result is only reported.
    """
    pts, frames = sample(s.dimension, points, seed)
    worst = 0.0
    for p, fr in zip(pts, frames):
        geo = s.geometry(p)
        _, dA = evaluate_with_partials(s.A, p)
        # dA_ij = (d_i A_j - d_j A_i) / 2 ; dA[j, i] holds d_i A_j
        ext = 0.5 * (dA.T - dA)
        worst = max(worst, abs(geo.fp(fr.X, fr.Y) + 2.0 * float(fr.X @ ext @ fr.Y)))
    return CheckReport("FDA", "'F = -2 dA (exterior derivative convention audit)", points, seed, worst, 0.0,
                       "reported")


# --- builtins ----------------------------------------------------------------

BUILTINS = ("flat-cosymplectic-3", "flat-cosymplectic-5", "sasakian-3", "sasakian-5")


def _coords(m: int) -> list[str]:
    if m == 1:
        return ["x", "y", "z"]
    names = []
    for i in range(1, m + 1):
        names += [f"x{i}", f"y{i}"]
    return names + ["z"]


def flat_cosymplectic(m: int) -> AlmostContactStructure:
    n = 2 * m + 1
    chart = Chart(_coords(m))
    F = np.zeros((n, n))
    for i in range(m):
        x, y = 2 * i, 2 * i + 1
        F[y, x] = 1.0  # F d_x = d_y
        F[x, y] = -1.0  # F d_y = -d_x
    T = np.zeros(n)
    T[-1] = 1.0
    return AlmostContactStructure(
        f"flat-cosymplectic-{n}",
        chart,
        TensorField.from_array(chart, (1, 1), F, "F"),
        TensorField.from_array(chart, (1, 0), T, "T"),
        TensorField.from_array(chart, (0, 1), T, "A"),
        TensorField.from_array(chart, (0, 2), np.eye(n), "g"),
    )


def sasakian(m: int) -> AlmostContactStructure:
    """The standard Sasakian structure on R^(2m+1).

    Contact form A = (dz - sum y_i dx_i)/2, T = 2 d_z,
    g = A (x) A + (sum dx_i^2 + dy_i^2)/4.  The sign of F is the one for
    which (D_X F)Y = g(X,Y)T - A(Y)X.
    """
    n = 2 * m + 1
    names = _coords(m)
    chart = Chart(names)
    z = n - 1
    F = [["0"] * n for _ in range(n)]
    A = ["0"] * n
    T = ["0"] * n
    T[z] = "2"
    A[z] = "1/2"
    for i in range(m):
        x, y = 2 * i, 2 * i + 1
        F[y][x] = "-1"  # F d_x = -d_y
        F[x][y] = "1"  # F d_y = d_x + y d_z
        F[z][y] = names[y]
        A[x] = f"-{names[y]}/2"
    g = [["0"] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            terms = []
            if A[i] != "0" and A[j] != "0":
                terms.append(f"({A[i]})*({A[j]})")
            if i == j and i != z:
                terms.append("1/4")
            g[i][j] = g[j][i] = " + ".join(terms) if terms else "0"
    return AlmostContactStructure(
        f"sasakian-{n}",
        chart,
        TensorField.from_array(chart, (1, 1), F, "F"),
        TensorField.from_array(chart, (1, 0), T, "T"),
        TensorField.from_array(chart, (0, 1), A, "A"),
        TensorField.from_array(chart, (0, 2), g, "g"),
    )


def sasakian_identity_residual(s: AlmostContactStructure, points: int = 20, seed: int = DEFAULT_SEED) -> float:
    """max |(D_X F)(Y) - g(X,Y) T + A(Y) X| over sampled frames."""
    pts, frames = sample(s.dimension, points, seed)
    worst = 0.0
    for p, fr in zip(pts, frames):
        geo = s.geometry(p)
        X, Y = fr.X, fr.Y
        r = geo.dF(X, Y) - geo.g(X, Y) * geo.Tv + geo.A(Y) * X
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def builtin(name: str) -> AlmostContactStructure:
    family, _, dim = name.rpartition("-")
    if name not in BUILTINS:
        raise LookupError(f"unknown structure {name!r}; available: {', '.join(BUILTINS)}")
    m = (int(dim) - 1) // 2
    s = flat_cosymplectic(m) if family == "flat-cosymplectic" else sasakian(m)
    if family == "sasakian":
        r = sasakian_identity_residual(s)
        if r > DEFAULT_TOL:
            raise AssertionError(f"{name}: (D_X F)Y = g(X,Y)T - A(Y)X fails, residual {r:.3e}")
    checked, reports = validated(s)
    if checked is None:
        bad = [r.check_id for r in reports if not r.passed]
        raise AssertionError(f"{name}: builtin fails axioms {bad}")
    return checked


# --- spec files --------------------------------------------------------------

_HEADER = re.compile(r"^(dimension|coordinates)\s*=\s*(.*)$")
_SECTION = re.compile(r"^\[(metric|F|T|A)\]$")
_COMPONENT = re.compile(r"^(g|F|T|A)((?:\s+\d+)+)\s*=\s*(.+)$")
_ARITY = {"g": 2, "F": 2, "T": 1, "A": 1}
_SECTION_OF = {"g": "metric", "F": "F", "T": "T", "A": "A"}


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_spec(text: str, name: str = "spec") -> AlmostContactStructure:
    dimension = None
    coords = None
    section = None
    comps: dict[str, dict[tuple[int, ...], expr.Node]] = {k: {} for k in _ARITY}
    chart = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if m := _HEADER.match(line):
            if section is not None:
                raise SpecFormatError(f"header {m.group(1)!r} after a section", lineno)
            if m.group(1) == "dimension":
                try:
                    dimension = int(m.group(2))
                except ValueError:
                    raise SpecFormatError(f"bad dimension {m.group(2)!r}", lineno) from None
                if dimension < 1:
                    raise SpecFormatError("dimension must be positive", lineno)
            else:
                coords = m.group(2).split()
            continue
        if m := _SECTION.match(line):
            if dimension is None or coords is None:
                raise SpecFormatError("dimension and coordinates must precede sections", lineno)
            if len(coords) != dimension:
                raise SpecFormatError(f"dimension is {dimension} but {len(coords)} coordinates given", lineno)
            if chart is None:
                try:
                    chart = Chart(coords)
                except ValueError as exc:
                    raise SpecFormatError(str(exc), lineno) from None
            section = m.group(1)
            continue
        m = _COMPONENT.match(line)
        if m is None:
            raise SpecFormatError(f"cannot parse {raw.strip()!r}", lineno)
        kind, idx_text, source = m.groups()
        if section is None:
            raise SpecFormatError("component line outside a section", lineno)
        if _SECTION_OF[kind] != section:
            raise SpecFormatError(f"{kind} component in [{section}] section", lineno)
        idx = tuple(int(t) for t in idx_text.split())
        if len(idx) != _ARITY[kind]:
            raise SpecFormatError(f"{kind} takes {_ARITY[kind]} indices, got {len(idx)}", lineno)
        if not all(1 <= i <= dimension for i in idx):
            raise SpecFormatError(f"index out of range 1..{dimension}: {idx}", lineno)
        try:
            node = chart.parse(source)
        except expr.ExprError as exc:
            raise SpecFormatError(f"{kind}{list(idx)}: {exc}", lineno) from None
        zidx = tuple(i - 1 for i in idx)
        targets = [zidx]
        if kind == "g" and zidx[0] != zidx[1]:
            targets.append(zidx[::-1])
        for t in targets:
            old = comps[kind].get(t)
            if old is not None and old != node:
                shown = "".join(f"[{i}]" for i in idx)
                raise SpecFormatError(f"conflicting component {kind}{shown}", lineno)
            comps[kind][t] = node
    if dimension is None or coords is None:
        raise SpecFormatError("missing dimension or coordinates header")
    if len(coords) != dimension:
        raise SpecFormatError(f"dimension is {dimension} but {len(coords)} coordinates given")
    if chart is None:
        chart = Chart(coords)
    n = dimension

    def build(kind, valence, label):
        shape = (n,) * sum(valence)
        arr = np.empty(shape, dtype=object)
        for index in np.ndindex(*shape) if shape else [()]:
            arr[index] = comps[kind].get(index, expr.ZERO)
        return TensorField(chart, valence, tuple(arr.reshape(-1)), label)

    return AlmostContactStructure(
        name, chart, build("F", (1, 1), "F"), build("T", (1, 0), "T"), build("A", (0, 1), "A"),
        build("g", (0, 2), "g"),
    )


def load_spec(path: str | Path) -> AlmostContactStructure:
    path = Path(path)
    return parse_spec(path.read_text(encoding="utf-8"), name=path.stem)


def dump_spec(s: AlmostContactStructure) -> str:
    """Render a structure in the spec format (zero components omitted)."""
    n = s.dimension
    lines = [f"dimension = {n}", "coordinates = " + " ".join(s.chart.coordinates), "[metric]"]
    lines += _component_lines("g", s.g, lambda idx: idx[0] <= idx[1])
    lines.append("[F]")
    lines += _component_lines("F", s.F)
    lines.append("[T]")
    lines += _component_lines("T", s.T)
    lines.append("[A]")
    lines += _component_lines("A", s.A)
    return "\n".join(lines) + "\n"


def _component_lines(kind: str, f: TensorField, keep=lambda idx: True) -> Iterable[str]:
    for idx, node in zip(f.indices(), f.components):
        if expr.is_zero(node) or not keep(idx):
            continue
        yield f"{kind} {' '.join(str(i + 1) for i in idx)} = {expr.to_source(node)}"


def components_equal(a: AlmostContactStructure, b: AlmostContactStructure, points: int = 10,
                     seed: int = DEFAULT_SEED, tol: float = 1e-12) -> bool:
    if a.dimension != b.dimension:
        return False
    pts, _ = sample(a.dimension, points, seed)
    for p in pts:
        for fa, fb in ((a.F, b.F), (a.T, b.T), (a.A, b.A), (a.g, b.g)):
            if np.max(np.abs(evaluate(fa, p) - evaluate(fb, p)), initial=0.0) > tol:
                return False
    return True
