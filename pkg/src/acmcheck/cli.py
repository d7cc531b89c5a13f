"""Command-line harness.

Exit codes: 0 success, 1 an asserted check failed, 2 usage or input error.
Audit results never change the exit code.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import expr, identities
from .fields import FieldError, SingularMetricError
from .structure import (
    BUILTINS,
    DEFAULT_POINTS,
    DEFAULT_SEED,
    DEFAULT_TOL,
    AlmostContactStructure,
    CheckReport,
    SpecFormatError,
    StructureNotValidated,
    builtin,
    load_spec,
    validate_structure,
    validated,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

BANNER_UNVALIDATED = "WARNING: structure unvalidated; identity checks may be meaningless"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    builtin: str | None = None
    spec: str | None = None
    points: int = DEFAULT_POINTS
    seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    format: str = "text"
    mode: str = "all"
    checks: list[str] = field(default_factory=list)
    force: bool = False

    def check(self) -> None:
        if self.points < 1:
            raise UsageError("--points must be >= 1")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        unknown = [c for c in self.checks if c not in identities.CHECKS]
        if unknown:
            raise UsageError(f"unknown check id(s): {', '.join(unknown)}")


# --- output helpers --------------------------------------------------------


def _json(obj, indent: int = 0) -> str:
    """JSON with floats fixed to 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return format(obj, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _sci(x: float | None) -> str:
    if x is None:
        return "-"
    return f"{x:.2e}"


def _table(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def _emit(lines: Sequence[str], out) -> None:
    out.write("\n".join(lines) + "\n")


# --- structure resolution ---------------------------------------------------


def _load(cfg: RunConfig) -> AlmostContactStructure:
    if (cfg.builtin is None) == (cfg.spec is None):
        raise UsageError("give exactly one of --builtin NAME or --spec PATH")
    if cfg.builtin is not None:
        try:
            return builtin(cfg.builtin)
        except LookupError as exc:
            raise UsageError(str(exc)) from None
    try:
        return load_spec(cfg.spec)
    except OSError as exc:
        raise UsageError(f"cannot read {cfg.spec}: {exc.strerror or exc}") from None
    except SpecFormatError as exc:
        raise UsageError(f"{cfg.spec}: {exc}") from None


def _certified(cfg: RunConfig, s: AlmostContactStructure) -> tuple[AlmostContactStructure, bool]:
    """Validate a loaded spec; returns (structure, validated flag)."""
    if s.validated:
        return s, True
    checked, _ = validated(s, cfg.points, cfg.seed, cfg.tol)
    if checked is not None:
        return checked, True
    if not cfg.force:
        raise UsageError(f"structure not validated: {s.name} fails its axioms (use --force to run anyway)")
    return s, False


def _header(cfg: RunConfig, s: AlmostContactStructure, ok: bool = True) -> list[str]:
    lines = [
        f"structure: {s.name} (dimension {s.dimension})",
        f"points: {cfg.points}  seed: {cfg.seed}  tol: {cfg.tol:.2e}",
    ]
    if not ok:
        lines.insert(0, BANNER_UNVALIDATED)
    return lines


# --- commands -----------------------------------------------------------------


def cmd_validate(cfg: RunConfig, out=sys.stdout) -> int:
    s = _load(cfg)
    reports = validate_structure(s, cfg.points, cfg.seed, cfg.tol)
    if cfg.format == "json":
        out.write(_json([r.to_dict() for r in reports]) + "\n")
    else:
        rows = [["check", "description", "points", "max residual", "tol", "verdict"]]
        rows += [[r.check_id, r.description, str(r.points_sampled), _sci(r.max_abs_residual),
                  _sci(r.tolerance), r.verdict] for r in reports]
        _emit(_header(cfg, s) + _table(rows), out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_classify(cfg: RunConfig, out=sys.stdout) -> int:
    s, ok = _certified(cfg, _load(cfg))
    c = identities.classify_T(s, cfg.points, cfg.seed, cfg.tol, force=not ok)
    yes = {True: "yes", False: "no"}
    if cfg.format == "json":
        out.write(_json({
            "structure": s.name,
            "label": c.label,
            "first_class": c.first_class,
            "second_class": c.second_class,
            "first_class_residual": c.first_residual,
            "second_class_residual": c.second_residual,
            "points_sampled": cfg.points,
            "seed": cfg.seed,
            "tolerance": cfg.tol,
        }) + "\n")
    else:
        _emit(_header(cfg, s, ok) + [
            f"first-class: {yes[c.first_class]}; second-class: {yes[c.second_class]}",
            f"first-class max residual: {_sci(c.first_residual)}",
            f"second-class max residual: {_sci(c.second_residual)}",
        ], out)
    return EXIT_OK


def _verify_text(cfg, s, ok, checks, reports: list[CheckReport]) -> list[str]:
    lines = _header(cfg, s, ok)
    rows = [["check", "mode", "points", "max residual", "tol", "verdict", "premise"]]
    for c, r in zip(checks, reports):
        rows.append([r.check_id, c.mode, str(r.points_sampled), _sci(r.max_abs_residual), _sci(r.tolerance),
                     r.verdict, _sci(r.premise_residual)])
    lines += _table(rows)
    notes = [f"{c.id}: {c.note}" for c in checks if c.note]
    if notes:
        lines += ["notes:"] + [f"  {n}" for n in notes]
    return lines


def cmd_verify(cfg: RunConfig, out=sys.stdout) -> int:
    checks = identities.select(cfg.checks or None, cfg.mode)
    s, ok = _certified(cfg, _load(cfg))
    reports = identities.run_checks(s, checks, cfg.points, cfg.seed, cfg.tol, force=not ok)
    by_id = {r.check_id: r for r in reports}
    reports = [by_id[c.id] for c in checks]
    if cfg.format == "json":
        out.write(_json([r.to_dict() for r in reports]) + "\n")
    else:
        _emit(_verify_text(cfg, s, ok, checks, reports), out)
    failed = any(c.asserted and r.verdict == "fail" for c, r in zip(checks, reports))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_audit(cfg: RunConfig, out=sys.stdout) -> int:
    cfg.mode = "audit"
    return cmd_verify(cfg, out)


def cmd_list(cfg: RunConfig, out=sys.stdout) -> int:
    checks = identities.select(cfg.checks or None, cfg.mode)
    if cfg.format == "json":
        out.write(_json([
            {"id": c.id, "mode": c.mode, "location": c.location, "description": c.description, "note": c.note}
            for c in checks
        ]) + "\n")
    else:
        _emit(_table([[c.id, c.mode, c.location, c.description] for c in checks]), out)
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "verify": cmd_verify,
    "audit": cmd_audit,
    "list": cmd_list,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--builtin", metavar="NAME", help=f"one of: {', '.join(BUILTINS)}")
    src.add_argument("--spec", metavar="PATH", help="manifold-spec file")
    common.add_argument("--points", type=int, default=DEFAULT_POINTS)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--check", dest="checks", action="append", default=[], metavar="ID")
    common.add_argument("--mode", choices=("all", "assert", "audit"), default="all")
    common.add_argument("--force", action="store_true", help="run checks on an unvalidated structure")

    parser = argparse.ArgumentParser(prog="acmcheck", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the structure axioms")
    sub.add_parser("classify", parents=[common], help="first/second class of the structure vector")
    sub.add_parser("verify", parents=[common], help="run identity and theorem checks")
    sub.add_parser("audit", parents=[common], help="run the audit-mode checks only")
    sub.add_parser("list", parents=[common], help="show the check registry")
    return parser


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    opts = {k: v for k, v in vars(args).items() if k != "command"}
    cfg = RunConfig(**opts)
    try:
        cfg.check()
        return COMMANDS[args.command](cfg, out)
    except (UsageError, StructureNotValidated) as exc:
        err.write(f"acmcheck {args.command}: {exc}\n")
        return EXIT_USAGE
    except (SingularMetricError, FieldError, expr.ExprError) as exc:
        err.write(f"acmcheck {args.command}: {exc}\n")
        return EXIT_USAGE


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
