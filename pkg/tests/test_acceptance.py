"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints a single PASS/FAIL line (visible under ``pytest -v``).
Run ``python3 tests/test_acceptance.py`` for the bare summary.
"""

import io
import subprocess
import sys
import time

import numpy as np
import pytest

from acmcheck import identities as ids
from acmcheck.cli import main
from acmcheck.structure import BUILTINS, builtin, sample, validate_structure

from oracles import derivative_agreement, round_trip_rate

TOL = 1e-9
POINTS, SEED = 100, 42
STARTED = time.perf_counter()


@pytest.fixture(scope="module")
def built():
    return {name: builtin(name) for name in BUILTINS}


@pytest.fixture(scope="module")
def reports(built):
    # the whole registry on every builtin, default run
    out = {}
    for name, s in built.items():
        out[name] = {r.check_id: r for r in ids.run_checks(s, ids.REGISTRY, POINTS, SEED, TOL)}
    return out


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
        assert ok, detail
    return emit


def worst(reports, names, check_ids):
    return max(reports[n][c].max_abs_residual for n in names for c in check_ids)


def test_01_structure_axioms(built, verdict):
    r = max(rep.max_abs_residual for s in built.values() for rep in validate_structure(s, POINTS, SEED, TOL))
    verdict(1, "structure axioms on all builtins", r <= TOL, f"max residual {r:.2e}")


def test_02_connection_identities(reports, verdict):
    r = worst(reports, BUILTINS, ["E11", "E12", "E13", "E14", "E15", "E22"])
    verdict(2, "connection identities, two-path", r <= TOL, f"max residual {r:.2e}")


def test_03_hybrid_torsion(reports, verdict):
    r = worst(reports, BUILTINS, ["T2.1"])
    verdict(3, "torsion 3-form is hybrid", r <= TOL, f"max residual {r:.2e}")


def test_04_classification(built, verdict):
    got = {name: ids.classify_T(s, POINTS, SEED, TOL) for name, s in built.items()}
    ok = all(got[n].label == "both" for n in ("flat-cosymplectic-3", "flat-cosymplectic-5"))
    ok &= all(got[n].label == "first-class" and got[n].second_residual > 0.1 for n in ("sasakian-3", "sasakian-5"))
    detail = ", ".join(f"{n}={c.label}" for n, c in got.items())
    verdict(4, "classification", ok, detail)


def test_05_first_class_under_B(built, reports, verdict):
    first = [n for n, s in built.items() if ids.classify_T(s, POINTS, SEED, TOL).first_class]
    r = worst(reports, first, ["T2.2"])
    ok = bool(first) and r <= TOL and all(reports[n]["T2.2"].verdict == "pass" for n in first)
    verdict(5, "first class carries over to B", ok, f"{len(first)} structures, max residual {r:.2e}")


def test_06_cosymplectic_quasi_sasakian(reports, verdict):
    r = worst(reports, BUILTINS, ["E5", "E6"])
    verdict(6, "generalized co-symplectic and quasi-Sasakian", r <= TOL, f"max residual {r:.2e}")


def test_07_equivalences(reports, verdict):
    r = worst(reports, BUILTINS, ["T2.4", "T2.5"])
    verdict(7, "D form vs B form, frame-wise", r <= TOL, f"max difference {r:.2e}")


def test_08_analytic_forms(reports, verdict):
    r1 = worst(reports, BUILTINS, ["T3.1"])
    r2 = worst(reports, BUILTINS, ["T3.2"])
    ok = r1 <= TOL and r2 <= TOL and ids.FUZZED_FORMS == 10
    verdict(8, "analytic 1-form gap and dA identity", ok, f"gap {r1:.2e}, dA {r2:.2e}")


def test_09_audit_coverage(reports, verdict):
    audit = ["T2.3", "T2.6", "T2.7", "C2.1"]
    ok = all(reports[n][c].verdict == "reported" and reports[n][c].premise_residual is not None
             and reports[n][c].max_abs_residual is not None for n in BUILTINS for c in audit)
    codes = []
    for name in BUILTINS:
        argv = ["audit", "--builtin", name]
        for c in audit:
            argv += ["--check", c]
        codes.append(main(argv, io.StringIO(), io.StringIO()))
    ok &= codes == [0] * len(BUILTINS)
    verdict(9, "audit checks reported on every builtin", ok, f"exit codes {codes}")


def test_10_expression_engine(verdict):
    accepted, rejected, rel = derivative_agreement(1000, seed=SEED)
    rate = round_trip_rate(1000, seed=SEED)
    ok = accepted == 1000 and rel <= 1e-5 and rate == 1.0
    verdict(10, "expression derivatives and round-trip", ok,
            f"worst relative {rel:.2e} over {accepted} ({rejected} skipped), round-trip {rate:.0%}")


def test_11_determinism(verdict):
    argv = [sys.executable, "-m", "acmcheck", "verify", "--builtin", "sasakian-3", "--format", "json"]
    a = subprocess.run(argv, capture_output=True, check=False)
    b = subprocess.run(argv, capture_output=True, check=False)
    ok = a.returncode == b.returncode == 0 and a.stdout == b.stdout and len(a.stdout) > 0
    verdict(11, "byte-identical json across runs", ok, f"{len(a.stdout)} bytes")


def test_12_runtime(verdict):
    elapsed = time.perf_counter() - STARTED
    verdict("runtime", "acceptance suite under 60 s", elapsed < 60, f"{elapsed:.1f} s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
