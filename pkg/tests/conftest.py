import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acmcheck import builtin  # noqa: E402


@pytest.fixture(scope="session")
def structures():
    return {name: builtin(name) for name in
            ("flat-cosymplectic-3", "flat-cosymplectic-5", "sasakian-3", "sasakian-5")}


@pytest.fixture(scope="session")
def sas3(structures):
    return structures["sasakian-3"]


@pytest.fixture(scope="session")
def flat3(structures):
    return structures["flat-cosymplectic-3"]
