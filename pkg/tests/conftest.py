import json
import pathlib
import re

import pytest

from zdcubes.affine import load_affine
from zdcubes.finite_system import load_finite_system

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

MINIMAL_FSYS = ["rot6", "z4xz3", "rot12", "triv1", "rot8_d3", "z2z2z3_d3",
                "affine25"]
ALL_FSYS = MINIMAL_FSYS + ["nonmin_z4z2"]


@pytest.fixture(scope="session")
def oracle():
    with open(ROOT / "tests" / "data" / "oracle.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def systems():
    return {name: load_finite_system(str(FIXTURES / f"{name}.fsys"))
            for name in ALL_FSYS}


@pytest.fixture(scope="session")
def minimal_systems(systems):
    return {name: systems[name] for name in MINIMAL_FSYS}


@pytest.fixture(scope="session")
def affines():
    return {name: load_affine(str(FIXTURES / f"{name}.affine"))
            for name in ["example83", "jordan3", "rot6"]}


# ----------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion after the run

_DOCS: dict[str, str] = {}
_OUTCOMES: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if "test_acceptance.py" in item.nodeid and item.function.__doc__:
            _DOCS[item.nodeid] = item.function.__doc__.strip().splitlines()[0]


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _OUTCOMES[report.nodeid] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    lines = []
    for nodeid, outcome in _OUTCOMES.items():
        doc = _DOCS.get(nodeid, nodeid)
        m = re.match(r"test_criterion_(\d+)", nodeid.rsplit("::", 1)[-1])
        num = int(m.group(1)) if m else 0
        lines.append((num, f"ACCEPTANCE {num}: {outcome} - {doc}"))
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
