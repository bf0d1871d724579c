import json
from pathlib import Path

import pytest

from scd_stab.polyhedra import PolyhedralCone
from scd_stab.problem import load_problem

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "scd_stab" / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


@pytest.fixture
def two_branch():
    return load_problem(fixture_path("two_branch.json"))


@pytest.fixture(scope="session")
def cone_corpus():
    data = json.loads(fixture_path("cones.json").read_text())
    return [PolyhedralCone.from_json(c) for c in data["cones"]]
