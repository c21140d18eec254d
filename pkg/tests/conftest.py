import pathlib

import pytest

from fixmk.schema import load_problem

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def fixture_paths(group):
    return sorted((FIXTURES / group).glob("*.json"))


@pytest.fixture(scope="session")
def solve_fixtures():
    """All positive fixed-point fixtures as (name, ProblemFile) pairs."""
    return [(p.stem, load_problem(p)) for p in fixture_paths("solve")]


@pytest.fixture(scope="session")
def extension_fixtures():
    return [(p.stem, load_problem(p)) for p in fixture_paths("extension")]
