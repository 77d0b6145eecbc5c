import random
from fractions import Fraction
from pathlib import Path

import pytest
import pytest_asyncio
from typer.testing import CliRunner

from app.core.critsolve.pipeline import find_all_geometric_async
from app.core.report.modelio import load_model
from app.core.toricmodel import ToricSurfaceModel, toric_blowup

# Model and series files shipped with the repo
FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fk_model(k: int, a, b, trunc_order=None) -> ToricSurfaceModel:
    return ToricSurfaceModel(
        rays=((1, 0), (0, 1), (-1, -k), (0, -1)),
        lambdas=(0, 0, a, b),
        trunc_order=trunc_order,
        name=f"f{k}",
    )


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def p2() -> ToricSurfaceModel:
    return ToricSurfaceModel(
        rays=((1, 0), (0, 1), (-1, -1)), lambdas=(0, 0, 1), trunc_order=3, name="p2"
    )


@pytest.fixture(scope="session")
def f1() -> ToricSurfaceModel:
    # a = 3, b = 1: critical points at (a/2 - kb/4, b/2) = (5/4, 1/2)
    return fk_model(1, 3, 1)


@pytest.fixture(scope="session")
def p2_blown_up(p2) -> ToricSurfaceModel:
    return toric_blowup(p2, 0, Fraction(1, 6))


@pytest.fixture(scope="session")
def five_ray() -> ToricSurfaceModel:
    m, _ = load_model(FIXTURES / "five_ray.toml")
    return m


# Seeded so that every sweep is reproducible
@pytest.fixture(scope="function")
def rng() -> random.Random:
    return random.Random(20240611)


@pytest.fixture(scope="function")
def runner() -> CliRunner:
    return CliRunner()


# Solved once per session; async so it goes through the concurrent path
@pytest_asyncio.fixture(scope="session")
async def p2_result(p2):
    return await find_all_geometric_async(p2)
