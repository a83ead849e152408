"""Shared fixtures: a pinned G(2,4) regression instance and the --heavy gate.

The pinned instance is the two-solution problem (box, box) on G(2,4)
with integer planes.  Its solutions are known to five digits and are
recomputed exactly by the bilinear-elimination oracle, so it anchors
both the solver and the monodromy regression tests.
"""

import json
from pathlib import Path

import numpy as np
import pytest

DATA_DIR = Path(__file__).parent / "data"

# Two general 2-planes in C^4 with integer entries; the instance has
# exactly two solutions.
PINNED_G1 = np.array(
    [
        [-55 - 8j, 17 + 15j, 40 + 99j, -17 - 38j],
        [-67 + 25j, -82 - 55j, -99 - 80j, -21 - 85j],
    ]
)
PINNED_G2 = np.array(
    [
        [66 + 53j, -73 - 14j, 85 + 5j, 67 + 16j],
        [-53 - 85j, 36 - 25j, 2 + 81j, -58 + 35j],
    ]
)

# A third plane whose short loop swaps the two solutions.
PINNED_FRESH = np.array(
    [
        [33 - 84j, 21 - 1j, 59 + 94j, -94 + 89j],
        [-15 - 19j, 0 + 29j, 79 + 51j, 89 + 3j],
    ]
)

# The two solutions in chart coordinates (positions (1,2) and (2,4) of
# the echelon matrix), truncated to the five digits they are quoted at.
PINNED_M1 = np.array([-0.23714 - 0.0028980j, -0.51680 - 0.10520j])
PINNED_M2 = np.array([0.97009 + 1.2705j, 0.44336 + 0.38248j])


def pytest_addoption(parser):
    parser.addoption(
        "--heavy",
        action="store_true",
        default=False,
        help="also run the multi-minute stretch problems",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--heavy"):
        return
    skip = pytest.mark.skip(reason="needs --heavy")
    for item in items:
        if "heavy" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def pinned_planes():
    return PINNED_G1.copy(), PINNED_G2.copy()


@pytest.fixture(scope="session")
def pinned_fresh_plane():
    return PINNED_FRESH.copy()


@pytest.fixture(scope="session")
def pinned_planes_file():
    path = DATA_DIR / "g24_pinned_planes.json"
    # guard against the fixture file drifting from the arrays above
    raw = json.loads(path.read_text())
    loaded = [
        np.array([[complex(re, im) for re, im in row] for row in g])
        for g in raw["planes"]
    ]
    assert np.array_equal(loaded[0], PINNED_G1)
    assert np.array_equal(loaded[1], PINNED_G2)
    return path


@pytest.fixture(scope="session")
def pinned_instance(pinned_planes):
    from schubert_galois import ProblemInstance, SimpleSchubertProblem

    problem = SimpleSchubertProblem(2, 4, (1,), (1,))
    return ProblemInstance(problem, tuple(pinned_planes), seed=0)


@pytest.fixture(scope="session")
def pinned_master(pinned_instance):
    from schubert_galois import solve_master

    return solve_master(pinned_instance)
