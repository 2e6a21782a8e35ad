"""Shared fixtures: deterministic terrain canvases reused across test files."""

import numpy as np
import pytest

from lunar_track import generate_terrain


@pytest.fixture(scope="session")
def terrain_256():
    """Crater-rich 256x256 canvas, fixed seed."""
    return generate_terrain(seed=909, w=256, h=256, crater_count=40)


@pytest.fixture(scope="session")
def smooth_256():
    """Craterless value-noise canvas for flow tests, fixed seed."""
    return generate_terrain(seed=910, w=256, h=256, crater_count=0)


@pytest.fixture()
def rng():
    return np.random.default_rng(4242)
