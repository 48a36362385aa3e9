import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from skyrover import empty_grid


@pytest.fixture
def corridor_grid():
    """1 x 3 x 1 corridor along y."""
    return empty_grid((1, 3, 1))


@pytest.fixture
def open_grid():
    return empty_grid((5, 5, 2))
