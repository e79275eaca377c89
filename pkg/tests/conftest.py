import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ghzqss import qsim


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_state(rng: np.random.Generator, layout: qsim.RegisterLayout) -> qsim.PureState:
    raw = rng.normal(size=layout.total_dim) + 1j * rng.normal(size=layout.total_dim)
    return qsim.PureState(layout, raw / np.linalg.norm(raw))
