import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from moviesna.synth import SynthConfig, generate  # noqa: E402

SMALL = dict(n_actors=200, n_directors=40, n_casting_directors=15, n_writers=30, n_agents=8,
             n_titles=150)


@pytest.fixture(scope="session")
def small_pair():
    return generate(SynthConfig(seed=5, **SMALL))


@pytest.fixture(scope="session")
def small_catalog(small_pair):
    return small_pair[0]

