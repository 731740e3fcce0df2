import numpy as np
import pytest
from hypothesis import settings

from gridfreq.synth import SynthSpec, generate
from gridfreq.timebase import FrequencySeries

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

DAY = 86400
HOUR = 3600
T0 = 1609718400  # midnight UTC, a Monday


def random_series(days, seed=0, gap_fraction=0.0, start=T0):
    rng = np.random.default_rng(seed)
    values = 50.0 + 0.02 * np.cumsum(rng.standard_normal(days * DAY)) / 60 + 0.01 * rng.standard_normal(days * DAY)
    gaps = rng.random(values.size) < gap_fraction
    return FrequencySeries(start, values, gaps)


@pytest.fixture(scope="session")
def synth_10d():
    return generate(SynthSpec(days=10, seed=3))


@pytest.fixture(scope="session")
def synth_14d():
    return generate(SynthSpec(days=14, seed=5))
