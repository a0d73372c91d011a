import os

import numpy as np
import pytest

from lognet import Dataset, Fingerprint, RpMap

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture
def fixture_dir() -> str:
    return FIXTURES


@pytest.fixture
def tiny_dataset() -> Dataset:
    """Two RPs over 3 APs, six fingerprints each, all at CI:0."""
    fps = []
    for rp, rss in ((0, [-40.0, -42.0, -85.0]), (1, [-85.0, -84.0, -40.0])):
        for k in range(6):
            fps.append(Fingerprint(rp, f"dev{k % 2}", 0, np.asarray(rss) - 0.1 * k))
    return Dataset.from_fingerprints(fps)


@pytest.fixture
def tiny_rp_map() -> RpMap:
    return RpMap({0: (0.0, 0.0), 1: (1.0, 0.0)})
