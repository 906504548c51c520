import numpy as np
import pytest

from proxops.morphology import Morphology, ThrusterSpec, load_morphology
from proxops.config import bundled_config_path


@pytest.fixture(scope="session")
def mk1():
    return load_morphology(bundled_config_path("mk1"))


@pytest.fixture(scope="session")
def mk2():
    return load_morphology(bundled_config_path("mk2"))


def make_morphology(dirs, offsets=None, powers=None, mass=10.0, inertia=(1.0, 2.0, 3.0),
                    name="test"):
    """Hand-built morphology helper for layout tests."""
    dirs = np.asarray(dirs, dtype=float)
    n = len(dirs)
    offsets = np.zeros((n, 3)) if offsets is None else np.asarray(offsets, dtype=float)
    powers = np.ones(n) if powers is None else np.asarray(powers, dtype=float)
    thrusters = [
        ThrusterSpec(offset=o, direction=d / np.linalg.norm(d), max_thrust=p)
        for o, d, p in zip(offsets, dirs, powers)
    ]
    return Morphology(name=name, mass=mass, inertia=np.diag(inertia), thrusters=thrusters)
