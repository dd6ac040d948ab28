import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import pytest
from config_manager import ExperimentConfig
from core.nerf import RenderSettings
from core.scene import Intrinsics, generate_orbit_trajectory, generate_scene


@pytest.fixture(scope='session')
def structured_scene():
    return generate_scene('structured', seed=1)


@pytest.fixture(scope='session')
def unstructured_scene():
    return generate_scene('unstructured', seed=1)


@pytest.fixture
def intr():
    return Intrinsics.from_fov(16, 16, 50.0)


@pytest.fixture
def settings():
    return RenderSettings(n_samples=24)


@pytest.fixture
def orbit():
    return generate_orbit_trajectory((0.0, 0.0, 0.0), 2.6, 30.0, 0.3, 8)


@pytest.fixture
def pose(orbit):
    return orbit.poses[0]


@pytest.fixture
def small_config(tmp_path):
    """A config small enough to run a whole experiment in a test."""
    config = ExperimentConfig()
    config.camera.width = 8
    config.camera.height = 8
    config.render.samples = 12
    config.trajectory.frames = 5
    config.runtime.window = 2
    config.output.directory = str(tmp_path / 'results')
    return config
