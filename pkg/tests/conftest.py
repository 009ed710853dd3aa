import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from treefield import MetricKind, Tolerance

settings.register_profile(
    "default",
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def tol():
    return Tolerance()


@pytest.fixture
def radial():
    return MetricKind.radial()


@pytest.fixture
def river():
    return MetricKind.river()


def structured_radial_points(rng: np.random.Generator, n: int, dim: int = 2) -> np.ndarray:
    """Random points with deliberate shared-ray collisions and origin hits."""
    angles = rng.choice(rng.uniform(0.0, 2.0 * np.pi, size=max(2, n // 3 + 1)), size=n)
    radii = rng.uniform(0.0, 8.0, size=n)
    radii[rng.random(n) < 0.1] = 0.0
    if dim == 2:
        pts = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    else:
        dirs = rng.normal(size=(max(2, n // 3 + 1), dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pick = rng.integers(0, len(dirs), size=n)
        pts = radii[:, None] * dirs[pick]
    return pts


def structured_river_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Random planar points with shared verticals and on-axis hits."""
    xs = rng.choice(rng.uniform(-8.0, 8.0, size=max(2, n // 3 + 1)), size=n)
    ys = rng.uniform(-8.0, 8.0, size=n)
    ys[rng.random(n) < 0.15] = 0.0
    return np.column_stack([xs, ys])
