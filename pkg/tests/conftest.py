"""Shared fixtures: reference operators and a seeded random-operator factory."""

import numpy as np
import pytest

import specband as sb


def random_operator(seed: int, q: int, b_spread: float = 1.0) -> sb.JacobiOperator:
    """Deterministic random operator: a in [0.5, 2], b in [-spread, spread]."""
    rng = np.random.default_rng(seed)
    return sb.new_operator(
        rng.uniform(0.5, 2.0, size=q), rng.uniform(-b_spread, b_spread, size=q)
    )


def interior_points(bands, count: int, seed: int = 0) -> np.ndarray:
    """Random points strictly inside the given band intervals."""
    rng = np.random.default_rng(seed)
    pts = []
    for _ in range(count):
        lo, hi = bands[rng.integers(0, len(bands))]
        pts.append(lo + rng.uniform(0.05, 0.95) * (hi - lo))
    return np.asarray(pts)


@pytest.fixture
def laplacian() -> sb.JacobiOperator:
    return sb.new_operator([1.0], [0.0])


@pytest.fixture
def ssh() -> sb.JacobiOperator:
    return sb.new_operator([1.0, 2.0], [0.0, 0.0])


@pytest.fixture(scope="session")
def ssh_data():
    return sb.spectral_data(sb.new_operator([1.0, 2.0], [0.0, 0.0]))


@pytest.fixture(scope="session")
def laplacian_data():
    return sb.spectral_data(sb.new_operator([1.0], [0.0]))
