"""Shared fixtures; puts the repository root and tools/ on sys.path."""

from __future__ import annotations

import os
import sys

ROOT = os.path.dirname(os.path.abspath(__file__))
for path in (ROOT, os.path.join(ROOT, "tools")):
    if path not in sys.path:
        sys.path.insert(0, path)

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from scenarios import (  # noqa: E402
    LinearField,
    SmoothRandomField,
    SpinOrbitScenario,
    UniformField,
    ZeemanScenario,
    bspace_scenario,
)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


@pytest.fixture
def hedgehog() -> ZeemanScenario:
    """Zeeman model with B = r, so r-space is B-space."""
    return bspace_scenario()


@pytest.fixture
def hedgehog_model(hedgehog):
    return hedgehog.model()


@pytest.fixture
def random_zeeman() -> ZeemanScenario:
    return ZeemanScenario(SmoothRandomField(3), lorentz=False)


@pytest.fixture
def random_spin_orbit() -> SpinOrbitScenario:
    return SpinOrbitScenario(
        SmoothRandomField(4, offset=(0.8, 0.0, 0.0), amplitude=0.2),
        SmoothRandomField(5),
        rho=0.5,
    )


@pytest.fixture
def gradient_zeeman() -> ZeemanScenario:
    """B = (0.3 y, 0.2 z, 1 + 0.5 x) + t (0, 0.1, 0): curvature in every r and t block."""
    return ZeemanScenario(
        LinearField((0.0, 0.0, 1.0), ((0.0, 0.3, 0.0), (0.0, 0.0, 0.2), (0.5, 0.0, 0.0)), (0.0, 0.1, 0.0)),
        lorentz=False,
    )


@pytest.fixture
def uniform_zeeman() -> ZeemanScenario:
    return ZeemanScenario(UniformField((0.0, 0.0, 1.0)))
