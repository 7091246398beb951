import json
from pathlib import Path

import numpy as np
import pytest

import volterra2d as v

REPO_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = REPO_ROOT / "configs"


@pytest.fixture(scope="session")
def example1_path() -> Path:
    return CONFIG_DIR / "example1.json"


@pytest.fixture(scope="session")
def example2_path() -> Path:
    return CONFIG_DIR / "example2.json"


@pytest.fixture(scope="session")
def example1_spec(example1_path) -> v.SystemSpec:
    return v.parse_system(example1_path.read_text())


@pytest.fixture(scope="session")
def example2_spec(example2_path) -> v.SystemSpec:
    return v.parse_system(example2_path.read_text())


@pytest.fixture(scope="session")
def cosine_spec(example1_spec) -> v.SystemSpec:
    """Variant of the first demo system whose fixed point is away from zero."""
    return v.SystemSpec(
        2, example1_spec.h, example1_spec.p,
        example1_spec.kernel_a, example1_spec.kernel_b,
        v.Nonlinearity("cos", 1.0, 1.0), v.Nonlinearity("cos", 1.0, 2.0))


@pytest.fixture(scope="session")
def zero_amplitude_spec(example1_spec) -> v.SystemSpec:
    return v.SystemSpec(
        2, example1_spec.h, example1_spec.p,
        example1_spec.kernel_a, example1_spec.kernel_b,
        v.Nonlinearity("sin", 0.0, 1.0), v.Nonlinearity("sin", 0.0, 2.0))


def random_nonlinearity(rng, max_amplitude=2.0):
    kind = rng.choice(["sin", "cos", "tanh", "rational_bounded"])
    return v.Nonlinearity(str(kind),
                          float(rng.uniform(-max_amplitude, max_amplitude)),
                          float(rng.uniform(-2.0, 2.0)))


def random_periodic_spec(rng) -> v.SystemSpec:
    """Random diagonal-periodic system that passes the periodic checks:
    factors bounded away from zero, period products bounded away from one."""
    T = int(rng.integers(1, 4))

    def coeffs():
        while True:
            vals = rng.uniform(-0.7, 1.5, T)
            if (min(abs(1.0 + x) for x in vals) > 0.05
                    and abs(np.prod(1.0 + vals) - 1.0) > 0.05):
                return v.PeriodicSequence(T, tuple(float(x) for x in vals))

    def kernel():
        if rng.random() < 0.5:
            rate = float(rng.uniform(0.3, 2.0))
            coef = float(rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0]))
            return v.SeparableExponential(coef, rate, rate)
        lags = int(rng.integers(1, 4))
        weights = tuple(tuple(float(w) for w in rng.uniform(-0.5, 0.5, lags))
                        for _ in range(T))
        return v.FiniteLag(weights)

    return v.SystemSpec(T, coeffs(), coeffs(), kernel(), kernel(),
                        random_nonlinearity(rng), random_nonlinearity(rng))


def random_summable_spec(rng) -> v.SystemSpec:
    """Random system in the unit-product regime with summable kernels."""
    T = int(rng.integers(1, 3))

    def coeffs():
        if T == 1:
            return v.PeriodicSequence(1, (0.0,))
        t = float(rng.uniform(0.4, 2.5))
        return v.PeriodicSequence(2, (t - 1.0, 1.0 / t - 1.0))

    def kernel():
        rate = float(rng.uniform(0.3, 1.5))
        gap = float(rng.uniform(0.5, 1.5))
        coef = float(rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0]))
        return v.SeparableExponential(coef, rate, rate + gap)

    return v.SystemSpec(T, coeffs(), coeffs(), kernel(), kernel(),
                        random_nonlinearity(rng, 1.5),
                        random_nonlinearity(rng, 1.5))
