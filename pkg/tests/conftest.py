import numpy as np
import pytest

from fgdi.gaitdata import GridSpec, synth_cohort


def random_curves(seed, n, t):
    """Full-rank random curve matrix (smooth-ish but not low-rank)."""
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, t)
    base = 5.0 * np.sin(2 * np.pi * grid)
    return base + rng.normal(0.0, 1.0, size=(n, t))


@pytest.fixture(scope="session")
def small_cohort():
    """18 variables, 20 healthy + 8 patients, T=51."""
    return synth_cohort(seed=7, n_healthy=20, n_patient=8,
                        grid=GridSpec(51), deviation_scale=1.0)


@pytest.fixture(scope="session")
def mid_cohort():
    """18 variables, 40 healthy + 12 patients, T=51."""
    return synth_cohort(seed=11, n_healthy=40, n_patient=12,
                        grid=GridSpec(51), deviation_scale=1.0)
