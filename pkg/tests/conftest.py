import numpy as np
import pytest

from fk_thermo import (HarmonicSpec, build_generator, make_grid,
                       principal_eigenpair)


@pytest.fixture(scope="session")
def grid512():
    return make_grid(512)


@pytest.fixture(scope="session")
def vcos512(grid512):
    return HarmonicSpec(harmonics=[(1, 1.0, 0.0)]).sample(grid512)


@pytest.fixture(scope="session")
def eig_cos512(vcos512):
    return principal_eigenpair(build_generator(vcos512))


@pytest.fixture(scope="session")
def grid256():
    return make_grid(256)


@pytest.fixture(scope="session")
def vcos256(grid256):
    return HarmonicSpec(harmonics=[(1, 1.0, 0.0)]).sample(grid256)


@pytest.fixture(scope="session")
def eig_cos256(vcos256):
    return principal_eigenpair(build_generator(vcos256))


def random_harmonic(grid, rng, kmax=4, scale=1.0):
    """Harmonic sum with coefficients uniform in [-scale, scale], k <= kmax."""
    from fk_thermo import GridFunction

    vals = np.zeros(grid.n)
    x = grid.nodes
    for k in range(1, kmax + 1):
        a, b = rng.uniform(-scale, scale, 2)
        vals += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    return GridFunction(grid, vals)
