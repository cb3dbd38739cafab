"""Shared fixtures for cvsteg tests."""

import shutil
import tempfile

import numpy as np
import pytest

from cvsteg.fock_core import Cutoff, DensityOperator


@pytest.fixture
def tmp_dir():
    """Create a temporary directory for test outputs."""
    d = tempfile.mkdtemp(prefix="cvsteg_test_")
    yield d
    shutil.rmtree(d, ignore_errors=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def random_density(rng):
    """Factory for random full-trace density operators."""

    def make(n_max=4, modes=1, rank=None):
        cutoff = Cutoff(n_max)
        dim = cutoff.dim(modes)
        rank = rank or dim
        g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
        mat = g @ g.conj().T
        mat = mat / np.trace(mat).real
        return DensityOperator(0.5 * (mat + mat.conj().T), cutoff, modes)

    return make
