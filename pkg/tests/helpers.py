"""Random range-limited operators for property tests."""

import numpy as np

from ncindex.lattice import CovariantOperator


def banded_mask(geom, R):
    """Pairs of sites at periodic distance at most ``R`` in every direction."""
    mask = np.ones((geom.N, geom.N), dtype=bool)
    x = geom.coords
    for j in range(geom.d):
        diff = np.abs(x[:, None, j] - x[None, :, j])
        if geom.periodic[j]:
            diff = np.minimum(diff, geom.L[j] - diff)
        mask &= diff <= R
    return mask


def random_operator(geom, q, R, rng, hermitian=False):
    n = geom.N * q
    K = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    K *= np.kron(banded_mask(geom, R), np.ones((q, q)))
    if hermitian:
        K = K + K.conj().T
    return CovariantOperator(geom, q, K, R, hermitian)
