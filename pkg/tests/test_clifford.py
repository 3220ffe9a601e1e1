import itertools

import numpy as np
import pytest

from ncindex.clifford import (
    build_gamma,
    check_relations,
    expected_top_trace,
    full_trace_top,
    partial_product_trace_vanishes,
    proper_subsets,
    spinor_trace_top,
)
from ncindex.errors import RepresentationError, ValidationError


@pytest.mark.parametrize("k", range(1, 9))
def test_relations(k):
    rep = build_gamma(k)
    assert rep.nu == 2 ** (k // 2)
    assert check_relations(rep) <= 1e-12


def test_small_cases():
    assert build_gamma(1, orientation=1).gammas[0].tolist() == [[1]]
    assert build_gamma(3).nu == 2
    g = build_gamma(2).gammas
    assert np.abs(g[0] @ g[1] + g[1] @ g[0]).max() == 0


@pytest.mark.parametrize("k,value", [(2, -1j), (4, -2), (3, -2), (5, 4j), (6, 4j)])
def test_top_trace_values(k, value):
    assert abs(spinor_trace_top(build_gamma(k)) - value) <= 1e-12


def test_k1_orientation():
    # the trivial one-dimensional representation has the opposite sign
    assert full_trace_top(build_gamma(1, orientation=1)) == 1j
    assert expected_top_trace(1) == -1j
    assert build_gamma(1).orientation == -1
    with pytest.raises(RepresentationError):
        spinor_trace_top(build_gamma(1, orientation=1))


@pytest.mark.parametrize("k", [2, 4, 6])
def test_even_full_trace_vanishes(k):
    assert abs(full_trace_top(build_gamma(k))) < 1e-12


@pytest.mark.parametrize("k", [2, 4, 6, 8])
def test_grading_parity(k, rng):
    rep = build_gamma(k)
    G = rep.grading
    for _ in range(20):
        sub = rng.choice(k, size=rng.integers(1, k + 1), replace=False)
        P = rep.product(sub)
        sign = 1 if len(sub) % 2 == 0 else -1
        assert np.abs(G @ P - sign * P @ G).max() < 1e-12


@pytest.mark.parametrize("k", range(2, 8))
def test_partial_products(k):
    rep = build_gamma(k)
    assert all(partial_product_trace_vanishes(rep, s) for s in proper_subsets(k))


def test_partial_examples():
    assert partial_product_trace_vanishes(build_gamma(3), [0])
    assert partial_product_trace_vanishes(build_gamma(4), [1, 2])
    with pytest.raises(ValidationError):
        partial_product_trace_vanishes(build_gamma(2), [0, 1])


def test_both_odd_orientations_are_representations():
    for k in (3, 5, 7):
        for s in (1, -1):
            check_relations(build_gamma(k, orientation=s))
        t = {s: full_trace_top(build_gamma(k, orientation=s)) for s in (1, -1)}
        assert t[1] == pytest.approx(-t[-1])


def test_count_of_subsets():
    assert sum(1 for _ in proper_subsets(4)) == 2 ** 4 - 2
    assert list(itertools.islice(proper_subsets(3), 1)) == [(0,)]
