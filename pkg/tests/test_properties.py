"""Property suites.

Each class is an independent group and can be run on its own, e.g.
``pytest tests/test_properties.py::TestLeibniz``.
"""

import io
import os
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_operator
from ncindex.calculus import derivation, fermi_projection, fermi_unitary, trace_per_volume
from ncindex.cli import run
from ncindex.lattice import (
    DisorderLaw,
    ModelSpec,
    TorusGeometry,
    build_hamiltonian,
    draw_disorder,
    magnetic_translation,
    twisted_shift,
)
from ncindex.models import hofstadter, ssh
from ncindex.pairings import _perm_tree_sum, even_pairing, odd_pairing

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

seeds = st.integers(0, 2 ** 32 - 1)
sides = st.sampled_from([(7, 7), (8, 6), (9, 7)])
flux = st.sampled_from(["1/3", "1/4", "2/5"])


def _ops(seed, L, R=1, q=2, count=2):
    rng = np.random.default_rng(seed)
    geom = TorusGeometry(L)
    return geom, [random_operator(geom, q, R, rng) for _ in range(count)]


def _disordered(spec, strength, family="uniform"):
    law = DisorderLaw(strength, family=family)
    return ModelSpec(spec.d, spec.q, spec.hoppings, spec.onsite, law, spec.chiral_grading)


class TestLeibniz:
    """Derivations are *-derivations on range-bounded operators."""

    @given(seeds, sides, st.integers(0, 1))
    def test_leibniz(self, seed, L, j):
        _, (a, b) = _ops(seed, L)
        lhs = derivation(a @ b, j).kernel
        rhs = derivation(a, j).kernel @ b.kernel + a.kernel @ derivation(b, j).kernel
        assert np.abs(lhs - rhs).max() < 1e-12

    @given(seeds, sides, st.integers(0, 1))
    def test_star_compatible(self, seed, L, j):
        _, (a,) = _ops(seed, L, count=1)
        assert np.array_equal(derivation(a.dagger(), j).kernel, derivation(a, j).dagger().kernel)

    @given(seeds, sides, st.integers(0, 1))
    def test_trace_of_derivative_vanishes(self, seed, L, j):
        _, (a,) = _ops(seed, L, R=2, count=1)
        assert trace_per_volume(derivation(a, j)) == 0

    @given(seeds, sides)
    def test_derivations_commute(self, seed, L):
        _, (a,) = _ops(seed, L, count=1)
        d01 = derivation(derivation(a, 0), 1).kernel
        d10 = derivation(derivation(a, 1), 0).kernel
        assert np.abs(d01 - d10).max() < 1e-13


class TestTraceProperty:
    """Cyclicity and invariance of the trace per unit volume."""

    @given(seeds, sides)
    def test_cyclic(self, seed, L):
        _, (a, b) = _ops(seed, L, R=2)
        assert abs(trace_per_volume(a @ b) - trace_per_volume(b @ a)) < 1e-12

    @given(seeds, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
    def test_twisted_shift_invariance(self, seed, n):
        geom, (a,) = _ops(seed, (6, 6), count=1)
        _, tw = hofstadter("1/3")
        S = twisted_shift(geom, tw, n, a.q).kernel
        moved = a.like(S @ a.kernel @ S.conj().T)
        assert abs(trace_per_volume(moved) - trace_per_volume(a)) < 1e-12

    @given(seeds, st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
    def test_magnetic_translation_invariance(self, seed, n):
        geom, (a,) = _ops(seed, (6, 6), count=1)
        _, tw = hofstadter("1/3")
        T = magnetic_translation(geom, tw, n, a.q).kernel
        moved = a.like(T @ a.kernel @ T.conj().T)
        assert abs(trace_per_volume(moved) - trace_per_volume(a)) < 1e-12


class TestPermutationAntisymmetry:
    """Exchanging two directions negates every permutation term."""

    @given(seeds, st.integers(2, 4), st.data())
    def test_transposition_negates_sum(self, seed, k, data):
        rng = np.random.default_rng(seed)
        n = 6
        head = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        factors = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(k)]
        i, j = data.draw(st.lists(st.integers(0, k - 1), min_size=2, max_size=2, unique=True))
        swapped = list(factors)
        swapped[i], swapped[j] = swapped[j], swapped[i]
        a, _ = _perm_tree_sum(head, factors)
        b, _ = _perm_tree_sum(head, swapped)
        assert abs(a + b) < 1e-10 * max(1.0, abs(a))

    @given(st.sampled_from([-1.5, -1.2, -0.9]))
    def test_even_pairing_swap(self, mu):
        spec, tw = hofstadter("1/3")
        P = fermi_projection(build_hamiltonian(spec, TorusGeometry((9, 9)), tw), mu)
        a = even_pairing(P, (0, 1))
        b = even_pairing(P, (1, 0))
        assert abs(a.raw + b.raw) < 1e-12
        assert abs(a.rounded) == abs(b.rounded)

    def test_repeated_direction_cancels(self):
        spec, tw = hofstadter("1/3")
        P = fermi_projection(build_hamiltonian(spec, TorusGeometry((9, 9)), tw), -1.2)
        dP = derivation(P.operator, 0).kernel
        total, _ = _perm_tree_sum(P.operator.kernel, [dP, dP])
        assert abs(total) < 1e-12


class TestGaugeInvariance:
    """Cohomologous Peierls gauges give equivalent models and equal pairings."""

    @given(flux, st.sampled_from([(2, 2), (3, 2), (4, 3)]))
    def test_spectra(self, f, cells):
        q = Fraction(f).denominator
        L = tuple(q * c for c in cells)
        a_spec, a_tw = hofstadter(f, gauge="landau")
        b_spec, b_tw = hofstadter(f, gauge="landau_first")
        wa = np.linalg.eigvalsh(build_hamiltonian(a_spec, TorusGeometry(L), a_tw).kernel)
        wb = np.linalg.eigvalsh(build_hamiltonian(b_spec, TorusGeometry(L), b_tw).kernel)
        assert np.abs(wa - wb).max() < 1e-10

    @given(st.sampled_from([(9, 9), (12, 9), (12, 12)]))
    def test_pairing(self, L):
        vals = []
        for gauge in ("landau", "landau_first"):
            spec, tw = hofstadter("1/3", gauge=gauge)
            P = fermi_projection(build_hamiltonian(spec, TorusGeometry(L), tw), -1.2)
            vals.append(even_pairing(P, (0, 1)).raw)
        assert abs(vals[0] - vals[1]) < 1e-10


class TestUnitaryConjugation:
    """Strictly local unitaries leave the rounded pairing unchanged."""

    @staticmethod
    def _local_unitary(geom, q, seed):
        rng = np.random.default_rng(seed)
        blocks = []
        for _ in range(geom.N):
            z = rng.normal(size=(q, q)) + 1j * rng.normal(size=(q, q))
            Q, R = np.linalg.qr(z)
            blocks.append(Q * (np.diagonal(R) / np.abs(np.diagonal(R))))
        V = np.zeros((geom.N * q, geom.N * q), dtype=complex)
        for x, B in enumerate(blocks):
            V[x * q:(x + 1) * q, x * q:(x + 1) * q] = B
        return V

    @given(seeds)
    def test_projection(self, seed):
        spec, tw = hofstadter("1/3")
        geom = TorusGeometry((12, 12))
        P = fermi_projection(build_hamiltonian(spec, geom, tw), -1.2).operator
        theta = np.random.default_rng(seed).uniform(0, 2 * np.pi, geom.N)
        V = np.diag(np.exp(1j * theta))
        ref = even_pairing(P, (0, 1))
        moved = even_pairing(P.like(V @ P.kernel @ V.conj().T), (0, 1))
        assert moved.rounded == ref.rounded
        assert abs(moved.raw - ref.raw) < 1e-10

    @given(seeds)
    def test_unitary(self, seed):
        spec, tw = ssh(1.0, 2.0)
        geom = TorusGeometry((24,))
        U = fermi_unitary(build_hamiltonian(spec, geom, tw), spec.chiral_grading).operator
        V = self._local_unitary(geom, 1, seed)
        ref = odd_pairing(U, (0,))
        moved = odd_pairing(U.like(V @ U.kernel @ V.conj().T), (0,))
        assert moved.rounded == ref.rounded == 1


class TestReality:
    """Pairings of physical projections and unitaries are real."""

    @given(seeds, st.floats(0.0, 0.4))
    def test_even(self, seed, w):
        spec, tw = hofstadter("1/3")
        spec = _disordered(spec, w)
        geom = TorusGeometry((9, 9))
        H = build_hamiltonian(spec, geom, tw, draw_disorder(spec.disorder, geom, 1, seed))
        res = even_pairing(fermi_projection(H, -1.2), (0, 1))
        assert abs(res.raw.imag) < 1e-8 * max(1.0, abs(res.raw))

    @given(seeds, st.floats(0.0, 2.0))
    def test_odd(self, seed, w):
        spec, tw = ssh(1.0, 2.0)
        spec = _disordered(spec, w, "chiral")
        geom = TorusGeometry((20,))
        H = build_hamiltonian(spec, geom, tw, draw_disorder(spec.disorder, geom, 2, seed))
        res = odd_pairing(fermi_unitary(H, spec.chiral_grading), (0,))
        assert abs(res.raw.imag) < 1e-8 * max(1.0, abs(res.raw))


class TestDeterminism:
    """Identical inputs give bit-identical operators and byte-identical outputs."""

    @given(seeds, st.integers(0, 5))
    def test_operators(self, seed, member):
        spec, tw = hofstadter("1/3")
        spec = _disordered(spec, 0.7)
        geom = TorusGeometry((6, 6))
        a = build_hamiltonian(spec, geom, tw, draw_disorder(spec.disorder, geom, 1, seed, member))
        b = build_hamiltonian(spec, geom, tw, draw_disorder(spec.disorder, geom, 1, seed, member))
        assert np.array_equal(a.kernel, b.kernel)
        assert a.kernel.tobytes() == b.kernel.tobytes()

    @given(st.integers(0, 2 ** 63), st.sampled_from(["0.2", "0.5,1.0"]))
    def test_manifest_fixes_output(self, seed, values):
        argv = ["sweep", "--config", str(CONFIGS / "ssh.toml"), "--axis", "disorder",
                "--values", values, "--ensemble", "2", "--seed", str(seed), "--L", "12"]
        old = os.environ.get("SOURCE_DATE_EPOCH")
        os.environ["SOURCE_DATE_EPOCH"] = "1234567890"
        try:
            outs = []
            for _ in range(2):
                buf = io.StringIO()
                assert run(argv, buf, io.StringIO()) == 0
                outs.append(buf.getvalue())
        finally:
            if old is None:
                del os.environ["SOURCE_DATE_EPOCH"]
            else:
                os.environ["SOURCE_DATE_EPOCH"] = old
        assert outs[0] == outs[1]
        assert outs[0].startswith("# manifest ")


@pytest.mark.parametrize("group", [TestLeibniz, TestTraceProperty, TestPermutationAntisymmetry,
                                   TestGaugeInvariance, TestUnitaryConjugation, TestReality,
                                   TestDeterminism])
def test_groups_have_docstrings(group):
    assert group.__doc__
