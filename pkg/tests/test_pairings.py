import math
import time
import warnings

import numpy as np
import pytest

from ncindex.calculus import fermi_projection, fermi_unitary
from ncindex.errors import GapError, ParityError, RangeError, ValidationError
from ncindex.lattice import CovariantOperator, DisorderLaw, ModelSpec, TorusGeometry, build_hamiltonian
from ncindex.models import hofstadter, ssh
from ncindex.pairings import (
    _perm_naive_sum,
    _perm_tree_sum,
    calibration_ratio,
    constant_even,
    constant_odd,
    converge_pairing,
    disorder_averaged_pairing,
    even_pairing,
    odd_pairing,
    pairing_for_member,
)


def test_constants():
    assert constant_odd(1) == pytest.approx(2j)
    assert constant_odd(3) == pytest.approx(2 * math.pi / 3)
    assert constant_odd(5) == pytest.approx(-(2 * math.pi ** 2 / 15) * 1j)
    assert constant_even(2) == pytest.approx(2j * math.pi)
    assert constant_even(4) == pytest.approx(-2 * math.pi ** 2)
    assert constant_even(0) == 1
    with pytest.raises(ParityError):
        constant_odd(2)
    with pytest.raises(ParityError):
        constant_even(3)


def test_calibration_ratio_is_shift_normalisation():
    g = TorusGeometry((9,))
    S = CovariantOperator(g, 1, np.roll(np.eye(9), 1, axis=0), 1)
    res = odd_pairing(S, (0,))
    assert res.paper_value == pytest.approx(2)
    assert res.calibrated_value == pytest.approx(1)
    assert calibration_ratio(1) == 2 and calibration_ratio(3) == -2 and calibration_ratio(2) == 1


def test_identity_and_zero():
    g = TorusGeometry((6, 6))
    I = CovariantOperator(g, 1, np.eye(36), 0)
    Z = CovariantOperator(g, 1, np.zeros((36, 36)), 0)
    assert even_pairing(I, (0, 1)).raw == 0
    assert even_pairing(Z, (0, 1)).raw == 0
    assert odd_pairing(CovariantOperator(TorusGeometry((7,)), 1, np.eye(7), 0), (0,)).raw == 0


def test_ssh_topological(ssh_top):
    spec, tw = ssh_top
    res = pairing_for_member(spec, tw, TorusGeometry((40,)), (0,), 0.0, 0, 0)
    assert abs(res.raw - 1) < 1e-6
    assert res.permutation_count == 1
    paper = pairing_for_member(spec, tw, TorusGeometry((40,)), (0,), 0.0, 0, 0, "paper")
    assert paper.raw / res.raw == pytest.approx(2)


def test_ssh_trivial(ssh_triv):
    spec, tw = ssh_triv
    res = pairing_for_member(spec, tw, TorusGeometry((40,)), (0,), 0.0, 0, 0)
    assert abs(res.raw) < 1e-6


def test_chiral_stack_weak():
    spec, tw = ssh(1.0, 2.0, d=3, direction=0)
    g = TorusGeometry((24, 3, 3))
    H = build_hamiltonian(spec, g, tw)
    U = fermi_unitary(H, spec.chiral_grading)
    assert odd_pairing(U, (0,)).raw == pytest.approx(1, abs=1e-6)
    assert abs(odd_pairing(U, (1,)).raw) < 1e-12
    assert abs(odd_pairing(U, (2,)).raw) < 1e-12


def test_hofstadter_small(hof):
    spec, tw = hof
    res = pairing_for_member(spec, tw, TorusGeometry((12, 12)), (0, 1), -1.2, 0, 0)
    assert res.rounded == -1 and res.int_residual < 0.02
    assert res.imag_residual < 1e-8
    assert res.diagnostics["gap_width"] > 0.4


def test_parity_and_range_errors(hof, ssh_top):
    spec, tw = hof
    P = fermi_projection(build_hamiltonian(spec, TorusGeometry((6, 6)), tw), -1.2)
    with pytest.raises(ParityError):
        even_pairing(P, (0,))
    with pytest.raises(ValidationError):
        even_pairing(P, (0, 0))
    long = CovariantOperator(TorusGeometry((6, 6)), 1, np.eye(36), 2)
    with pytest.raises(RangeError):
        even_pairing(long, (0, 1))
    s, t = ssh_top
    U = fermi_unitary(build_hamiltonian(s, TorusGeometry((10,)), t), s.chiral_grading)
    with pytest.raises(ValidationError):
        odd_pairing(U, ())
    with pytest.raises(ValidationError):
        odd_pairing(U, (0,), normalization="other")


def test_reorder_flips_orientation(hof):
    # the ordered direction tuple carries an orientation: a transposition
    # negates the value and leaves its magnitude unchanged
    spec, tw = hof
    P = fermi_projection(build_hamiltonian(spec, TorusGeometry((12, 12)), tw), -1.2)
    a, b = even_pairing(P, (0, 1)), even_pairing(P, (1, 0))
    assert a.raw == pytest.approx(-b.raw, abs=1e-12)
    assert abs(a.rounded) == abs(b.rounded) and a.int_residual == pytest.approx(b.int_residual)


def test_empty_set_is_density(hof):
    spec, tw = hof
    P = fermi_projection(build_hamiltonian(spec, TorusGeometry((6, 6)), tw), -1.2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = even_pairing(P, ())
    assert res.raw == pytest.approx(1 / 3)
    assert res.status == "warn"


def test_warning_levels():
    g = TorusGeometry((4,))
    P = CovariantOperator(g, 1, 0.1 * np.eye(4), 0)
    with pytest.warns(RuntimeWarning):
        res = even_pairing(P, ())
    assert res.status == "warn"
    with pytest.warns(RuntimeWarning):
        res = even_pairing(CovariantOperator(g, 1, 0.5 * np.eye(4), 0), ())
    assert res.status == "fail"


def test_ensemble_clean_identical(hof):
    spec, tw = hof
    stats = disorder_averaged_pairing(spec, tw, TorusGeometry((6, 6)), (0, 1), -1.2, 3, seed=1)
    assert len(set(r.raw for r in stats.results)) == 1
    assert stats.all_round_to == stats.rounded_values[0]


def test_ensemble_gap_errors(hof):
    spec, tw = hof
    strong = ModelSpec(2, 1, spec.hoppings, None, DisorderLaw(6.0))
    stats = disorder_averaged_pairing(strong, tw, TorusGeometry((6, 6)), (0, 1), -1.2, 4, seed=3)
    # members either fail loudly or are reported; nothing is dropped
    assert len(stats.results) + len(stats.errors) == 4
    for e in stats.errors:
        assert e["error"] == "GapError" and "member" in e and e["nearest"] is not None


def test_gap_error_propagates():
    spec, tw = hofstadter("1/3")
    with pytest.raises(GapError):
        pairing_for_member(spec, tw, TorusGeometry((6, 6)), (0, 1), -2.0, 0, 0)


def test_converge_policy(hof):
    spec, tw = hof
    res, hist = converge_pairing(spec, tw, [6, 9, 12], (0, 1), -1.2)
    assert res is not None and res.rounded == -1
    assert len(hist) >= 2


def test_tree_matches_naive(rng):
    n = 30
    F = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(4)]
    head = rng.normal(size=(n, n))
    tree, terms = _perm_tree_sum(head, F)
    assert tree == pytest.approx(_perm_naive_sum(head, F), rel=1e-10)
    assert len(terms) == 24
    tree0, _ = _perm_tree_sum(None, F[:3])
    assert tree0 == pytest.approx(_perm_naive_sum(None, F[:3]), rel=1e-10)


def test_tree_speedup_k4(rng):
    n = 300
    F = [rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for _ in range(4)]
    head = rng.normal(size=(n, n)) + 0j

    def best(fn, reps=3):
        out = []
        for _ in range(reps):
            t = time.perf_counter()
            fn()
            out.append(time.perf_counter() - t)
        return min(out)

    t_tree = best(lambda: _perm_tree_sum(head, F))
    t_naive = best(lambda: _perm_naive_sum(head, F))
    assert t_naive / t_tree > 1.5
