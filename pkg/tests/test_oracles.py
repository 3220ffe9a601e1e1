import numpy as np
import pytest

from ncindex.errors import GaplessError, NotChiralError
from ncindex.boundary import CylinderGeometry, build_halfspace
from ncindex.lattice import ModelSpec, TwistCocycle
from ncindex.models import atomic_insulator, hofstadter, ssh
from ncindex.oracles import (
    BlochFamily,
    bloch_family,
    chiral_block,
    edge_zero_modes,
    fukui_hatsugai_chern,
    grid_stability,
    magnetic_cell,
    occupied_count,
    winding_integral,
)


def test_magnetic_cell():
    assert magnetic_cell(TwistCocycle(2, {(0, 1): "1/3"})) == (3, 1)
    assert magnetic_cell(TwistCocycle(2, {(0, 1): "1/3"}, "landau_first")) == (1, 3)
    assert magnetic_cell(TwistCocycle(3)) == (1, 1, 1)


def test_bloch_family_hermitian_periodic(hof):
    fam = bloch_family(*hof)
    k = np.array([0.3, 1.1])
    H = fam(k)
    assert np.abs(H - H.conj().T).max() < 1e-14
    assert np.abs(fam(k + 2 * np.pi) - H).max() < 1e-12


def test_hofstadter_chern(hof):
    fam = bloch_family(*hof)
    assert occupied_count(fam, -1.2) == 1
    c30 = fukui_hatsugai_chern(fam, 1, 30)
    assert abs(c30) == 1
    assert fukui_hatsugai_chern(fam, 1, 12) == c30
    assert fukui_hatsugai_chern(fam, 3, 20) == 0


def test_gauge_choice_does_not_change_chern():
    a = bloch_family(*hofstadter("1/3"))
    b = bloch_family(*hofstadter("1/3", gauge="landau_first"))
    assert fukui_hatsugai_chern(a, 1, 24) == fukui_hatsugai_chern(b, 1, 24)


def test_flat_trivial_chern():
    fam = bloch_family(*atomic_insulator(2))
    assert fukui_hatsugai_chern(fam, 1, 10) == 0


def test_gapless_chern():
    # critical SSH layers: the two bands touch at k_1 = pi
    with pytest.raises(GaplessError):
        fukui_hatsugai_chern(bloch_family(*ssh(1.0, 1.0, d=2)), 1, 8)


def test_ssh_winding(ssh_top, ssh_triv):
    assert winding_integral(bloch_family(*ssh_top), 200) == 1
    assert winding_integral(bloch_family(*ssh_triv), 200) == 0
    # sign pinned by det Q(k) = t1 + t2 exp(ik)
    fam = bloch_family(*ssh_top)
    k = 0.7
    assert chiral_block(fam, [k])[0, 0] == pytest.approx(1 + 2 * np.exp(1j * k))


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 3])
def test_scalar_winding(m):
    def H(k):
        u = np.exp(1j * m * k[0])
        return np.array([[0, np.conj(u)], [u, 0]])

    fam = BlochFamily(1, 2, H, (1,), np.diag([1.0, -1.0]))
    assert winding_integral(fam, 64) == m


def test_winding_errors():
    fam = bloch_family(*hofstadter("1/3"))
    with pytest.raises(NotChiralError):
        winding_integral(fam, 10)
    gapless = bloch_family(*ssh(1.0, 1.0))
    with pytest.raises(GaplessError):
        winding_integral(gapless, 64)


def test_grid_stability(ssh_top):
    fam = bloch_family(*ssh_top)
    rep = grid_stability(lambda g: winding_integral(fam, g), [50, 100])
    assert rep["stable"] and rep["values"] == {50: 1, 100: 1}


def test_edge_zero_modes():
    cyl = CylinderGeometry((64, 4), 0)
    spec, tw = ssh(1.0, 2.0, d=2)
    assert edge_zero_modes(build_halfspace(spec, cyl, tw), spec.chiral_grading) == 1
    spec, tw = ssh(2.0, 1.0, d=2)
    assert edge_zero_modes(build_halfspace(spec, cyl, tw), spec.chiral_grading) == 0
    spec, tw = ssh(1.0, 2.0, d=2)
    R = np.kron(np.eye(2), spec.chiral_grading)
    doubled = ModelSpec(2, 4, tuple((r, np.kron(np.eye(2), A)) for r, A in spec.hoppings),
                        np.kron(np.eye(2), spec.onsite), chiral_grading=R)
    assert edge_zero_modes(build_halfspace(doubled, cyl, tw), R) == 2
