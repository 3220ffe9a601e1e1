"""Momentum-space and exact-diagonalisation oracles.

These are deliberately independent of the real-space pairing engine: they
work on Bloch Hamiltonians of the magnetic unit cell (Fukui-Hatsugai
Chern numbers, winding of ``det Q(k)``) or count boundary zero modes of an
open system directly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GaplessError, NotChiralError
from .calculus import chiral_frame
from .lattice import ModelSpec, TwistCocycle, bloch_matrix, cell_terms, magnetic_cell


@dataclass(frozen=True)
class BlochFamily:
    """``k -> H(k)`` on the torus of a magnetic unit cell.

    ``hamiltonian`` takes a length-``d`` momentum array (supercell
    momenta in ``[0, 2 pi)``) and returns a Hermitian matrix of size
    ``orbitals``.  Hops to the unit cell displaced by ``R`` carry the factor
    ``exp(i k.R)``.
    """

    d: int
    orbitals: int
    hamiltonian: Callable
    cell: tuple = ()
    chiral_grading: Optional[np.ndarray] = None

    def __call__(self, k) -> np.ndarray:
        return self.hamiltonian(np.asarray(k, dtype=float))


def bloch_family(spec: ModelSpec, twist: TwistCocycle) -> BlochFamily:
    """Bloch Hamiltonian of a clean model on its magnetic unit cell."""
    cell = magnetic_cell(twist)
    terms = cell_terms(spec, twist, cell)
    ncell, q = math.prod(cell), spec.q
    onsite = np.kron(np.eye(ncell), spec.onsite)
    R_cell = None if spec.chiral_grading is None else np.kron(np.eye(ncell), spec.chiral_grading)

    def H(k):
        return bloch_matrix(terms, onsite, k)

    return BlochFamily(spec.d, ncell * q, H, cell, R_cell)


def _grid_point(shape, plane, idx, k_fixed, d):
    k = np.array(k_fixed if k_fixed is not None else np.zeros(d), dtype=float)
    for axis, n, i in zip(plane, shape, idx):
        k[axis] = 2 * math.pi * i / n
    return k


def occupied_count(family: BlochFamily, mu: float, k=None) -> int:
    k = np.zeros(family.d) if k is None else k
    return int(np.sum(np.linalg.eigvalsh(family(k)) <= mu))


def fukui_hatsugai_chern(family: BlochFamily, band_count: int, grid=30, plane=(0, 1),
                         k_fixed=None, gap_tol: float = 1e-8) -> int:
    """Chern number of the lowest ``band_count`` bands over a 2D momentum plane.

    Link variables ``U_a(k) = det V(k)^* V(k + e_a)`` and plaquette phases
    ``F = arg U_a(k) U_b(k+a) / (U_a(k+b) U_b(k))``.  The plaquette phase
    approximates ``-Omega dk_a dk_b`` for the Berry curvature ``Omega`` of
    the connection ``i <u|d u>``, so the Chern number
    ``(1/2 pi) int Omega = (i/2 pi) int tr P [d_a P, d_b P]`` is
    ``-sum F / 2 pi``.
    """
    n1, n2 = (grid, grid) if np.isscalar(grid) else grid
    frames = np.empty((n1, n2), dtype=object)
    min_gap = np.inf
    for i in range(n1):
        for j in range(n2):
            w, v = np.linalg.eigh(family(_grid_point((n1, n2), plane, (i, j), k_fixed, family.d)))
            if band_count < len(w):
                min_gap = min(min_gap, w[band_count] - w[band_count - 1])
            frames[i, j] = v[:, :band_count]
    if min_gap < gap_tol:
        raise GaplessError(f"bands {band_count - 1} and {band_count} touch (gap {min_gap:.3g})")

    def link(a, b):
        z = np.linalg.det(a.conj().T @ b)
        return z / abs(z)

    total = 0.0
    for i in range(n1):
        for j in range(n2):
            ip, jp = (i + 1) % n1, (j + 1) % n2
            u1 = link(frames[i, j], frames[ip, j])
            u2 = link(frames[ip, j], frames[ip, jp])
            u3 = link(frames[i, jp], frames[ip, jp])
            u4 = link(frames[i, j], frames[i, jp])
            total += np.angle(u1 * u2 / (u3 * u4))
    return int(round(-total / (2 * math.pi)))


def chiral_block(family: BlochFamily, k) -> np.ndarray:
    if family.chiral_grading is None:
        raise NotChiralError("family has no chiral grading")
    plus, minus = chiral_frame(family.chiral_grading)
    H = family(k)
    G = family.chiral_grading
    if np.abs(G @ H + H @ G).max() > 1e-12:
        raise NotChiralError("Bloch Hamiltonian does not anticommute with the grading")
    return minus.conj().T @ H @ plus


def winding_integral(family: BlochFamily, grid: int = 200, direction: int = 0, k_fixed=None,
                     gap_tol: float = 1e-8) -> int:
    """Winding of ``det Q(k)`` along ``direction`` with the other momenta fixed."""
    dets = []
    for i in range(grid):
        k = _grid_point((grid,), (direction,), (i,), k_fixed, family.d)
        Q = chiral_block(family, k)
        if np.linalg.svd(Q, compute_uv=False).min() < gap_tol:
            raise GaplessError(f"chiral block singular at k={k}")
        dets.append(np.linalg.det(Q))
    dets = np.array(dets)
    steps = np.angle(np.roll(dets, -1) / dets)
    return int(round(steps.sum() / (2 * math.pi)))


def grid_stability(fn, grids) -> dict:
    """Evaluate an oracle on several grids and report whether they agree."""
    values = {int(g): fn(g) for g in grids}
    return {"values": values, "stable": len(set(values.values())) == 1}


def edge_zero_modes(H_hat, R: np.ndarray, tol: float = 1e-6, region: float = 0.25) -> float:
    """Signed count of zero modes localised at the upper boundary of a cylinder.

    Zero modes (``|E| < tol``) are split by chirality inside the zero
    eigenspace; each chirality eigenvector with at least 90% weight in the
    slab ``w >= (1 - region) * W`` counts as its chirality.  The count is divided
    by the number of boundary cells.
    """
    geom = H_hat.geometry
    od = geom.open_dim
    w, v = np.linalg.eigh(H_hat.kernel)
    Z = v[:, np.abs(w) < tol]
    if Z.shape[1] == 0:
        return 0.0
    G = np.kron(np.eye(geom.N), R)
    cw, cv = np.linalg.eigh(Z.conj().T @ G @ Z)
    modes = Z @ cv
    q = H_hat.q
    near = np.repeat(geom.coords[:, od] >= (1 - region) * geom.L[od], q)
    weight = np.sum(np.abs(modes[near]) ** 2, axis=0)
    count = 0.0
    for chi, wt in zip(cw, weight):
        if wt >= 0.9:
            count += np.sign(chi)
        elif wt > 0.1:
            warnings.warn("zero mode localisation ambiguous", RuntimeWarning, stacklevel=2)
            return 0.0
    return count / geom.boundary_cells
