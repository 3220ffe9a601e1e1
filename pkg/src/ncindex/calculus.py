"""Noncommutative calculus at finite volume.

Derivations, the trace per unit volume, Fermi projections and Fermi
unitaries, plus the lattice zeta-function residue estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .errors import ConvergenceError, GapError, NotChiralError, RangeError, SingularError
from .lattice import CovariantOperator, grading_operator


@lru_cache(maxsize=32)
def _displacement(geom, j):
    return geom.displacement(j)


def derivation(a: CovariantOperator, j: int) -> CovariantOperator:
    """``d_j a = -i [X_j, a]`` with the minimal-image position difference.

    For a kernel of range below ``L_j / 2`` this is the infinite-volume
    derivation restricted to the torus, and the Leibniz rule holds exactly
    as long as the product still has range below ``L_j / 2``.
    """
    geom = a.geometry
    if a.range is not None and geom.periodic[j] and 2 * a.range >= geom.L[j]:
        raise RangeError(f"operator range {a.range} is ambiguous on side L[{j}]={geom.L[j]}")
    delta = _displacement(geom, j)
    N, q = geom.N, a.q
    K = a.kernel.reshape(N, q, N, q) * (-1j * delta)[:, None, :, None]
    return CovariantOperator(geom, q, K.reshape(N * q, N * q), a.range)


def trace_per_volume(a) -> complex:
    """Fiber trace per site: ``(1/N) sum_x tr a(x, x)``."""
    if isinstance(a, CovariantOperator):
        return complex(np.trace(a.kernel)) / a.geometry.N
    raise TypeError("trace_per_volume expects a CovariantOperator")


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def of(cls, H: CovariantOperator) -> "SpectralData":
        w, v = np.linalg.eigh(H.kernel)
        return cls(w, v)

    def gap(self, mu: float) -> tuple:
        """Band edges ``(lower, upper)`` enclosing ``mu``."""
        below = self.eigenvalues[self.eigenvalues <= mu]
        above = self.eigenvalues[self.eigenvalues > mu]
        lo = below[-1] if len(below) else -np.inf
        hi = above[0] if len(above) else np.inf
        return float(lo), float(hi)


@dataclass(frozen=True)
class FermiProjection:
    operator: CovariantOperator
    mu: float
    gap_width: float
    band_edges: tuple
    source_range: int | None = None


def default_min_gap(w: np.ndarray) -> float:
    return 1e-6 * max(float(np.abs(w).max()), 1e-300)


def fermi_projection(H: CovariantOperator, mu: float, min_gap: float | None = None,
                     spectrum: SpectralData | None = None) -> FermiProjection:
    """Spectral projection of ``H`` onto ``(-inf, mu]``.

    Raises :class:`GapError` when an eigenvalue lies closer than
    ``min_gap`` to ``mu``.
    """
    sd = spectrum or SpectralData.of(H)
    w, v = sd.eigenvalues, sd.eigenvectors
    if min_gap is None:
        min_gap = default_min_gap(w)
    dist = np.abs(w - mu)
    i = int(np.argmin(dist))
    if dist[i] < min_gap:
        raise GapError(
            f"Fermi level mu={mu} is within {dist[i]:.3g} of eigenvalue {w[i]:.12g} "
            f"(required gap {min_gap:.3g})",
            mu=mu, nearest=float(w[i]),
        )
    occ = v[:, w <= mu]
    P = occ @ occ.conj().T
    op = CovariantOperator(H.geometry, H.q, P, None, hermitian=True)
    return FermiProjection(op, float(mu), float(dist[i]), sd.gap(mu), H.range)


@dataclass(frozen=True)
class FermiUnitary:
    operator: CovariantOperator
    source: CovariantOperator
    min_singular_value: float
    source_range: int | None = None


def chiral_frame(R: np.ndarray):
    """Orthonormal bases of the ``+1`` and ``-1`` eigenspaces of a grading."""
    w, v = np.linalg.eigh(R)
    plus, minus = v[:, w > 0], v[:, w < 0]
    if plus.shape[1] != minus.shape[1]:
        raise NotChiralError("chiral grading must have balanced +1/-1 eigenspaces")
    return plus, minus


def off_diagonal_block(H: CovariantOperator, R: np.ndarray) -> CovariantOperator:
    """The block ``Q`` of ``H = [[0, Q^*], [Q, 0]]`` mapping ``+1`` to ``-1`` chirality."""
    geom = H.geometry
    G = grading_operator(geom, R)
    if np.abs(G @ H.kernel + H.kernel @ G).max() > 1e-12:
        raise NotChiralError("Hamiltonian does not anticommute with the chiral grading")
    plus, minus = chiral_frame(R)
    Wp = np.kron(np.eye(geom.N), plus)
    Wm = np.kron(np.eye(geom.N), minus)
    Q = Wm.conj().T @ H.kernel @ Wp
    return CovariantOperator(geom, plus.shape[1], Q, H.range)


def fermi_unitary(H: CovariantOperator, R: np.ndarray, tol: float = 1e-10) -> FermiUnitary:
    """Polar part ``U_F = Q |Q|^{-1}`` of the chiral block of ``H``."""
    Q = off_diagonal_block(H, R)
    X, s, Yh = np.linalg.svd(Q.kernel)
    if s.min() < tol:
        raise SingularError(f"chiral block is singular: smallest singular value {s.min():.3g}")
    U = Q.like(X @ Yh)
    return FermiUnitary(U, H, float(s.min()), H.range)


# zeta function of the lattice Laplacian symbol

def _shell_counts(k: int, M: int) -> np.ndarray:
    """``counts[n]`` = number of ``m`` in ``[-M, M]^k`` with ``|m|^2 = n``."""
    sq = np.arange(-M, M + 1) ** 2
    counts = np.bincount(sq, minlength=M * M + 1).astype(np.int64)
    total = np.zeros(k * M * M + 1, dtype=np.int64)
    total[: len(counts)] = counts
    for _ in range(k - 1):
        nxt = np.zeros_like(total)
        for s in sq:
            nxt[s:] += total[: len(total) - s]
        total = nxt
    return total


def lattice_zeta(k: int, s: float, M: int, counts=None) -> float:
    """Truncated sum over ``|m|_inf <= M`` of ``(1 + |m|^2)^{-s/2}``."""
    counts = _shell_counts(k, M) if counts is None else counts
    n = np.nonzero(counts)[0]
    return float(np.sum(counts[n] * (1.0 + n) ** (-s / 2)))


def _face_integral(k: int, s: float) -> float:
    """``2k`` times the integral of ``(1 + |y|^2)^{-s/2}`` over ``[-1, 1]^{k-1}``.

    This is the cube-surface weight of the tail ``sum_{|m|_inf > M}``.
    """
    if k == 1:
        return 2.0
    f = lambda *y: (1.0 + sum(t * t for t in y)) ** (-s / 2)
    if k == 2:
        val, _ = integrate.quad(f, -1, 1, epsabs=1e-13)
    else:
        val, _ = integrate.nquad(f, [[-1, 1]] * (k - 1), opts={"epsabs": 1e-11})
    return 2 * k * val


def zeta_tail(k: int, s: float, M: int) -> float:
    """Integral comparison for the part of the sum outside ``|m|_inf <= M``.

    The region ``|x|_inf > M + 1/2`` is swept by cube shells; using
    ``|x|^{-s}`` for the summand (relative error ``O(M^{-2})``) leaves a
    one-dimensional radial integral.
    """
    a = M + 0.5
    return _face_integral(k, s) * a ** (k - s) / (s - k)


def sphere_volume(k: int) -> float:
    """Surface measure of the unit sphere ``S^{k-1}`` in ``R^k``."""
    return k * math.pi ** (k / 2) / special.gamma(k / 2 + 1)


@dataclass(frozen=True)
class ResidueEstimate:
    k: int
    estimate: float
    target: float
    grid: tuple
    values: tuple
    fit_residual: float
    M: int

    @property
    def relative_error(self) -> float:
        return abs(self.estimate - self.target) / self.target


def zeta_residue_estimate(k: int, s_grid=None, M: int = 200, tol: float = 0.02) -> ResidueEstimate:
    """Residue of the lattice zeta function at ``s = k``.

    Evaluates ``(s - k) * zeta(s)`` on ``s_grid`` (the truncated lattice sum
    plus the integral-comparison tail) and extrapolates linearly to
    ``s = k``.  Raises :class:`ConvergenceError` when the linear fit leaves a
    residual above ``tol`` relative to the estimate.
    """
    if s_grid is None:
        s_grid = (k + 0.4, k + 0.3, k + 0.2, k + 0.1)
    s_grid = tuple(float(s) for s in s_grid)
    if any(s <= k for s in s_grid):
        raise ValueError("grid points must exceed k")
    counts = _shell_counts(k, M)
    vals = np.array([(s - k) * (lattice_zeta(k, s, M, counts) + zeta_tail(k, s, M)) for s in s_grid])
    x = np.array(s_grid) - k
    coef, res, *_ = np.polyfit(x, vals, 1, full=True)
    est = float(coef[1])
    fit_res = float(np.max(np.abs(np.polyval(coef, x) - vals)))
    if fit_res > tol * abs(est):
        raise ConvergenceError(f"linear extrapolation residual {fit_res:.3g} exceeds tolerance")
    return ResidueEstimate(k, est, sphere_volume(k), s_grid, tuple(vals), fit_res, M)
