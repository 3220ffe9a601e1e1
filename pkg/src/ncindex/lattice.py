"""Finite-volume covariant tight-binding operators.

Sites of a ``d``-dimensional box are enumerated in row-major order and the
internal fiber index runs fastest, so the kernel of an operator with fiber
rank ``q`` on ``N`` sites is an ``(N*q, N*q)`` array whose ``(s*q + a,
t*q + b)`` entry couples fiber ``a`` at site ``s`` to fiber ``b`` at site
``t``.

A hopping ``(r, A)`` moves a particle from site ``x`` to ``x + r`` with
amplitude ``A`` (so ``H[x + r, x] = A``) and always comes with its
Hermitian partner ``(-r, A^dagger)``.  With this convention the pure
forward hop ``r = e_j`` is the shift ``S^{e_j}`` and its Bloch symbol is
``exp(+i k_j)``.

Magnetic flux enters through Peierls phases of a linear vector potential,
integrated along the straight segment of each hop.  For the default
Landau gauge the flux ``alpha_ij`` (i < j) is carried by ``A_j = alpha_ij
x_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Optional, Sequence

import numpy as np

from .errors import CommensurabilityError, NotChiralError, RangeError, ValidationError

GAUGES = ("landau", "landau_first")


@dataclass(frozen=True)
class TorusGeometry:
    """Discrete torus ``Z_{L_1} x ... x Z_{L_d}``."""

    L: tuple

    def __post_init__(self):
        object.__setattr__(self, "L", tuple(int(n) for n in self.L))
        if any(n < 3 for n in self.L):
            raise ValidationError(f"every side length must be >= 3, got {self.L}")

    @property
    def d(self) -> int:
        return len(self.L)

    @property
    def N(self) -> int:
        return math.prod(self.L)

    @property
    def periodic(self) -> tuple:
        return (True,) * self.d

    @cached_property
    def coords(self) -> np.ndarray:
        """Integer coordinates of all sites, shape ``(N, d)``."""
        grids = np.indices(self.L).reshape(self.d, -1)
        return np.ascontiguousarray(grids.T)

    def index(self, coords) -> np.ndarray:
        return np.ravel_multi_index(np.asarray(coords).T, self.L, mode="wrap")

    def displacement(self, j: int) -> np.ndarray:
        """Signed minimal-image displacement ``x_j(s) - x_j(t)`` as an ``(N, N)`` array.

        Periodic directions are wrapped into ``(-L/2, L/2)``; the antipodal
        value ``L/2`` of an even side is set to zero so the array stays
        antisymmetric.  Open directions use the plain difference.
        """
        x = self.coords[:, j]
        delta = x[:, None] - x[None, :]
        if self.periodic[j]:
            n = self.L[j]
            delta = (delta + n // 2) % n - n // 2
            if n % 2 == 0:
                delta[delta == -(n // 2)] = 0
        return delta


@dataclass(frozen=True)
class TwistCocycle:
    """Constant magnetic field on the lattice.

    ``flux`` maps an ordered pair ``(i, j)`` with ``i < j`` to the flux per
    plaquette of the ``(i, j)`` plane in units of the flux quantum, as an
    exact :class:`~fractions.Fraction`.
    """

    d: int
    flux: dict = field(default_factory=dict)
    gauge: str = "landau"

    def __post_init__(self):
        clean = {}
        for (i, j), a in dict(self.flux).items():
            i, j, a = int(i), int(j), Fraction(a)
            if i == j or not (0 <= i < self.d and 0 <= j < self.d):
                raise ValidationError(f"invalid flux plane {(i, j)} for d={self.d}")
            if i > j:
                i, j, a = j, i, -a
            a = a - math.floor(a)
            if a:
                clean[(i, j)] = clean.get((i, j), Fraction(0)) + a
        object.__setattr__(self, "flux", clean)
        if self.gauge not in GAUGES:
            raise ValidationError(f"unknown gauge {self.gauge!r}; expected one of {GAUGES}")

    @classmethod
    def from_matrix(cls, matrix, gauge="landau"):
        """Build from an antisymmetric matrix of rationals (strings ``"p/q"`` allowed)."""
        m = [[Fraction(x) for x in row] for row in matrix]
        d = len(m)
        for i in range(d):
            for j in range(d):
                if m[i][j] != -m[j][i]:
                    raise ValidationError(f"flux matrix is not antisymmetric at {(i, j)}")
        return cls(d, {(i, j): m[i][j] for i in range(d) for j in range(i + 1, d)}, gauge)

    def matrix(self) -> list:
        m = [[Fraction(0)] * self.d for _ in range(self.d)]
        for (i, j), a in self.flux.items():
            m[i][j], m[j][i] = a, -a
        return m

    @property
    def denominator(self) -> int:
        return reduce(math.lcm, (a.denominator for a in self.flux.values()), 1)

    def _numerators(self):
        D = self.denominator
        return D, {p: (a * D).numerator for p, a in self.flux.items()}

    def check_commensurate(self, L: Sequence[int], periodic=None):
        periodic = periodic or (True,) * len(L)
        for (i, j), a in self.flux.items():
            for n in (i, j):
                if periodic[n] and (a * L[n]).denominator != 1:
                    raise CommensurabilityError(
                        f"side L[{n}]={L[n]} is not a multiple of the flux denominator "
                        f"{a.denominator} of plane {(i, j)}"
                    )

    def peierls_phase(self, x: np.ndarray, r) -> np.ndarray:
        """Phase factor of the hop ``x -> x + r`` for every row of ``x``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        r = np.asarray(r, dtype=np.int64)
        D, num = self._numerators()
        acc = np.zeros(len(x), dtype=np.int64)
        for (i, j), a in num.items():
            if self.gauge == "landau":
                acc += a * r[j] * (2 * x[:, i] + r[i])
            else:
                acc -= a * r[i] * (2 * x[:, j] + r[j])
        return np.exp(1j * np.pi * (acc % (2 * D)) / D)

    def gauge_function(self, x: np.ndarray, n) -> np.ndarray:
        """Phase ``exp(i chi_n(x))`` compensating a translation by ``n``."""
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        n = np.asarray(n, dtype=np.int64)
        D, num = self._numerators()
        acc = np.zeros(len(x), dtype=np.int64)
        for (i, j), a in num.items():
            if self.gauge == "landau":
                acc += a * n[i] * x[:, j]
            else:
                acc -= a * n[j] * x[:, i]
        return np.exp(2j * np.pi * (acc % D) / D)

    def cocycle(self, x, y) -> complex:
        """Scalar twist ``theta(x, y)`` with ``S^y S^x = theta(x, y) S^{x+y}``."""
        x, y = np.asarray(x), np.asarray(y)
        s = sum(a * int(x[i] * y[j] - x[j] * y[i]) for (i, j), a in self.flux.items())
        s = Fraction(s) / 2
        s -= math.floor(s)
        return complex(np.exp(2j * np.pi * float(s)))


@dataclass(frozen=True)
class DisorderLaw:
    """Independent uniform disorder on ``[-W/2, W/2]`` at every site.

    ``family="uniform"`` adds the draws to the diagonal fiber entries listed
    in ``channels`` (all when ``None``).  ``family="chiral"`` draws a real
    symmetric ``q x q`` block per site and keeps only its part odd under the
    chiral grading, so chiral models stay chiral.
    """

    strength: float = 0.0
    channels: Optional[tuple] = None
    family: str = "uniform"

    def __post_init__(self):
        if self.family not in ("uniform", "chiral"):
            raise ValidationError(f"unsupported disorder family {self.family!r}")
        if self.family == "chiral" and self.channels is not None:
            raise ValidationError("chiral disorder acts on the whole fiber; drop channels")
        if self.strength < 0:
            raise ValidationError("disorder strength must be non-negative")
        if self.channels is not None:
            object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))

    def resolve_channels(self, q: int) -> tuple:
        return tuple(range(q)) if self.channels is None else self.channels


@dataclass(frozen=True)
class DisorderConfig:
    seed: int
    values: np.ndarray
    law: DisorderLaw
    member: int = 0


def rng_for(seed: int, member: int = 0) -> np.random.Generator:
    """Counter-based stream for ensemble member ``member`` of run ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(member)])))


def draw_disorder(law: DisorderLaw, geom, q: int, seed: int, member: int = 0) -> DisorderConfig:
    channels = law.resolve_channels(q)
    if any(not 0 <= c < q for c in channels):
        raise ValidationError(f"disorder channels {channels} out of range for q={q}")
    rng = rng_for(seed, member)
    width = q * q if law.family == "chiral" else len(channels)
    values = rng.uniform(-0.5, 0.5, size=(geom.N, width)) * law.strength
    return DisorderConfig(int(seed), values, law, int(member))


def no_disorder(geom, q: int) -> DisorderConfig:
    return DisorderConfig(0, np.zeros((geom.N, q)), DisorderLaw(0.0))


def shift_disorder(dis: DisorderConfig, geom, n) -> DisorderConfig:
    """Translated configuration ``omega'(x) = omega(x - n)``."""
    src = geom.index(geom.coords - np.asarray(n))
    return DisorderConfig(dis.seed, dis.values[src], dis.law, dis.member)


@dataclass(frozen=True)
class ModelSpec:
    """Declarative translation-invariant part of a tight-binding model.

    ``hoppings`` is a sequence of ``(displacement, amplitude)`` pairs; the
    reverse hop is implied and must not be listed.
    """

    d: int
    q: int
    hoppings: tuple = ()
    onsite: Optional[np.ndarray] = None
    disorder: DisorderLaw = DisorderLaw()
    chiral_grading: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        hops = []
        for r, amp in self.hoppings:
            r = tuple(int(v) for v in r)
            amp = np.array(amp, dtype=complex).reshape(self.q, self.q)
            if len(r) != self.d:
                raise ValidationError(f"hop {r} does not have dimension {self.d}")
            if not any(r):
                raise ValidationError("zero displacement belongs in the onsite term")
            hops.append((r, amp))
        object.__setattr__(self, "hoppings", tuple(hops))
        onsite = np.zeros((self.q, self.q), complex) if self.onsite is None else np.array(self.onsite, complex)
        if onsite.shape != (self.q, self.q) or not np.allclose(onsite, onsite.conj().T, atol=1e-14):
            raise ValidationError("onsite term must be a Hermitian q x q matrix")
        object.__setattr__(self, "onsite", onsite)
        if self.chiral_grading is not None:
            R = np.array(self.chiral_grading, dtype=complex)
            if R.shape != (self.q, self.q) or not np.allclose(R @ R, np.eye(self.q)) \
                    or not np.allclose(R, R.conj().T):
                raise NotChiralError("chiral grading must be a Hermitian involution")
            for label, A in [("onsite", onsite)] + [(f"hop {r}", A) for r, A in hops]:
                if np.abs(R @ A + A @ R).max() > 1e-14:
                    raise NotChiralError(f"{label} does not anticommute with the chiral grading")
            object.__setattr__(self, "chiral_grading", R)

    @property
    def range(self) -> int:
        return max((max(abs(v) for v in r) for r, _ in self.hoppings), default=0)


@dataclass(frozen=True, eq=False)
class CovariantOperator:
    """Dense kernel on ``sites x fiber``.

    ``range`` is the largest hopping distance the kernel can contain, or
    ``None`` for quasi-local operators (spectral projections, polar parts)
    whose kernels decay but are not strictly banded.
    """

    geometry: object
    q: int
    kernel: np.ndarray
    range: Optional[int] = None
    hermitian: bool = False

    @property
    def shape(self):
        return self.kernel.shape

    def blocks(self) -> np.ndarray:
        N = self.geometry.N
        return self.kernel.reshape(N, self.q, N, self.q)

    def dagger(self) -> "CovariantOperator":
        return CovariantOperator(self.geometry, self.q, self.kernel.conj().T, self.range, self.hermitian)

    def __matmul__(self, other: "CovariantOperator") -> "CovariantOperator":
        rng = None if self.range is None or other.range is None else self.range + other.range
        return CovariantOperator(self.geometry, self.q, self.kernel @ other.kernel, rng)

    def like(self, kernel, range=None, hermitian=False) -> "CovariantOperator":
        return CovariantOperator(self.geometry, self.q, kernel, range, hermitian)


def _check_range(spec: ModelSpec, geom):
    for j in range(geom.d):
        if geom.periodic[j] and 2 * spec.range >= geom.L[j]:
            raise RangeError(
                f"hopping range {spec.range} is not below half the side L[{j}]={geom.L[j]}"
            )


def site_hop_matrix(geom, twist: TwistCocycle, r) -> tuple:
    """Source and target site indices plus phases for the hop ``r``.

    Hops leaving the box along an open direction are dropped.
    """
    x = geom.coords
    y = x + np.asarray(r)
    keep = np.ones(len(x), dtype=bool)
    for j in range(geom.d):
        if not geom.periodic[j]:
            keep &= (y[:, j] >= 0) & (y[:, j] < geom.L[j])
    x, y = x[keep], y[keep]
    return geom.index(x), geom.index(y), twist.peierls_phase(x, r)


def build_hamiltonian(spec: ModelSpec, geom, twist: TwistCocycle, dis: Optional[DisorderConfig] = None):
    """Assemble ``H_omega`` on ``geom`` (a torus, or a cylinder with open directions)."""
    if twist.d != spec.d or geom.d != spec.d:
        raise ValidationError("dimension mismatch between model, geometry and twist")
    twist.check_commensurate(geom.L, geom.periodic)
    _check_range(spec, geom)
    N, q = geom.N, spec.q
    K = np.zeros((N, q, N, q), dtype=complex)
    diag = np.arange(N)
    K[diag, :, diag, :] += spec.onsite
    for r, A in spec.hoppings:
        src, dst, phase = site_hop_matrix(geom, twist, r)
        np.add.at(K, (dst, slice(None), src, slice(None)), phase[:, None, None] * A)
        np.add.at(K, (src, slice(None), dst, slice(None)), phase.conj()[:, None, None] * A.conj().T)
    if dis is not None and dis.law.strength and dis.law.family == "chiral":
        if spec.chiral_grading is None:
            raise NotChiralError("chiral disorder needs a model with a chiral grading")
        G = spec.chiral_grading
        X = dis.values.reshape(N, q, q)
        X = 0.5 * (X + X.transpose(0, 2, 1))
        K[diag, :, diag, :] += 0.5 * (X - G @ X @ G)
    elif dis is not None and dis.law.strength:
        channels = dis.law.resolve_channels(q)
        for c_idx, c in enumerate(channels):
            K[diag, c, diag, c] += dis.values[:, c_idx]
    return CovariantOperator(geom, q, K.reshape(N * q, N * q), spec.range, hermitian=True)


def twisted_shift(geom, twist: TwistCocycle, n, q: int = 1) -> CovariantOperator:
    """Crossed-product generator ``S^n``: the hop by ``n`` with its Peierls phase.

    Satisfies ``S^m S^n = theta(n, m) S^{m+n}`` with ``theta = twist.cocycle``.
    """
    twist.check_commensurate(geom.L, geom.periodic)
    src, dst, phase = site_hop_matrix(geom, twist, n)
    M = np.zeros((geom.N, geom.N), dtype=complex)
    M[dst, src] = phase
    rng = max((abs(int(v)) for v in n), default=0)
    return CovariantOperator(geom, q, np.kron(M, np.eye(q)), rng)


def magnetic_translation(geom, twist: TwistCocycle, n, q: int = 1) -> CovariantOperator:
    """Gauge-compensated translation ``T_n psi(x) = e^{i chi_n(x)} psi(x - n)``.

    Commutes with every clean Hamiltonian built with ``twist`` and
    implements the covariance ``T_n H_omega T_n^* = H_{omega(. - n)}``.
    """
    twist.check_commensurate(geom.L, geom.periodic)
    x = geom.coords
    src = geom.index(x - np.asarray(n))
    M = np.zeros((geom.N, geom.N), dtype=complex)
    M[np.arange(geom.N), src] = twist.gauge_function(x, n)
    return CovariantOperator(geom, q, np.kron(M, np.eye(q)), None)


def covariance_check(spec: ModelSpec, geom, twist: TwistCocycle, dis: DisorderConfig, n,
                     shift_disorder_too: bool = True) -> float:
    """Largest entry of ``T_n H_omega T_n^* - H_{omega'}``.

    ``omega'`` is ``omega`` translated by ``n`` (or ``omega`` itself when
    ``shift_disorder_too`` is false, which exposes the broken invariance).
    """
    H = build_hamiltonian(spec, geom, twist, dis)
    T = magnetic_translation(geom, twist, n, spec.q).kernel
    moved = shift_disorder(dis, geom, n) if shift_disorder_too else dis
    H2 = build_hamiltonian(spec, geom, twist, moved)
    return float(np.abs(T @ H.kernel @ T.conj().T - H2.kernel).max())


def grading_operator(geom, R: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(geom.N), R)


def magnetic_cell(twist: TwistCocycle) -> tuple:
    """Unit cell enlarged along the coordinate each Peierls phase depends on."""
    cell = [1] * twist.d
    for (i, j), a in twist.flux.items():
        n = i if twist.gauge == "landau" else j
        cell[n] = math.lcm(cell[n], a.denominator)
    return tuple(cell)


def cell_terms(spec: ModelSpec, twist: TwistCocycle, cell, open_dim: Optional[int] = None) -> list:
    """Hops of a clean model folded onto a unit cell of shape ``cell``.

    Returns ``(target, source, R, block)`` with ``R`` the cell offset of the
    target.  Along ``open_dim`` the cell spans the whole width, hops leaving
    it are dropped and the offset is zero.
    """
    c = np.array(cell)
    sites = np.indices(cell).reshape(len(cell), -1).T
    terms = []
    for r, A in spec.hoppings:
        phases = twist.peierls_phase(sites, r)
        for b, ph in zip(sites, phases):
            y = b + np.array(r)
            if open_dim is not None and not 0 <= y[open_dim] < cell[open_dim]:
                continue
            R = np.floor_divide(y, c)
            t = int(np.ravel_multi_index(tuple(y - R * c), cell))
            terms.append((t, int(np.ravel_multi_index(tuple(b), cell)), R, ph * A))
    return terms


def bloch_matrix(terms, onsite: np.ndarray, k) -> np.ndarray:
    """``onsite + sum_R H_R exp(i k.R) + h.c.`` for folded ``terms``."""
    M = np.zeros(onsite.shape, dtype=complex)
    q = terms[0][3].shape[0] if terms else onsite.shape[0]
    for t, s, R, A in terms:
        M[t * q:(t + 1) * q, s * q:(s + 1) * q] += A * np.exp(1j * np.dot(k, R))
    return onsite + M + M.conj().T
