"""Complex irreducible representations of the Clifford algebra on ``k`` generators.

Even ``k = 2m`` is built by Pauli doubling: the generators of the smaller
algebra are tensored with ``sigma_1`` and the two new ones are
``1 x sigma_2`` and ``1 x sigma_3``.  Odd ``k = 2m + 1`` appends
``s * Gamma_0`` of the even algebra on ``2m`` generators, where the sign
``s`` (the orientation) selects one of the two inequivalent irreducibles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import RepresentationError, ValidationError

TOL = 1e-12

SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class GammaRep:
    k: int
    nu: int
    gammas: tuple
    grading: Optional[np.ndarray]
    orientation: int = 1

    def product(self, subset) -> np.ndarray:
        M = np.eye(self.nu, dtype=complex)
        for j in subset:
            M = M @ self.gammas[j]
        return M


def _even_gammas(m: int) -> list:
    gammas = []
    for _ in range(m):
        gammas = [np.kron(g, SIGMA[0]) for g in gammas]
        size = gammas[0].shape[0] // 2 if gammas else 1
        gammas += [np.kron(np.eye(size), SIGMA[1]), np.kron(np.eye(size), SIGMA[2])]
    return gammas


def _grading(gammas) -> np.ndarray:
    m = len(gammas) // 2
    G = np.eye(gammas[0].shape[0] if gammas else 1, dtype=complex)
    for g in gammas:
        G = G @ g
    return (-1j) ** m * G


def expected_top_trace(k: int) -> complex:
    """``(-i)^{floor((k+1)/2)} 2^{floor((k-1)/2)}``."""
    return (-1j) ** ((k + 1) // 2) * 2 ** ((k - 1) // 2)


def build_gamma(k: int, orientation: Optional[int] = None) -> GammaRep:
    """Irreducible representation on ``2^{floor(k/2)}`` dimensions.

    For odd ``k`` the orientation defaults to the sign for which the
    top-degree spinor trace matches :func:`expected_top_trace`.
    """
    if k < 1:
        raise ValidationError(f"need k >= 1, got {k}")
    m = k // 2
    base = _even_gammas(m)
    if k % 2 == 0:
        return GammaRep(k, 2 ** m, tuple(base), _grading(base), 1)
    G0 = _grading(base)
    if orientation is None:
        for s in (1, -1):
            rep = GammaRep(k, 2 ** m, tuple(base + [s * G0]), None, s)
            if abs(spinor_trace_top(rep, check=False) - expected_top_trace(k)) < TOL:
                return rep
        raise RepresentationError(f"no orientation reproduces the top trace for k={k}")
    if orientation not in (1, -1):
        raise ValidationError("orientation must be +1 or -1")
    return GammaRep(k, 2 ** m, tuple(base + [orientation * G0]), None, orientation)


def check_relations(rep: GammaRep, tol: float = TOL) -> float:
    """Largest violation of self-adjointness, anticommutation and grading relations."""
    I = np.eye(rep.nu)
    err = 0.0
    for i, gi in enumerate(rep.gammas):
        err = max(err, np.abs(gi - gi.conj().T).max())
        for j, gj in enumerate(rep.gammas):
            err = max(err, np.abs(gi @ gj + gj @ gi - 2 * (i == j) * I).max())
    if rep.grading is not None:
        G = rep.grading
        err = max(err, np.abs(G @ G - I).max())
        for g in rep.gammas:
            err = max(err, np.abs(G @ g + g @ G).max())
    if err > tol:
        raise RepresentationError(f"Clifford relations violated by {err:.3g}")
    return float(err)


def spinor_trace_top(rep: GammaRep, check: bool = True) -> complex:
    """Spinor trace of ``i^k Gamma^1 ... Gamma^k``.

    For odd ``k`` this is the plain trace.  For even ``k`` the plain trace
    vanishes identically (the product is a multiple of the grading), and
    the value returned is the trace over the ``Gamma_0 = +1`` half-spinor
    space, i.e. with the weight ``(1 + Gamma_0)/2``.
    """
    top = (1j) ** rep.k * rep.product(range(rep.k))
    if rep.grading is not None:
        top = 0.5 * (np.eye(rep.nu) + rep.grading) @ top
    val = complex(np.trace(top))
    if check and abs(val - expected_top_trace(rep.k)) > TOL:
        raise RepresentationError(
            f"top spinor trace {val} differs from {expected_top_trace(rep.k)} for k={rep.k}"
        )
    return val


def full_trace_top(rep: GammaRep) -> complex:
    """Unweighted ``Tr(i^k Gamma^1 ... Gamma^k)``; zero for even ``k``."""
    return complex(np.trace((1j) ** rep.k * rep.product(range(rep.k))))


def partial_product_trace_vanishes(rep: GammaRep, subset, tol: float = TOL) -> bool:
    """True iff the product over a proper nonempty ``subset`` of generators is traceless."""
    subset = list(subset)
    if not 0 < len(subset) < rep.k:
        raise ValidationError("subset must be a proper nonempty subset of the generators")
    if any(not 0 <= j < rep.k for j in subset):
        raise ValidationError(f"generator index out of range for k={rep.k}")
    return abs(np.trace(rep.product(subset))) < tol


def proper_subsets(k: int):
    for r in range(1, k):
        yield from itertools.combinations(range(k), r)
