"""Reference models used by the examples and tests."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .lattice import DisorderLaw, ModelSpec, TwistCocycle

SIGMA_Z = np.diag([1.0, -1.0])


def hofstadter(flux="1/3", t=1.0, layers_hop=None, disorder=0.0, gauge="landau"):
    """Nearest-neighbour square lattice with flux per plaquette in the (1, 2) plane.

    With ``layers_hop`` the layers are stacked along a third direction with
    that interlayer amplitude (``0`` gives uncoupled layers).
    """
    d = 2 if layers_hop is None else 3
    hops = []
    for j in range(2):
        r = [0] * d
        r[j] = 1
        hops.append((tuple(r), [[t]]))
    if layers_hop is not None and layers_hop != 0:
        hops.append(((0, 0, 1), [[layers_hop]]))
    spec = ModelSpec(d, 1, tuple(hops), None, DisorderLaw(disorder), None, "hofstadter")
    return spec, TwistCocycle(d, {(0, 1): Fraction(flux)}, gauge)


def ssh(t1=1.0, t2=2.0, d=1, direction=0, disorder=0.0):
    """SSH chains along ``direction``, uncoupled copies along the other directions.

    The chiral block is ``Q(k) = t1 + t2 exp(i k)``.
    """
    r = [0] * d
    r[direction] = 1
    hop = np.array([[0, 0], [t2, 0]])
    onsite = np.array([[0, t1], [t1, 0]])
    spec = ModelSpec(d, 2, ((tuple(r), hop),), onsite, DisorderLaw(disorder), SIGMA_Z, "ssh")
    return spec, TwistCocycle(d)


def atomic_insulator(d=2, energies=(-1.0, 1.0)):
    """Decoupled sites with two levels; trivial in every sense."""
    spec = ModelSpec(d, len(energies), (), np.diag(energies), DisorderLaw(), None, "atomic")
    return spec, TwistCocycle(d)
