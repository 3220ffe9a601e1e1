"""
Chern number of the Hofstadter model in real space
==================================================

A square lattice with flux 1/3 per plaquette has three Landau-like bands.
With the Fermi level in the lowest gap the even pairing over both
directions returns the Chern number of the filled band, computed on a
finite torus with no reference to momentum space.
"""

import numpy as np

from ncindex.calculus import fermi_projection
from ncindex.lattice import TorusGeometry, build_hamiltonian
from ncindex.models import hofstadter
from ncindex.oracles import bloch_family, fukui_hatsugai_chern
from ncindex.pairings import even_pairing

spec, twist = hofstadter("1/3")

# The torus sides must be multiples of the flux denominator.
H = build_hamiltonian(spec, TorusGeometry((24, 24)), twist)
w = np.linalg.eigvalsh(H.kernel)
print("lowest band", w[:192].min(), w[:192].max(), "next band starts at", w[192])

# Fermi level inside the lowest gap.
P = fermi_projection(H, -1.2)
res = even_pairing(P, (0, 1))
print("pairing", res.raw, "->", res.rounded, "residual", res.int_residual)

# Independent check on the magnetic Brillouin zone.
family = bloch_family(spec, twist)
print("Fukui-Hatsugai", fukui_hatsugai_chern(family, 1, 30))

# The residual shrinks quickly with the system size.
for L in (6, 12, 18, 24, 30):
    P = fermi_projection(build_hamiltonian(spec, TorusGeometry((L, L)), twist), -1.2)
    print(L, even_pairing(P, (0, 1)).int_residual)

# Filling two bands (mu in the upper gap) gives the total Chern number of
# the two lowest bands.
P = fermi_projection(build_hamiltonian(spec, TorusGeometry((24, 24)), twist), 1.2)
print("two bands", even_pairing(P, (0, 1)).rounded, fukui_hatsugai_chern(family, 2, 30))
