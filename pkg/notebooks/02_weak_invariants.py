"""
Weak invariants of a layered system
===================================

Hofstadter planes stacked along a third direction with a weak interlayer
hopping.  Pairings over direction pairs pick out the lower-dimensional
(weak) invariants: only the plane carrying the flux sees a Chern number.
"""

import warnings

from ncindex.calculus import fermi_projection
from ncindex.lattice import TorusGeometry, build_hamiltonian
from ncindex.models import hofstadter
from ncindex.pairings import even_pairing

# non-integer pairings warn; here they are expected
warnings.simplefilter("ignore", RuntimeWarning)

spec, twist = hofstadter("1/3", layers_hop=0.2)
P = fermi_projection(build_hamiltonian(spec, TorusGeometry((12, 12, 6)), twist), -1.2)

for J in ((0, 1), (0, 2), (1, 2)):
    r = even_pairing(P, J)
    print("J =", tuple(j + 1 for j in J), r.raw.real, "->", r.rounded)

# Reversing the order of J reverses the orientation of the plane.
print(even_pairing(P, (1, 0)).rounded)

# The empty direction set gives back the electron density per site.
print("density", even_pairing(P, ()).raw.real)
