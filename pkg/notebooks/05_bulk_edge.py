"""
Bulk and edge
=============

Opening the second direction of the Hofstadter torus produces a cylinder
whose spectrum fills the bulk gap with chiral edge modes.  The boundary
map sends the Fermi projection to a unitary supported near the edges, and
the odd pairing of that unitary along the edge equals the bulk Chern
number up to the orientation sign.
"""

import numpy as np

from ncindex.boundary import CylinderGeometry, build_halfspace, bulk_edge_check, reduced_boundary_map_even
from ncindex.lattice import TorusGeometry, build_hamiltonian
from ncindex.models import hofstadter

spec, twist = hofstadter("1/3")
gap = (-2.0, -0.7320508075688772)

# In-gap states appear only once the boundary is open.
bulk = np.linalg.eigvalsh(build_hamiltonian(spec, TorusGeometry((36, 24)), twist).kernel)
cyl = np.linalg.eigvalsh(build_halfspace(spec, CylinderGeometry((36, 24), 1), twist).kernel)
inside = lambda w: np.sum((w > gap[0] + 0.05) & (w < gap[1] - 0.05))
print("in-gap states: torus", inside(bulk), "cylinder", inside(cyl))

# The defect U - 1 of the boundary unitary decays away from the edges.
edge = reduced_boundary_map_even(spec, twist, CylinderGeometry((96, 90), 1), -1.2, gap, 0.2)
print("defect by depth", np.array2string(edge.profile[:8], precision=2))
print("midline", edge.profile[len(edge.profile) // 2])

# The full comparison, including a width-stability check.
rep = bulk_edge_check(spec, twist, TorusGeometry((24, 24)), CylinderGeometry((192, 90), 1), -1.2, (0, 1))
print(rep.bulk.raw.real, rep.edge.raw.real, rep.verdict, "W+10 change", rep.width_stability)
