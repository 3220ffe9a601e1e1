"""
Gamma matrices and the periodic table
=====================================

Two small pieces of bookkeeping behind the index formulas: explicit
Clifford representations with their top-degree spinor traces, and the
decomposition of K-groups of a lattice system into strong and weak parts.
"""

from ncindex.clifford import build_gamma, check_relations, expected_top_trace, full_trace_top, spinor_trace_top
from ncindex.ktheory import SymmetryClass, weak_phase_group

for k in range(1, 7):
    rep = build_gamma(k)
    check_relations(rep)
    print(k, rep.nu, spinor_trace_top(rep), expected_top_trace(k), "plain trace", full_trace_top(rep))

# Class AII (time reversal squaring to -1) in three dimensions: one Z from
# the density and four Z_2 indices, of which one is strong.
aii = SymmetryClass.from_label("AII")
print(weak_phase_group(aii.n, 3).table())

# Class A in two dimensions: the strong Z is the Chern number.
print(weak_phase_group(0, 2, real=False).table())
