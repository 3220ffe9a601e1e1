"""Built-in identity suites behind ``ncindex selftest``."""

from __future__ import annotations

import numpy as np

from .clifford import (
    build_gamma,
    check_relations,
    expected_top_trace,
    full_trace_top,
    partial_product_trace_vanishes,
    proper_subsets,
    spinor_trace_top,
)
from .errors import RepresentationError
from .ktheory import ko_group, pascal_merge_holds, weak_phase_group
from .lattice import TorusGeometry, TwistCocycle, twisted_shift


def clifford_suite(kmax: int = 8) -> dict:
    problems = []
    for k in range(1, kmax + 1):
        try:
            rep = build_gamma(k)
            check_relations(rep)
            spinor_trace_top(rep)
        except RepresentationError as exc:
            problems.append(f"k={k}: {exc}")
            continue
        if not all(partial_product_trace_vanishes(rep, s) for s in proper_subsets(k)):
            problems.append(f"k={k}: a proper product has non-zero trace")
    k1 = build_gamma(1, orientation=1)
    note = (f"Gamma^1=[1] gives {full_trace_top(k1)}, target {expected_top_trace(1)}; "
            "orientation -1 is used for odd k")
    return {"suite": "clifford", "passed": not problems, "detail": "; ".join(problems) or f"k<={kmax} ok; {note}"}


def ktheory_suite(dmax: int = 6) -> dict:
    problems = []
    for n in range(16):
        if ko_group(n) != ko_group(n + 8):
            problems.append(f"periodicity fails at n={n}")
    for real in (True, False):
        for n in range(8):
            for d in range(dmax + 1):
                if not pascal_merge_holds(n, d, real):
                    problems.append(f"Pascal merge fails at n={n}, d={d}, real={real}")
    if str(weak_phase_group(4, 3).total) != "Z + (Z_2)^4":
        problems.append("(n=4, d=3) total is not Z + (Z_2)^4")
    return {"suite": "ktheory", "passed": not problems, "detail": "; ".join(problems) or f"d<={dmax} ok"}


def lattice_suite() -> dict:
    geom = TorusGeometry((6, 6))
    twist = TwistCocycle(2, {(0, 1): "1/3"})
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(10):
        m, n = rng.integers(-2, 3, size=(2, 2))
        lhs = twisted_shift(geom, twist, m).kernel @ twisted_shift(geom, twist, n).kernel
        rhs = twist.cocycle(n, m) * twisted_shift(geom, twist, m + n).kernel
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    ok = worst < 1e-12
    return {"suite": "lattice", "passed": ok, "detail": f"composition law defect {worst:.2e}"}


SUITES = {"clifford": clifford_suite, "ktheory": ktheory_suite, "lattice": lattice_suite}


def run_suites(name: str = "all") -> list:
    names = list(SUITES) if name == "all" else [name]
    return [SUITES[n]() for n in names]
