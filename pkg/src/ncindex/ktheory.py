"""K-group bookkeeping: Bott tables, weak-phase decomposition, symmetry classes.

The real table is the K-theory of the reals (period 8); the complex table
is the K-theory of the complex numbers (period 2).  The group of a
``d``-dimensional crossed product by ``Z^d`` splits as

    K_n(B x| Z^d) = sum_{j=0}^{d} binom(d, j) K_{n-j}(B)

for trivial coefficient algebra ``B``; the ``j = d`` summand is the strong
invariant and the others are weak invariants.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import ValidationError

# (free rank, number of Z_2 summands) of KO_n(R), n = 0..7
KO_TABLE = ((1, 0), (0, 1), (0, 1), (0, 0), (1, 0), (0, 0), (0, 0), (0, 0))
# K_n(C), n = 0, 1
K_TABLE = ((1, 0), (0, 0))


@dataclass(frozen=True)
class KOGroup:
    """``Z^free_rank + (Z_2)^torsion2_count``."""

    free_rank: int = 0
    torsion2_count: int = 0

    def __post_init__(self):
        if self.free_rank < 0 or self.torsion2_count < 0:
            raise ValidationError("group ranks must be nonnegative")

    def __add__(self, other: "KOGroup") -> "KOGroup":
        return KOGroup(self.free_rank + other.free_rank, self.torsion2_count + other.torsion2_count)

    def __mul__(self, m: int) -> "KOGroup":
        return KOGroup(m * self.free_rank, m * self.torsion2_count)

    __rmul__ = __mul__

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and self.torsion2_count == 0

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        if self.torsion2_count:
            parts.append("Z_2" if self.torsion2_count == 1 else f"(Z_2)^{self.torsion2_count}")
        return " + ".join(parts) if parts else "0"


def ko_group(n: int) -> KOGroup:
    """``KO_n`` of the reals, ``n`` taken mod 8."""
    return KOGroup(*KO_TABLE[n % 8])


def k_group(n: int) -> KOGroup:
    """``K_n`` of the complex numbers, ``n`` taken mod 2."""
    return KOGroup(*K_TABLE[n % 2])


@dataclass(frozen=True)
class Summand:
    j: int
    multiplicity: int
    raw_degree: int
    degree: int
    group: KOGroup
    kind: str


@dataclass(frozen=True)
class WeakPhaseDecomposition:
    n: int
    d: int
    real: bool
    summands: tuple
    total: KOGroup

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["total_str"] = str(self.total)
        for s, orig in zip(rec["summands"], self.summands):
            s["group_str"] = str(orig.group)
        return rec

    def table(self) -> str:
        lines = [f"{'j':>3} {'mult':>5} {'degree':>10}  group  kind"]
        for s in self.summands:
            lines.append(f"{s.j:>3} {s.multiplicity:>5} {s.raw_degree:>4} = {s.degree:<3}  "
                         f"{s.group!s:<5}  {s.kind}")
        lines.append(f"total: {self.total}")
        return "\n".join(lines)


def weak_phase_group(n: int, d: int, real: bool = True) -> WeakPhaseDecomposition:
    """Summand ``j`` is ``binom(d, j)`` copies of ``K_{n-j}``; ``j = d`` is the strong part."""
    if d < 0:
        raise ValidationError(f"dimension must be nonnegative, got {d}")
    period = 8 if real else 2
    table = ko_group if real else k_group
    summands = []
    total = KOGroup()
    for j in range(d + 1):
        m = math.comb(d, j)
        g = table(n - j)
        summands.append(Summand(j, m, n - j, (n - j) % period, g, "strong" if j == d else "weak"))
        total = total + m * g
    return WeakPhaseDecomposition(n, d, real, tuple(summands), total)


def boundary_degree_shift(n: int, real: bool = True) -> int:
    """Degree of the edge class: ``n - 1`` reduced mod 8 (mod 2 for complex)."""
    return (n - 1) % (8 if real else 2)


def summand_multiset(dec: WeakPhaseDecomposition) -> dict:
    """``{reduced degree: total multiplicity}``; used for the Pascal-merge check."""
    out = {}
    for s in dec.summands:
        out[s.degree] = out.get(s.degree, 0) + s.multiplicity
    return out


def pascal_merge_holds(n: int, d: int, real: bool = True) -> bool:
    """Adding one more ``Z`` splits every summand into degrees ``n - j`` and ``n - j - 1``."""
    if d < 1:
        return True
    whole = summand_multiset(weak_phase_group(n, d, real))
    merged = summand_multiset(weak_phase_group(n, d - 1, real))
    for deg, m in summand_multiset(weak_phase_group(n - 1, d - 1, real)).items():
        merged[deg] = merged.get(deg, 0) + m
    return whole == merged


# Altland-Zirnbauer labels.  Flags are (TRS sign, PHS sign) with 0 = absent.
REAL_CLASSES = {
    "AI": (0, (1, 0)),
    "BDI": (1, (1, 1)),
    "D": (2, (0, 1)),
    "DIII": (3, (-1, 1)),
    "AII": (4, (-1, 0)),
    "CII": (5, (-1, -1)),
    "C": (6, (0, -1)),
    "CI": (7, (1, -1)),
}
COMPLEX_CLASSES = {"A": 0, "AIII": 1}


@dataclass(frozen=True)
class SymmetryClass:
    label: str
    n: int
    real: bool
    trs: int
    phs: int
    has_chiral: bool

    @property
    def has_TRS(self) -> bool:
        return self.trs != 0

    @property
    def has_PHS(self) -> bool:
        return self.phs != 0

    @classmethod
    def from_label(cls, label: str) -> "SymmetryClass":
        key = label.strip().upper()
        if key in REAL_CLASSES:
            n, (t, c) = REAL_CLASSES[key]
            return cls(key, n, True, t, c, bool(t and c))
        if key in COMPLEX_CLASSES:
            n = COMPLEX_CLASSES[key]
            return cls(key, n, False, 0, 0, n == 1)
        raise ValidationError(f"unknown symmetry class {label!r}")

    @classmethod
    def from_index(cls, n: int, real: bool = True) -> "SymmetryClass":
        table = REAL_CLASSES if real else COMPLEX_CLASSES
        period = 8 if real else 2
        for label, val in table.items():
            if (val[0] if real else val) == n % period:
                return cls.from_label(label)
        raise ValidationError(f"no class with index {n}")

    @classmethod
    def from_flags(cls, trs: int, phs: int, chiral: bool = False) -> "SymmetryClass":
        """Class from the signs of time reversal and particle-hole symmetry (0 if absent)."""
        if trs not in (-1, 0, 1) or phs not in (-1, 0, 1):
            raise ValidationError("symmetry signs must be -1, 0 or +1")
        if trs == 0 and phs == 0:
            return cls.from_label("AIII" if chiral else "A")
        if chiral != bool(trs and phs):
            raise ValidationError("chiral symmetry is fixed by TRS and PHS in the real classes")
        for label, (_, flags) in REAL_CLASSES.items():
            if flags == (trs, phs):
                return cls.from_label(label)
        raise ValidationError(f"no class with flags {(trs, phs)}")


def parse_class(spec: str, real: bool | None = None) -> SymmetryClass:
    """Accept a class label (``AII``) or an integer index (``4``)."""
    s = str(spec).strip()
    try:
        n = int(s)
    except ValueError:
        sc = SymmetryClass.from_label(s)
        if real is not None and sc.real != real:
            raise ValidationError(f"class {sc.label} is {'real' if sc.real else 'complex'}")
        return sc
    return SymmetryClass.from_index(n, True if real is None else real)
