"""Crystal bar-joint frameworks: data model, validation, gallery, supercells.

A framework in R^d is given by d period vectors a_1..a_d, a finite motif of
joints p(v) and a finite list of bar classes ``(v, k)(w, l)``.  The joint
``(v, k)`` sits at ``p(v) + k_1 a_1 + ... + k_d a_d``.  All geometry is
exact (``fractions.Fraction``).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "MultiIndex",
    "Joint",
    "EdgeDecl",
    "CrystalFramework",
    "Violation",
    "ValidationReport",
    "InvalidFrameworkError",
    "validate",
    "require_valid",
    "bar_vector",
    "gallery",
    "GALLERY_NAMES",
    "supercell",
]

MultiIndex = tuple[int, ...]


class InvalidFrameworkError(ValueError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid crystal framework: " + "; ".join(str(v) for v in report.violations))


def _frac_vector(values: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in values)


@dataclass(frozen=True)
class Joint:
    id: str
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", _frac_vector(self.coords))


@dataclass(frozen=True)
class EdgeDecl:
    """The bar class between ``(v, k)`` and ``(w, l)``."""

    v: str
    k: MultiIndex
    w: str
    l: MultiIndex

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        object.__setattr__(self, "l", tuple(int(x) for x in self.l))

    def reversed(self) -> "EdgeDecl":
        return EdgeDecl(self.w, self.l, self.v, self.k)

    def translated(self, t: Sequence[int]) -> "EdgeDecl":
        return EdgeDecl(
            self.v,
            tuple(a + b for a, b in zip(self.k, t)),
            self.w,
            tuple(a + b for a, b in zip(self.l, t)),
        )


@dataclass(frozen=True)
class CrystalFramework:
    d: int
    periods: tuple[tuple[Fraction, ...], ...]
    joints: tuple[Joint, ...]
    edges: tuple[EdgeDecl, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "periods", tuple(_frac_vector(a) for a in self.periods))
        object.__setattr__(
            self, "joints", tuple(j if isinstance(j, Joint) else Joint(*j) for j in self.joints)
        )
        object.__setattr__(
            self, "edges", tuple(e if isinstance(e, EdgeDecl) else EdgeDecl(*e) for e in self.edges)
        )

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def joint_ids(self) -> list[str]:
        return [j.id for j in self.joints]

    def joint_index(self, label: str) -> int:
        for i, j in enumerate(self.joints):
            if j.id == label:
                return i
        raise KeyError(f"unknown joint label {label!r}")

    def period_matrix(self) -> list[list[Fraction]]:
        """The d x d matrix A whose columns are the period vectors."""
        return [[self.periods[j][i] for j in range(self.d)] for i in range(self.d)]

    def lattice_vector(self, k: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(
            sum((k[j] * self.periods[j][i] for j in range(self.d)), Fraction(0)) for i in range(self.d)
        )

    def position(self, label: str, k: Sequence[int]) -> tuple[Fraction, ...]:
        p = self.joints[self.joint_index(label)].coords
        t = self.lattice_vector(k)
        return tuple(a + b for a, b in zip(p, t))

    def positions_array(self) -> np.ndarray:
        return np.array([[float(c) for c in j.coords] for j in self.joints])

    def periods_array(self) -> np.ndarray:
        """Float period matrix with the period vectors as columns."""
        return np.array([[float(x) for x in a] for a in self.periods]).T

    def linear_image(self, t: Sequence[Sequence]) -> "CrystalFramework":
        """Apply the linear map ``t`` to every joint and period vector."""
        tf = [[Fraction(x) for x in row] for row in t]

        def apply(v):
            return tuple(sum((tf[i][j] * v[j] for j in range(self.d)), Fraction(0)) for i in range(self.d))

        return CrystalFramework(
            d=self.d,
            periods=tuple(apply(a) for a in self.periods),
            joints=tuple(Joint(j.id, apply(j.coords)) for j in self.joints),
            edges=self.edges,
            name=self.name,
        )


@dataclass(frozen=True)
class Violation:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def codes(self) -> list[str]:
        return [v.code for v in self.violations]


def _exact_det(rows: list[list[Fraction]]) -> Fraction:
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for j in range(c, n):
                    a[r][j] -= f * a[c][j]
    return det


def _in_lattice(fw: CrystalFramework, vec: Sequence[Fraction]) -> bool:
    # solve A x = vec exactly and test integrality
    a = fw.period_matrix()
    n = fw.d
    aug = [list(a[i]) + [Fraction(vec[i])] for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c] / aug[c][c]
                for j in range(c, n + 1):
                    aug[r][j] -= f * aug[c][j]
    return all((aug[i][n] / aug[i][i]).denominator == 1 for i in range(n))


def validate(fw: CrystalFramework) -> ValidationReport:
    """Collect every violated framework invariant; empty report iff valid."""
    rep = ValidationReport()
    bad = rep.violations.append
    d = fw.d
    if d < 1:
        bad(Violation("dimension", f"dimension must be >= 1, got {d}"))
        return rep
    if len(fw.periods) != d or any(len(a) != d for a in fw.periods):
        bad(Violation("dimension mismatch", f"need {d} period vectors of length {d}"))
    elif _exact_det(fw.period_matrix()) == 0:
        bad(Violation("periods dependent", "period vectors are linearly dependent (det A = 0)"))
    if not fw.joints:
        bad(Violation("empty motif", "framework has no joints"))
    seen = set()
    for j in fw.joints:
        if j.id in seen:
            bad(Violation("duplicate joint id", f"joint id {j.id!r} appears more than once"))
        seen.add(j.id)
        if len(j.coords) != d:
            bad(Violation("dimension mismatch", f"joint {j.id!r} has {len(j.coords)} coordinates"))
    if rep.violations:
        return rep
    for idx, e in enumerate(fw.edges):
        prefix = f"edge {idx} ({e.v},{e.k})-({e.w},{e.l})"
        missing = [x for x in (e.v, e.w) if x not in seen]
        if missing:
            bad(Violation("unknown joint", f"{prefix} references unknown joint(s) {missing}"))
            continue
        if len(e.k) != d or len(e.l) != d:
            bad(Violation("dimension mismatch", f"{prefix} has cell offsets of wrong length"))
            continue
        if e.v == e.w and e.k == e.l:
            bad(Violation("zero-length bar", f"{prefix} joins a joint to itself"))
            continue
        if not any(bar_vector(fw, e, check=False)):
            bad(Violation("zero-length bar", f"{prefix} joins two coincident joints"))
    ids = fw.joint_ids
    for a, b in itertools.combinations(range(fw.n), 2):
        diff = [x - y for x, y in zip(fw.joints[a].coords, fw.joints[b].coords)]
        if _in_lattice(fw, diff):
            rep.warnings.append(
                Violation("coincident joints", f"joints {ids[a]!r} and {ids[b]!r} coincide up to a period")
            )
    return rep


def require_valid(fw: CrystalFramework) -> None:
    rep = validate(fw)
    if not rep.ok:
        raise InvalidFrameworkError(rep)


def bar_vector(fw: CrystalFramework, e: EdgeDecl, check: bool = True) -> tuple[Fraction, ...]:
    """p(e) = p(v, k) - p(w, l)."""
    if check:
        for label in (e.v, e.w):
            fw.joint_index(label)
    pv = fw.position(e.v, e.k)
    pw = fw.position(e.w, e.l)
    return tuple(a - b for a, b in zip(pv, pw))


# -- gallery ----------------------------------------------------------

def _grid() -> CrystalFramework:
    return CrystalFramework(
        d=2,
        periods=((1, 0), (0, 1)),
        joints=(Joint("v", (0, 0)),),
        edges=(
            EdgeDecl("v", (0, 0), "v", (1, 0)),
            EdgeDecl("v", (0, 0), "v", (0, 1)),
        ),
        name="grid",
    )


def _diag_grid() -> CrystalFramework:
    # Z^2 grid with the diagonals (n,m)(n+1,m+1), n+m even.  The period
    # lattice is the even-sum sublattice, basis a1=(1,1), a2=(2,0); each cell
    # owns the braced unit square with lower-left corner at the cell origin.
    return CrystalFramework(
        d=2,
        periods=((1, 1), (2, 0)),
        joints=(Joint("a", (0, 0)), Joint("b", (1, 0))),
        edges=(
            EdgeDecl("a", (0, 0), "b", (0, 0)),    # (0,0)-(1,0)
            EdgeDecl("a", (0, 0), "b", (1, -1)),   # (0,0)-(0,1)
            EdgeDecl("b", (0, 0), "a", (1, 0)),    # (1,0)-(1,1)
            EdgeDecl("b", (1, -1), "a", (1, 0)),   # (0,1)-(1,1)
            EdgeDecl("a", (0, 0), "a", (1, 0)),    # (0,0)-(1,1) diagonal
        ),
        name="diag_grid",
    )


def _kagome_rational() -> CrystalFramework:
    # affine image of the regular kagome sending the triangular-lattice
    # periods to (2,0), (0,2); up triangle (0,0),(1,0),(0,1)
    return CrystalFramework(
        d=2,
        periods=((2, 0), (0, 2)),
        joints=(Joint("u", (0, 0)), Joint("v", (1, 0)), Joint("w", (0, 1))),
        edges=(
            EdgeDecl("u", (0, 0), "v", (0, 0)),
            EdgeDecl("u", (0, 0), "w", (0, 0)),
            EdgeDecl("v", (0, 0), "w", (0, 0)),
            EdgeDecl("v", (0, 0), "u", (1, 0)),
            EdgeDecl("v", (0, 0), "w", (1, -1)),
            EdgeDecl("u", (0, 0), "w", (0, -1)),
        ),
        name="kagome_rational",
    )


_CUBE_OFFSETS = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1))
DOUBLED3D_OFFSET = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 5))


def _doubled3d() -> CrystalFramework:
    # a one-joint cubic framework braced to the 7 nonzero 0/1 neighbours is
    # infinitesimally rigid; a translated copy is joined by parallel bars
    edges = [EdgeDecl("a", (0, 0, 0), "a", l) for l in _CUBE_OFFSETS]
    edges += [EdgeDecl("b", (0, 0, 0), "b", l) for l in _CUBE_OFFSETS]
    edges.append(EdgeDecl("a", (0, 0, 0), "b", (0, 0, 0)))
    return CrystalFramework(
        d=3,
        periods=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        joints=(Joint("a", (0, 0, 0)), Joint("b", DOUBLED3D_OFFSET)),
        edges=tuple(edges),
        name="doubled3d",
    )


def _rigid3d() -> CrystalFramework:
    return CrystalFramework(
        d=3,
        periods=((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        joints=(Joint("a", (0, 0, 0)),),
        edges=tuple(EdgeDecl("a", (0, 0, 0), "a", l) for l in _CUBE_OFFSETS),
        name="rigid3d",
    )


_GALLERY = {
    "grid": _grid,
    "diag_grid": _diag_grid,
    "kagome_rational": _kagome_rational,
    "doubled3d": _doubled3d,
    "rigid3d": _rigid3d,
}
GALLERY_NAMES = tuple(_GALLERY)


def gallery(name: str) -> CrystalFramework:
    """Named example frameworks: grid, diag_grid, kagome_rational, doubled3d
    (and rigid3d, the rigid cubic framework doubled3d is built from)."""
    try:
        return _GALLERY[name]()
    except KeyError:
        raise KeyError(f"unknown gallery framework {name!r}; choose from {', '.join(GALLERY_NAMES)}") from None


def supercell(fw: CrystalFramework, reps: Sequence[int]) -> CrystalFramework:
    """Re-describe ``fw`` with periods ``reps[i] * a_i``.

    Joint ``(v, r)`` for residue ``r`` is labelled ``"v@r1,r2,..."``; residues
    are the outer loop and motif joints the inner one, for joints and edges.
    """
    reps = tuple(int(r) for r in reps)
    if len(reps) != fw.d:
        raise ValueError(f"reps must have length {fw.d}")
    if any(r < 1 for r in reps):
        raise ValueError("supercell repetitions must be >= 1")
    residues = list(itertools.product(*(range(r) for r in reps)))

    def label(v: str, r: Sequence[int]) -> str:
        return f"{v}@{','.join(str(x) for x in r)}"

    joints = []
    for r in residues:
        for j in fw.joints:
            t = fw.lattice_vector(r)
            joints.append(Joint(label(j.id, r), tuple(a + b for a, b in zip(j.coords, t))))

    def reduce(k):
        q, rr = zip(*(divmod(ki, ni) for ki, ni in zip(k, reps)))
        return tuple(q), tuple(rr)

    edges = []
    for r in residues:
        for e in fw.edges:
            qk, rk = reduce(tuple(a + b for a, b in zip(r, e.k)))
            ql, rl = reduce(tuple(a + b for a, b in zip(r, e.l)))
            edges.append(EdgeDecl(label(e.v, rk), qk, label(e.w, rl), ql))
    periods = tuple(tuple(reps[i] * x for x in fw.periods[i]) for i in range(fw.d))
    return CrystalFramework(
        d=fw.d,
        periods=periods,
        joints=tuple(joints),
        edges=tuple(edges),
        name=f"{fw.name}x{'x'.join(map(str, reps))}" if fw.name else "",
    )
