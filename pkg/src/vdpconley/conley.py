"""Z2 connection and transition matrices over finite Morse decompositions.

Generators of the chain space are pairs (element, q), one per unit of rank
in the element's graded index. Matrices are stored densely with rows indexed
by the target basis and columns by the source basis; "iso" is the bit 1.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import gf2
from .model import GradedZ2Index

MAX_EXHAUSTIVE_ELEMENTS = 12
MAX_ENUMERATION_DIM = 16
MAX_ENUMERATION_SLOTS = 24
MAX_TRANSITION_SOLUTIONS = 2**16


class AlgebraError(ValueError):
    pass


class TransitionError(AlgebraError):
    pass


# -- posets ------------------------------------------------------------------


@dataclass(frozen=True)
class Poset:
    """A finite set with a strict partial order; (a, b) in ``less`` means a < b."""

    elements: tuple[str, ...]
    less: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        elements = tuple(str(p) for p in self.elements)
        if len(set(elements)) != len(elements):
            raise AlgebraError(f"duplicate poset elements in {elements}")
        less = frozenset((str(a), str(b)) for a, b in self.less)
        known = set(elements)
        for a, b in less:
            if a not in known or b not in known:
                raise AlgebraError(f"order relation {a} < {b} mentions an unknown element")
            if a == b:
                raise AlgebraError(f"order is not irreflexive: {a} < {a}")
        for (a, b), (c, d) in itertools.product(less, less):
            if b == c and (a, d) not in less:
                raise AlgebraError(f"order is not transitive: {a} < {b} < {d} but not {a} < {d}")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "less", less)

    @classmethod
    def generated_by(cls, elements: Iterable, pairs: Iterable[tuple]) -> "Poset":
        """Smallest strict order containing ``pairs`` (transitive closure)."""
        elements = tuple(str(p) for p in elements)
        rel = {(str(a), str(b)) for a, b in pairs}
        while True:
            extra = {(a, d) for a, b in rel for c, d in rel if b == c} - rel
            if not extra:
                break
            rel |= extra
        cycles = sorted(a for a, b in rel if a == b)
        if cycles:
            raise AlgebraError(f"order relations contain a cycle through {cycles[0]}")
        return cls(elements, frozenset(rel))

    @classmethod
    def chain(cls, elements: Sequence) -> "Poset":
        elements = [str(p) for p in elements]
        return cls.generated_by(elements, zip(elements, elements[1:]))

    def lt(self, a: str, b: str) -> bool:
        return (a, b) in self.less

    def __len__(self):
        return len(self.elements)

    def _check_subset(self, I) -> frozenset[str]:
        I = frozenset(str(p) for p in I)
        unknown = I - set(self.elements)
        if unknown:
            raise AlgebraError(f"unknown elements {sorted(unknown)}")
        return I

    def intervals(self) -> list[frozenset[str]]:
        """All nonempty intervals, by size then declaration order."""
        if len(self.elements) > MAX_EXHAUSTIVE_ELEMENTS:
            raise AlgebraError(
                f"exhaustive interval enumeration is limited to {MAX_EXHAUSTIVE_ELEMENTS} elements"
            )
        out = []
        for k in range(1, len(self.elements) + 1):
            for combo in itertools.combinations(self.elements, k):
                I = frozenset(combo)
                if is_interval(self, I):
                    out.append(I)
        return out

    def sorted(self, I: Iterable[str]) -> list[str]:
        I = set(I)
        return [p for p in self.elements if p in I]


def is_interval(P: Poset, I: Iterable[str]) -> bool:
    I = P._check_subset(I)
    for a, b in itertools.product(I, I):
        if P.lt(a, b):
            for c in P.elements:
                if c not in I and P.lt(a, c) and P.lt(c, b):
                    return False
    return True


def is_attracting_interval(P: Poset, I: Iterable[str]) -> bool:
    I = P._check_subset(I)
    if not is_interval(P, I):
        return False
    return all(a in I for a, b in P.less if b in I)


# -- Morse decompositions ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class MorseDecomposition:
    """Morse sets with their order, graded indices and optional descriptions.

    ``interval_index`` may prescribe the index of non-singleton intervals;
    the validator then checks it against interval homology.
    """

    poset: Poset
    index: Mapping[str, GradedZ2Index]
    labels: Mapping[str, str] = field(default_factory=dict)
    interval_index: Mapping[frozenset, GradedZ2Index] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        index = {}
        for p, v in self.index.items():
            index[str(p)] = v if isinstance(v, GradedZ2Index) else GradedZ2Index(tuple(v))
        missing = [p for p in self.poset.elements if p not in index]
        if missing:
            raise AlgebraError(f"no Conley index given for Morse set(s) {missing}")
        extra = sorted(set(index) - set(self.poset.elements))
        if extra:
            raise AlgebraError(f"index given for unknown Morse set(s) {extra}")
        iv = {}
        for I, v in self.interval_index.items():
            I = self.poset._check_subset(I)
            if not is_interval(self.poset, I):
                raise AlgebraError(f"prescribed index on non-interval {sorted(I)}")
            iv[I] = v if isinstance(v, GradedZ2Index) else GradedZ2Index(tuple(v))
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "labels", {str(k): str(v) for k, v in self.labels.items()})
        object.__setattr__(self, "interval_index", iv)

    @classmethod
    def build(cls, elements, order, index, labels=None, name="") -> "MorseDecomposition":
        return cls(Poset.generated_by(elements, order), index, labels or {}, name=name)

    @property
    def elements(self) -> tuple[str, ...]:
        return self.poset.elements

    @property
    def basis(self) -> list[tuple[str, int]]:
        """Generators (element, q), ordered by degree and then declaration order."""
        out = []
        for q in range(3):
            for p in self.poset.elements:
                out.extend([(p, q)] * self.index[p].rank(q))
        return out

    @property
    def dim(self) -> int:
        return len(self.basis)

    def basis_labels(self) -> list[str]:
        return [generator_label(p, q) for p, q in self.basis]

    def prescribed(self, I: frozenset[str]) -> GradedZ2Index | None:
        if len(I) == 1:
            return self.index[next(iter(I))]
        return self.interval_index.get(I)


def generator_label(p: str, q: int) -> str:
    return f"H{q}({p})"


# -- graded maps -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GradedZ2Map:
    """A Z2 linear map of fixed homological degree between two chain spaces."""

    degree: int
    source: MorseDecomposition
    target: MorseDecomposition
    matrix: np.ndarray

    def __post_init__(self):
        M = gf2.as_gf2(self.matrix)
        rows, cols = self.target.basis, self.source.basis
        if M.shape != (len(rows), len(cols)):
            raise AlgebraError(f"matrix shape {M.shape} does not match basis sizes {(len(rows), len(cols))}")
        for i, j in zip(*np.nonzero(M)):
            if rows[i][1] != cols[j][1] + self.degree:
                raise AlgebraError(
                    f"entry {generator_label(*rows[i])} <- {generator_label(*cols[j])} "
                    f"breaks degree {self.degree}"
                )
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def zero(cls, degree: int, source: MorseDecomposition, target: MorseDecomposition | None = None):
        target = source if target is None else target
        return cls(degree, source, target, np.zeros((target.dim, source.dim), dtype=np.uint8))

    @classmethod
    def from_entries(
        cls,
        degree: int,
        source: MorseDecomposition,
        target: MorseDecomposition | None = None,
        entries: Iterable[tuple[str, str, int]] = (),
    ) -> "GradedZ2Map":
        """Set the block (target element <- source element) at source degree q to iso."""
        target = source if target is None else target
        M = np.zeros((target.dim, source.dim), dtype=np.uint8)
        for t, s, q in entries:
            i, j = _slot(target, source, str(t), str(s), int(q), degree)
            M[i, j] = 1
        return cls(degree, source, target, M)

    @classmethod
    def connection(cls, M: MorseDecomposition, entries: Iterable[tuple[str, str, int]] = ()):
        """Degree -1 map on M; each entry is (target, source, source degree)."""
        return cls.from_entries(-1, M, M, entries)

    def entry(self, t: str, s: str, q: int) -> int:
        i, j = _slot(self.target, self.source, str(t), str(s), int(q), self.degree)
        return int(self.matrix[i, j])

    def slots(self) -> list[tuple[str, str, int]]:
        """Structurally allowed blocks (target, source, source degree)."""
        rows, cols = self.target.basis, self.source.basis
        return [
            (rows[i][0], cols[j][0], cols[j][1])
            for i in range(len(rows))
            for j in range(len(cols))
            if rows[i][1] == cols[j][1] + self.degree
        ]

    def nonzero(self) -> list[tuple[str, str, int]]:
        rows, cols = self.target.basis, self.source.basis
        return [(rows[i][0], cols[j][0], cols[j][1]) for i, j in zip(*np.nonzero(self.matrix))]

    def __eq__(self, other):
        if not isinstance(other, GradedZ2Map):
            return NotImplemented
        return (
            self.degree == other.degree
            and self.source.basis == other.source.basis
            and self.target.basis == other.target.basis
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None

    def restrict(self, I: Iterable[str]) -> tuple[np.ndarray, list[tuple[str, int]]]:
        """Square block of an endomorphism on the generators of elements in I."""
        if self.source is not self.target and self.source.basis != self.target.basis:
            raise AlgebraError("restriction needs an endomorphism")
        I = set(I)
        keep = [k for k, (p, _) in enumerate(self.source.basis) if p in I]
        return self.matrix[np.ix_(keep, keep)], [self.source.basis[k] for k in keep]

    def to_text(self, marks: Mapping[tuple[int, int], str] | None = None) -> str:
        """Matrix with labeled rows and columns; ``marks`` overrides cell text."""
        rows, cols = self.target.basis_labels(), self.source.basis_labels()
        cells = [
            [
                (marks or {}).get((i, j), "iso" if self.matrix[i, j] else "0")
                for j in range(len(cols))
            ]
            for i in range(len(rows))
        ]
        return format_table(rows, cols, cells)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "rows": self.target.basis_labels(),
            "cols": self.source.basis_labels(),
            "matrix": self.matrix.astype(int).tolist(),
            "nonzero": [{"target": t, "source": s, "q": q} for t, s, q in self.nonzero()],
        }


def format_table(rows: Sequence[str], cols: Sequence[str], cells: Sequence[Sequence[str]]) -> str:
    w0 = max([len(r) for r in rows] + [0])
    widths = [max([len(c)] + [len(cells[i][j]) for i in range(len(rows))]) for j, c in enumerate(cols)]
    lines = [" " * w0 + " | " + "  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines.append("-" * len(lines[0]))
    for r, row in zip(rows, cells):
        lines.append(r.ljust(w0) + " | " + "  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(lines)


def _slot(target, source, t, s, q, degree) -> tuple[int, int]:
    rows, cols = target.basis, source.basis
    if t not in target.poset.elements:
        raise AlgebraError(f"unknown target Morse set {t!r}")
    if s not in source.poset.elements:
        raise AlgebraError(f"unknown source Morse set {s!r}")
    try:
        j = cols.index((s, q))
        i = rows.index((t, q + degree))
    except ValueError:
        raise AlgebraError(
            f"no block {generator_label(t, q + degree)} <- {generator_label(s, q)}: "
            "index ranks vanish there"
        ) from None
    return i, j


# -- connection matrices -----------------------------------------------------


@dataclass(frozen=True)
class Violation:
    axiom: str
    detail: str
    witness: tuple = ()

    def __str__(self):
        return f"{self.axiom}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list[Violation]
    interval_homology: dict[frozenset, GradedZ2Index]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid

    def summary(self) -> str:
        if self.valid:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


AXIOM_TRIANGULAR = "strictly upper triangular"
AXIOM_BOUNDARY = "boundary map (Delta^2 = 0)"
AXIOM_HOMOLOGY = "interval homology"


def _graded_homology(block: np.ndarray, basis: Sequence[tuple[str, int]]) -> GradedZ2Index:
    degs = np.array([q for _, q in basis], dtype=int)
    ranks_d = {}
    for q in range(4):
        rows, cols = np.nonzero(degs == q - 1)[0], np.nonzero(degs == q)[0]
        ranks_d[q] = gf2.rank(block[np.ix_(rows, cols)]) if rows.size and cols.size else 0
    h = [int((degs == q).sum()) - ranks_d[q] - ranks_d[q + 1] for q in range(3)]
    return GradedZ2Index(tuple(h))


def homology_of_interval(D: GradedZ2Map, M: MorseDecomposition | None, I: Iterable[str]) -> GradedZ2Index:
    """Ranks of ker/im of D restricted to the interval I, per degree."""
    M = D.source if M is None else M
    I = M.poset._check_subset(I)
    if not is_interval(M.poset, I):
        raise AlgebraError(f"{sorted(I)} is not an interval")
    block, basis = D.restrict(I)
    return _graded_homology(block, basis)


def validate_connection_matrix(
    D: GradedZ2Map,
    M: MorseDecomposition | None = None,
    intervals: Iterable[Iterable[str]] | None = None,
) -> ValidationReport:
    """Check the connection-matrix axioms and report interval homology.

    Intervals are enumerated exhaustively for posets of at most
    ``MAX_EXHAUSTIVE_ELEMENTS`` elements; larger posets check only the
    supplied ``intervals`` and those with a prescribed index.
    """
    M = D.source if M is None else M
    if D.degree != -1:
        raise AlgebraError(f"connection matrices have degree -1, got {D.degree}")
    if D.source.basis != M.basis or D.target.basis != M.basis:
        raise AlgebraError("matrix basis does not match the Morse decomposition")
    violations: list[Violation] = []

    lower = [(t, s, q) for t, s, q in D.nonzero() if not M.poset.lt(t, s)]
    if lower:
        violations.append(Violation(
            AXIOM_TRIANGULAR,
            "nonzero blocks without target < source: "
            + ", ".join(f"Delta({t},{s}) at H{q - 1}<-H{q}" for t, s, q in lower),
            tuple(lower),
        ))

    sq = gf2.matmul(D.matrix, D.matrix)
    if sq.any():
        basis = M.basis
        bad = [(basis[i][0], basis[j][0], basis[j][1]) for i, j in zip(*np.nonzero(sq))]
        violations.append(Violation(
            AXIOM_BOUNDARY,
            "Delta^2 has nonzero entries "
            + ", ".join(f"({t},{s}) at H{q - 2}<-H{q}" for t, s, q in bad),
            tuple(bad),
        ))

    if sq.any():
        # homology is undefined when D is not a boundary map
        return ValidationReport(violations, {})
    if len(M.poset) <= MAX_EXHAUSTIVE_ELEMENTS:
        pending = M.poset.intervals()
    else:
        pending = list(M.interval_index) + [frozenset(I) for I in intervals or ()]
    homology = {}
    for I in pending:
        I = frozenset(I)
        if not is_interval(M.poset, I):
            raise AlgebraError(f"{sorted(I)} is not an interval")
        h = _graded_homology(*D.restrict(I))
        homology[I] = h
        want = M.prescribed(I)
        if want is not None and want != h:
            violations.append(Violation(
                AXIOM_HOMOLOGY,
                f"interval {{{', '.join(M.poset.sorted(I))}}} has homology {h}, expected {want}",
                (I,),
            ))
    return ValidationReport(violations, homology)


def mod2_connection_count(k: int) -> int:
    """Z2 value of a connection-matrix entry carried by k transverse orbits."""
    if int(k) != k or k < 0:
        raise AlgebraError(f"orbit count must be a non-negative integer, got {k}")
    return int(k) % 2


def enumerate_connection_matrices(
    M: MorseDecomposition, *, max_slots: int = MAX_ENUMERATION_SLOTS
) -> list[GradedZ2Map]:
    """Every degree -1 map on M satisfying all three axioms.

    Candidates are subsets of the admissible blocks (target < source, degree
    drop one), visited in binary-counter order over those blocks.
    """
    if M.dim > MAX_ENUMERATION_DIM:
        raise AlgebraError(f"total index dimension {M.dim} exceeds {MAX_ENUMERATION_DIM}")
    basis = M.basis
    slots = [
        (i, j)
        for j, (s, qs) in enumerate(basis)
        for i, (t, qt) in enumerate(basis)
        if qt == qs - 1 and M.poset.lt(t, s)
    ]
    if len(slots) > max_slots:
        raise AlgebraError(f"{len(slots)} admissible entries exceed the search bound {max_slots}")
    out = []
    for bits in itertools.product((0, 1), repeat=len(slots)):
        A = np.zeros((M.dim, M.dim), dtype=np.uint8)
        for (i, j), b in zip(slots, bits):
            A[i, j] = b
        if gf2.matmul(A, A).any():
            continue
        D = GradedZ2Map(-1, M, M, A)
        if validate_connection_matrix(D, M).valid:
            out.append(D)
    return out


# -- transition matrices -----------------------------------------------------


class Entry(enum.Enum):
    ZERO = "0"
    ISO = "iso"
    UNKNOWN = "*"

    @classmethod
    def parse(cls, text: str) -> "Entry":
        t = str(text).strip().lower()
        if t in ("0", "zero"):
            return cls.ZERO
        if t in ("1", "iso"):
            return cls.ISO
        if t in ("*", "?", "unknown"):
            return cls.UNKNOWN
        raise AlgebraError(f"constraint value must be 0, iso or *, got {text!r}")


@dataclass(frozen=True)
class TransitionConstraint:
    """Prescribed entries of T, keyed by (row element, column element, q)."""

    values: Mapping[tuple[str, str, int], Entry] = field(default_factory=dict)

    @classmethod
    def of(cls, items: Mapping | Iterable) -> "TransitionConstraint":
        pairs = items.items() if isinstance(items, Mapping) else items
        vals = {}
        for (t, s, q), v in pairs:
            vals[(str(t), str(s), int(q))] = v if isinstance(v, Entry) else Entry.parse(v)
        return cls(vals)

    @classmethod
    def continued(cls, M0: MorseDecomposition, M1: MorseDecomposition, elements: Iterable[str]):
        """Iso on every nonzero diagonal block of the listed elements."""
        vals = {}
        for p in elements:
            p = str(p)
            for q in range(3):
                if M0.index[p].rank(q) and M1.index[p].rank(q):
                    vals[(p, p, q)] = Entry.ISO
        return cls(vals)

    def fixed(self) -> dict[tuple[str, str, int], int]:
        return {k: int(v is Entry.ISO) for k, v in self.values.items() if v is not Entry.UNKNOWN}


@dataclass
class TransitionSolution:
    D0: GradedZ2Map
    D1: GradedZ2Map
    constraint: TransitionConstraint
    solutions: list[GradedZ2Map]
    forced: dict[tuple[str, str, int], int]
    constrained: dict[tuple[str, str, int], int]
    free: list[tuple[str, str, int]]
    nullity: int
    particular: GradedZ2Map | None = None
    kernel: list[GradedZ2Map] = field(default_factory=list)

    @property
    def M0(self) -> MorseDecomposition:
        return self.D0.source

    @property
    def M1(self) -> MorseDecomposition:
        return self.D1.source

    def pattern_text(self) -> str:
        """Rows of M0, columns of M1; forced entries shown, free ones as '*'."""
        M0, M1 = self.M0, self.M1
        rows, cols = M0.basis, M1.basis
        known = {**self.constrained, **self.forced}
        cells = []
        for r in rows:
            line = []
            for c in cols:
                if r[1] != c[1]:
                    line.append("0")
                    continue
                v = known.get((r[0], c[0], c[1]))
                line.append("*" if v is None else ("iso" if v else "0"))
            cells.append(line)
        return format_table(M0.basis_labels(), M1.basis_labels(), cells)


def solve_transition_matrices(
    D0: GradedZ2Map,
    D1: GradedZ2Map,
    C: TransitionConstraint | None = None,
    *,
    max_solutions: int = MAX_TRANSITION_SOLUTIONS,
) -> TransitionSolution:
    """All degree-0 T (rows M0, columns M1) with D0 T + T D1 = 0 and C.

    An unconstrained entry is forced when it takes one value on the whole
    affine solution set, i.e. it vanishes on every nullspace vector.
    The set is ``particular + span(kernel)``; it is listed in ``solutions``
    unless ``max_solutions`` is 0, and an oversized set raises.
    """
    C = C or TransitionConstraint()
    M0, M1 = D0.source, D1.source
    for D, name in ((D0, "D0"), (D1, "D1")):
        rep = validate_connection_matrix(D)
        if not rep.valid:
            raise AlgebraError(f"{name} is not a connection matrix: {rep.summary()}")
    rows, cols = M0.basis, M1.basis
    unknowns = [(i, j) for i in range(len(rows)) for j in range(len(cols)) if rows[i][1] == cols[j][1]]
    uid = {u: k for k, u in enumerate(unknowns)}
    A0, A1 = D0.matrix.astype(np.int64), D1.matrix.astype(np.int64)

    eqs, rhs = [], []
    for r in range(len(rows)):
        for c in range(len(cols)):
            row = np.zeros(len(unknowns), dtype=np.uint8)
            for k, (i, j) in enumerate(unknowns):
                v = (A0[r, i] if j == c else 0) + (A1[j, c] if i == r else 0)
                row[k] = v % 2
            if row.any():
                eqs.append(row)
                rhs.append(0)

    def key(k):
        i, j = unknowns[k]
        return rows[i][0], cols[j][0], cols[j][1]

    constrained = {}
    for (t, s, q), v in C.fixed().items():
        try:
            i, j = _slot(M0, M1, t, s, q, 0)
        except AlgebraError as exc:
            raise AlgebraError(f"constraint T({t},{s}) at H{q}: {exc}") from None
        row = np.zeros(len(unknowns), dtype=np.uint8)
        row[uid[(i, j)]] = 1
        eqs.append(row)
        rhs.append(v)
        constrained[(t, s, q)] = v

    A = np.array(eqs, dtype=np.uint8).reshape(len(eqs), len(unknowns))
    x0 = gf2.solve(A, np.array(rhs, dtype=np.uint8))
    if x0 is None:
        raise TransitionError("no transition matrix exists")
    N = gf2.nullspace(A) if len(eqs) else np.eye(len(unknowns), dtype=np.uint8)

    forced, free = {}, []
    for k in range(len(unknowns)):
        kk = key(k)
        if kk in constrained:
            continue
        if N.shape[0] == 0 or not N[:, k].any():
            forced[kk] = int(x0[k])
        else:
            free.append(kk)

    def as_map(x):
        T = np.zeros((len(rows), len(cols)), dtype=np.uint8)
        for k, (i, j) in enumerate(unknowns):
            T[i, j] = x[k]
        return GradedZ2Map(0, M1, M0, T)

    solutions = []
    if max_solutions:
        if 2 ** N.shape[0] > max_solutions:
            raise TransitionError(f"solution space of dimension {N.shape[0]} is too large to enumerate")
        for bits in itertools.product((0, 1), repeat=N.shape[0]):
            x = x0.copy()
            for b, v in zip(bits, N):
                if b:
                    x ^= v
            solutions.append(as_map(x))
    return TransitionSolution(D0, D1, C, solutions, forced, constrained, free, int(N.shape[0]),
                              as_map(x0), [as_map(v) for v in N])


def transition_residual(D0: GradedZ2Map, T: GradedZ2Map, D1: GradedZ2Map) -> np.ndarray:
    return gf2.matmul(D0.matrix, T.matrix) ^ gf2.matmul(T.matrix, D1.matrix)


# -- bifurcation inference ---------------------------------------------------


def _fmt_interval(lo: float, hi: float) -> str:
    return f"({lo:g},{hi:g})"


@dataclass(frozen=True)
class HeteroclinicCertificate:
    """A connecting orbit from M(source) to M(target) exists at some theta*."""

    source: str
    target: str
    q: int
    theta_lo: float | None = None
    theta_hi: float | None = None

    def __str__(self):
        s = f"C(M({self.source}),M({self.target})) ≠ ∅"
        if self.theta_lo is not None:
            s += f", θ*∈{_fmt_interval(self.theta_lo, self.theta_hi)}"
        return s

    def to_dict(self) -> dict:
        return {"kind": "heteroclinic", "source": self.source, "target": self.target,
                "q": self.q, "theta_bracket": _bracket(self), "text": str(self)}


@dataclass(frozen=True)
class GeneralizedHomoclinicCertificate:
    """M(element) stops being a Morse set at some theta*: a homoclinic orbit."""

    element: str
    q: int
    theta_lo: float | None = None
    theta_hi: float | None = None

    def __str__(self):
        s = f"homoclinic orbit to M({self.element})"
        if self.theta_lo is not None:
            s += f", θ*∈{_fmt_interval(self.theta_lo, self.theta_hi)}"
        return s

    def to_dict(self) -> dict:
        return {"kind": "homoclinic", "element": self.element, "q": self.q,
                "theta_bracket": _bracket(self), "text": str(self)}


def _bracket(c):
    return None if c.theta_lo is None else [c.theta_lo, c.theta_hi]


def infer_bifurcation(
    sol: TransitionSolution, bracket: tuple[float, float] | None = None
) -> list[HeteroclinicCertificate | GeneralizedHomoclinicCertificate]:
    """Certificates implied by forced entries of T.

    Only Morse sets present in both decompositions count as continued; a
    forced off-diagonal iso involving a set that exists on one side only
    says nothing about a connection between continued sets.
    """
    lo, hi = bracket if bracket is not None else (None, None)
    M0, M1 = sol.M0, sol.M1
    both = [p for p in M0.elements if p in M1.elements]
    certs = []
    for (t, s, q), v in sol.forced.items():
        if t == s:
            if v == 0 and t in both and M0.index[t].rank(q) and M1.index[t].rank(q):
                certs.append(GeneralizedHomoclinicCertificate(t, q, lo, hi))
        elif v == 1 and t in both and s in both:
            certs.append(HeteroclinicCertificate(s, t, q, lo, hi))
    return certs
