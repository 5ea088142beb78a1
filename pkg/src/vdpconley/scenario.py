"""Line-oriented scenario files describing a pair of Morse decompositions.

A scenario names the decomposition before and after a parameter change,
the connection matrix on each side, and the prescribed transition entries::

    [meta]
    name = example
    theta_before = 0.02
    theta_after = 0.04

    [elements before]        # label = description
    1 = sink (-2,0)
    2 = saddle (-0.5,0)

    [order before]           # chains allowed: 1 < 2 < 3
    1 < 2

    [index before]           # sink | saddle | source | stable-cycle | degrees "0,1"
    1 = sink
    2 = saddle

    [connections before]     # target <- source @ source degree (optional if unique)
    1 <- 2 @1

    [intervals before]       # optional prescribed interval indices; "none" = trivial
    {1, 2} = none

    ... the same sections with "after" ...

    [constraints]            # T(row, column) @q = iso | 0 | *
    T(1,1) @0 = iso

Blank lines and text after '#' are ignored.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .conley import (
    AlgebraError,
    Entry,
    GradedZ2Map,
    MorseDecomposition,
    Poset,
    TransitionConstraint,
    TransitionSolution,
    ValidationReport,
    infer_bifurcation,
    is_interval,
    solve_transition_matrices,
    validate_connection_matrix,
)
from .model import GradedZ2Index, conley_index_of


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<scenario>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


SIDES = ("before", "after")
SIDE_SECTIONS = ("elements", "order", "index", "connections", "intervals")

_SECTION = re.compile(r"^\[\s*([a-z]+)(?:\s+([a-z]+))?\s*\]$")
_CONNECTION = re.compile(r"^(\S+)\s*<-\s*(\S+?)\s*(?:@\s*(\d+))?$")
_CONSTRAINT = re.compile(r"^T\(\s*([^,\s)]+)\s*,\s*([^,\s)]+)\s*\)\s*(?:@\s*(\d+))?\s*=\s*(\S+)$")
_INDEX_NAMES = {"stable-cycle": "stable-cycle", "cycle": "stable-cycle", "stable_cycle": "stable-cycle"}


@dataclass
class SideSpec:
    elements: list[tuple[str, str]] = field(default_factory=list)
    order: list[tuple[str, str]] = field(default_factory=list)
    index: dict[str, GradedZ2Index] = field(default_factory=dict)
    connections: list[tuple[str, str, int | None, int]] = field(default_factory=list)
    intervals: list[tuple[frozenset, GradedZ2Index, int]] = field(default_factory=list)


@dataclass
class Scenario:
    name: str
    before: MorseDecomposition
    after: MorseDecomposition
    delta_before: GradedZ2Map
    delta_after: GradedZ2Map
    constraint: TransitionConstraint
    theta_before: float | None = None
    theta_after: float | None = None
    text: str = ""

    @property
    def bracket(self) -> tuple[float, float] | None:
        if self.theta_before is None or self.theta_after is None:
            return None
        return (min(self.theta_before, self.theta_after), max(self.theta_before, self.theta_after))


@dataclass
class ScenarioResult:
    scenario: Scenario
    report_before: ValidationReport
    report_after: ValidationReport
    solution: TransitionSolution | None
    certificates: list

    @property
    def valid(self) -> bool:
        return self.report_before.valid and self.report_after.valid


def _parse_index(text: str) -> GradedZ2Index:
    t = text.strip().lower()
    if t in ("none", "trivial", "{}"):
        return GradedZ2Index()
    t = _INDEX_NAMES.get(t, t)
    if re.fullmatch(r"[{(]?\s*\d(\s*,\s*\d)*\s*[})]?", t):
        return GradedZ2Index.from_degrees(int(c) for c in re.findall(r"\d", t))
    return conley_index_of(t)


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    meta: dict[str, str] = {}
    sides = {s: SideSpec() for s in SIDES}
    constraints: list[tuple[str, str, int | None, str, int]] = []
    section: tuple[str, str | None] | None = None
    seen: set = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            kind, side = m.group(1), m.group(2)
            if kind in ("meta", "constraints"):
                if side is not None:
                    raise ScenarioError(f"section [{kind}] takes no side qualifier", lineno, source)
            elif kind in SIDE_SECTIONS:
                if side not in SIDES:
                    raise ScenarioError(f"section [{kind}] needs 'before' or 'after'", lineno, source)
            else:
                raise ScenarioError(f"unknown section {line}", lineno, source)
            section = (kind, side)
            if section in seen:
                raise ScenarioError(f"duplicate section {line}", lineno, source)
            seen.add(section)
            continue
        if section is None:
            raise ScenarioError("content before the first section header", lineno, source)
        kind, side = section
        try:
            if kind == "meta":
                key, sep, val = line.partition("=")
                if not sep:
                    raise ValueError("expected key = value")
                meta[key.strip()] = val.strip()
            elif kind == "elements":
                label, _, desc = line.partition("=")
                label = label.strip()
                if not label or " " in label:
                    raise ValueError(f"bad element label {label!r}")
                if label in (x for x, _ in sides[side].elements):
                    raise ValueError(f"duplicate element {label!r}")
                sides[side].elements.append((label, desc.strip()))
            elif kind == "order":
                parts = [p.strip() for p in line.split("<")]
                if len(parts) < 2 or not all(parts):
                    raise ValueError("expected a < b [< c ...]")
                sides[side].order.extend((a, b, lineno) for a, b in zip(parts, parts[1:]))
            elif kind == "index":
                label, sep, val = line.partition("=")
                if not sep:
                    raise ValueError("expected element = index")
                sides[side].index[label.strip()] = (_parse_index(val), lineno)
            elif kind == "connections":
                m = _CONNECTION.match(line)
                if not m:
                    raise ValueError("expected 'target <- source [@q]'")
                q = int(m.group(3)) if m.group(3) is not None else None
                sides[side].connections.append((m.group(1), m.group(2), q, lineno))
            elif kind == "intervals":
                left, sep, val = line.partition("=")
                members = [x for x in re.split(r"[\s,{}]+", left) if x]
                if not sep or not members:
                    raise ValueError("expected '{a, b} = index'")
                sides[side].intervals.append((frozenset(members), _parse_index(val), lineno))
            elif kind == "constraints":
                m = _CONSTRAINT.match(line)
                if not m:
                    raise ValueError("expected 'T(row,col) [@q] = iso|0|*'")
                q = int(m.group(3)) if m.group(3) is not None else None
                constraints.append((m.group(1), m.group(2), q, m.group(4), lineno))
        except (ValueError, AlgebraError) as exc:
            raise ScenarioError(str(exc), lineno, source) from None

    decomps, deltas = {}, {}
    for side in SIDES:
        spec = sides[side]
        if not spec.elements:
            raise ScenarioError(f"missing or empty section [elements {side}]", None, source)
        labels = [x for x, _ in spec.elements]
        for a, b, ln in spec.order:
            for x in (a, b):
                if x not in labels:
                    raise ScenarioError(f"order mentions unknown element {x!r}", ln, source)
        for x, (_, ln) in spec.index.items():
            if x not in labels:
                raise ScenarioError(f"index given for unknown element {x!r}", ln, source)
        missing = [x for x in labels if x not in spec.index]
        if missing:
            raise ScenarioError(f"[index {side}] has no entry for {missing}", None, source)
        try:
            poset = Poset.generated_by(labels, [(a, b) for a, b, _ in spec.order])
        except AlgebraError as exc:
            raise ScenarioError(f"[order {side}]: {exc}", None, source) from None
        for I, _, ln in spec.intervals:
            try:
                poset._check_subset(I)
            except AlgebraError as exc:
                raise ScenarioError(str(exc), ln, source) from None
            if len(I) < 2 or not is_interval(poset, I):
                raise ScenarioError(f"{sorted(I)} is not an interval of two or more elements", ln, source)
        M = MorseDecomposition(
            poset, {k: v for k, (v, _) in spec.index.items()}, dict(spec.elements),
            {I: v for I, v, _ in spec.intervals}, name=side,
        )
        entries = []
        for t, s, q, ln in spec.connections:
            for x in (t, s):
                if x not in labels:
                    raise ScenarioError(f"connection mentions unknown element {x!r}", ln, source)
            if q is None:
                opts = [k for k in range(3) if M.index[s].rank(k) and M.index[t].rank(k - 1)]
                if len(opts) != 1:
                    raise ScenarioError(f"degree of {t} <- {s} is ambiguous or impossible; add @q", ln, source)
                q = opts[0]
            entries.append((t, s, q, ln))
        try:
            D = GradedZ2Map.connection(M, [(t, s, q) for t, s, q, _ in entries])
        except AlgebraError as exc:
            raise ScenarioError(f"[connections {side}]: {exc}", None, source) from None
        decomps[side], deltas[side] = M, D

    M0, M1 = decomps["before"], decomps["after"]
    cvals = {}
    for r, c, q, val, ln in constraints:
        if r not in M0.elements:
            raise ScenarioError(f"constraint row {r!r} is not an element before", ln, source)
        if c not in M1.elements:
            raise ScenarioError(f"constraint column {c!r} is not an element after", ln, source)
        if q is None:
            opts = [k for k in range(3) if M0.index[r].rank(k) and M1.index[c].rank(k)]
            if len(opts) != 1:
                raise ScenarioError(f"degree of T({r},{c}) is ambiguous or impossible; add @q", ln, source)
            q = opts[0]
        if not (M0.index[r].rank(q) and M1.index[c].rank(q)):
            raise ScenarioError(f"T({r},{c}) has no block in degree {q}", ln, source)
        try:
            cvals[(r, c, q)] = Entry.parse(val)
        except AlgebraError as exc:
            raise ScenarioError(str(exc), ln, source) from None

    def num(key):
        if key not in meta:
            return None
        try:
            return float(meta[key])
        except ValueError:
            raise ScenarioError(f"meta field {key} is not a number: {meta[key]!r}", None, source) from None

    return Scenario(
        name=meta.get("name", source),
        before=M0,
        after=M1,
        delta_before=deltas["before"],
        delta_after=deltas["after"],
        constraint=TransitionConstraint.of(cvals),
        theta_before=num("theta_before"),
        theta_after=num("theta_after"),
        text=text,
    )


def run_scenario(sc: Scenario) -> ScenarioResult:
    """Validate both connection matrices, solve for T and infer certificates."""
    r0 = validate_connection_matrix(sc.delta_before)
    r1 = validate_connection_matrix(sc.delta_after)
    if not (r0.valid and r1.valid):
        return ScenarioResult(sc, r0, r1, None, [])
    sol = solve_transition_matrices(sc.delta_before, sc.delta_after, sc.constraint)
    return ScenarioResult(sc, r0, r1, sol, infer_bifurcation(sol, sc.bracket))


PRESETS: dict[str, str] = {
    "example4.1": """\
[meta]
name = example4.1
system = d=0.5, e=2
theta_before = 0.02
theta_after = 0.04

[elements before]
1 = sink (-2,0)
pi = stable limit cycle around the origin
2 = saddle (-0.5,0)
3 = source (0,0)

[order before]
1 < 2
pi < 2
pi < 3

[index before]
1 = sink
pi = stable-cycle
2 = saddle
3 = source

[connections before]
1 <- 2 @1
pi <- 2 @1
pi <- 3 @2

[elements after]
1 = sink (-2,0)
2 = saddle (-0.5,0)
3 = source (0,0)

[order after]
1 < 2 < 3

[index after]
1 = sink
2 = saddle
3 = source

[connections after]
2 <- 3 @2     # the two orbits from 2 to 1 cancel mod 2

[constraints]
T(1,1) @0 = iso
T(3,3) @2 = iso
""",
    "example4.2-het1": """\
[meta]
name = example4.2-het1
system = d=-1, e=2
theta_before = -0.2
theta_after = -0.05

[elements before]
1 = sink (0,0)
2 = saddle (1,0)
3 = saddle (-2,0)

[order before]
1 < 2
1 < 3

[index before]
1 = sink
2 = saddle
3 = saddle

[connections before]
1 <- 2 @1
1 <- 3 @1

[elements after]
1 = sink (0,0)
2 = saddle (1,0)
3 = saddle (-2,0)

[order after]
1 < 2

[index after]
1 = sink
2 = saddle
3 = saddle

[connections after]
1 <- 2 @1

[constraints]
T(1,1) @0 = iso
T(2,2) @1 = iso
T(3,3) @1 = iso
""",
    "example4.2-hom": """\
[meta]
name = example4.2-hom
system = d=-1, e=2
theta_before = 0.1
theta_after = 0.2

[elements before]
pi = stable limit cycle around the origin
1 = saddle (1,0)
2 = saddle (-2,0)
3 = source (0,0)

[order before]
pi < 1
pi < 3

[index before]
pi = stable-cycle
1 = saddle
2 = saddle
3 = source

[connections before]
pi <- 1 @1
pi <- 3 @2

[elements after]
1 = saddle (1,0)
2 = saddle (-2,0)
3 = source (0,0)

[order after]
1 < 3

[index after]
1 = saddle
2 = saddle
3 = source

[connections after]
1 <- 3 @2

[constraints]
T(2,2) @1 = iso
T(3,3) @2 = iso
""",
    "example4.2-het2": """\
[meta]
name = example4.2-het2
system = d=-1, e=2
theta_before = 1.1
theta_after = 1.2

[elements before]
1 = saddle (-2,0)
2 = saddle (1,0)
3 = source (0,0)

[order before]
2 < 3

[index before]
1 = saddle
2 = saddle
3 = source

[connections before]
2 <- 3 @2

[elements after]
1 = saddle (-2,0)
2 = saddle (1,0)
3 = source (0,0)

[order after]
1 < 3
2 < 3

[index after]
1 = saddle
2 = saddle
3 = source

[connections after]
1 <- 3 @2
2 <- 3 @2

[constraints]
T(1,1) @1 = iso
T(2,2) @1 = iso
T(3,3) @2 = iso
""",
}


def load_preset(name: str) -> Scenario:
    if name not in PRESETS:
        raise ScenarioError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return parse_scenario(PRESETS[name], source=name)
