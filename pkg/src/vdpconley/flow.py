"""Invariant-manifold shooting, limit cycles and saddle-connection brackets.

Saddle connections are located by a signed gap measured on a Poincare
section and bisected in theta:

* homoclinic at a saddle S: the unstable and stable branches of S that
  point toward the origin are shot to the half line {y = 0} on the far side
  of the origin.  gap = r_stable - r_unstable with r = |x| at the first
  crossing, so gap > 0 while the unstable branch passes inside the loop.
* heteroclinic between the two saddles through the upper (lower) half
  plane: the source saddle's unstable branch and the target saddle's stable
  branch are shot to the vertical line midway between the saddles.
  gap = y_unstable - y_stable, positive when the unstable branch passes
  above.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .integrate import Crossing, IntegrationError, Section, Trajectory, integrate, make_rhs
from .model import (
    Equilibrium,
    Stability,
    State,
    SystemParams,
    classify,
    equilibria,
    equilibrium_state,
    unit_eigenvector,
)

SEED_OFFSET_MIN, SEED_OFFSET_MAX = 1e-7, 1e-4
DEFAULT_SEED_OFFSET = 1e-6
DEFAULT_TOL = 1e-9


class NoCrossingError(RuntimeError):
    """A manifold branch never reached its section within the budget."""


def _side(side: int | str) -> int:
    if side in (1, "plus", "+"):
        return 1
    if side in (-1, "minus", "-"):
        return -1
    raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")


def _require_saddle(p: SystemParams, which: Equilibrium | str) -> State:
    _, cls = classify(p, which)
    if cls.kind is not Stability.SADDLE:
        raise ValueError(f"{which} is {cls} at theta={p.theta}, not a saddle")
    return equilibrium_state(p, which)


@dataclass
class ManifoldBranch:
    saddle: State
    which: str
    kind: str  # "unstable" | "stable"
    side: int  # +1: seed along +v (positive x-component), -1: along -v
    seed_offset: float
    seed: State
    path: Trajectory

    @property
    def branch_id(self) -> str:
        return f"{self.which}-{self.kind}-{'plus' if self.side > 0 else 'minus'}"


def manifold_branch(
    p: SystemParams,
    which_saddle: Equilibrium | str,
    kind: str,
    side: int | str,
    seed_offset: float = DEFAULT_SEED_OFFSET,
    *,
    t_max: float = 200.0,
    tol: float = DEFAULT_TOL,
    section: Section | None = None,
    stop_after: int | None = 1,
) -> ManifoldBranch:
    """Shoot one branch of a saddle's unstable (forward) or stable (backward) manifold."""
    if kind not in ("unstable", "stable"):
        raise ValueError(f"kind must be 'unstable' or 'stable', got {kind!r}")
    if not SEED_OFFSET_MIN <= seed_offset <= SEED_OFFSET_MAX:
        raise ValueError(
            f"seed_offset must lie in [{SEED_OFFSET_MIN:g}, {SEED_OFFSET_MAX:g}], got {seed_offset}"
        )
    saddle = _require_saddle(p, which_saddle)
    sgn = _side(side)
    v = unit_eigenvector(p, which_saddle, unstable=(kind == "unstable"))
    seed = State(saddle.x + sgn * seed_offset * v[0], saddle.y + sgn * seed_offset * v[1])
    t_end = t_max if kind == "unstable" else -t_max
    path = integrate(
        p, seed, t_end, tol, section=section, stop_after=stop_after if section else None
    )
    name = which_saddle.name if isinstance(which_saddle, Equilibrium) else str(which_saddle).upper()
    return ManifoldBranch(saddle, name, kind, sgn, seed_offset, seed, path)


class GapKind(str, enum.Enum):
    HOMOCLINIC = "homoclinic"
    HETEROCLINIC_UPPER = "heteroclinic-upper"
    HETEROCLINIC_LOWER = "heteroclinic-lower"
    HOPF = "hopf"


@dataclass(frozen=True)
class GapSpec:
    """Which connection a gap measures.

    For homoclinic gaps only ``saddle`` matters; for heteroclinic gaps the
    source is the saddle whose unstable branch is shot.  Sides default to
    the geometry described in the module docstring.
    """

    kind: GapKind
    saddle: str = "E1"
    source: str | None = None
    target: str | None = None
    unstable_side: int | None = None
    stable_side: int | None = None

    @classmethod
    def parse(cls, name: str | GapKind, **kw) -> "GapSpec":
        return cls(GapKind(name), **kw)

    @property
    def half_plane(self) -> str | None:
        if self.kind is GapKind.HETEROCLINIC_UPPER:
            return "upper"
        if self.kind is GapKind.HETEROCLINIC_LOWER:
            return "lower"
        return None


@dataclass
class ConnectionGap:
    value: float
    spec: GapSpec
    theta: float
    section: Section
    unstable_hit: Crossing
    stable_hit: Crossing
    source: str
    target: str


def _first_hit(branch: ManifoldBranch) -> Crossing:
    if not branch.path.crossings:
        raise NoCrossingError(
            f"no crossing: {branch.branch_id} ended with status {branch.path.status!r} "
            f"at ({branch.path.final.x:.6g}, {branch.path.final.y:.6g})"
        )
    return branch.path.crossings[0]


def _heteroclinic_roles(p: SystemParams, spec: GapSpec) -> tuple[str, str]:
    if spec.source and spec.target:
        return spec.source.upper(), spec.target.upper()
    a, b = "E1", "E2"
    xa, xb = equilibrium_state(p, a).x, equilibrium_state(p, b).x
    left, right = (a, b) if xa < xb else (b, a)
    # upper half plane flows rightward, lower half plane leftward
    return (left, right) if spec.kind is GapKind.HETEROCLINIC_UPPER else (right, left)


def connection_gap(
    p: SystemParams,
    spec: GapSpec | str,
    *,
    seed_offset: float = DEFAULT_SEED_OFFSET,
    tol: float = DEFAULT_TOL,
    t_max: float = 200.0,
) -> ConnectionGap:
    """Signed splitting of the two manifold branches that form the connection."""
    if not isinstance(spec, GapSpec):
        spec = GapSpec.parse(spec)
    if spec.kind is GapKind.HOPF:
        raise ValueError("hopf is not a saddle connection; use hopf_indicator")

    if spec.kind is GapKind.HOMOCLINIC:
        src = tgt = spec.saddle.upper()
        saddle = _require_saddle(p, src)
        if saddle.x == 0.0:
            raise ValueError("homoclinic gap needs a saddle off the origin")
        toward_origin = 1 if saddle.x < 0 else -1
        side_u = spec.unstable_side or toward_origin
        side_s = spec.stable_side or toward_origin
        if saddle.x < 0:
            section = Section("y", 0.0, lo=0.0)
        else:
            section = Section("y", 0.0, hi=0.0)
    else:
        src, tgt = _heteroclinic_roles(p, spec)
        s_src, s_tgt = _require_saddle(p, src), _require_saddle(p, tgt)
        side_u = spec.unstable_side or (1 if s_tgt.x > s_src.x else -1)
        side_s = spec.stable_side or (1 if s_src.x > s_tgt.x else -1)
        x_mid = 0.5 * (s_src.x + s_tgt.x)
        if spec.kind is GapKind.HETEROCLINIC_UPPER:
            section = Section("x", x_mid, lo=0.0)
        else:
            section = Section("x", x_mid, hi=0.0)

    kw = dict(seed_offset=seed_offset, t_max=t_max, tol=tol, section=section)
    unstable = manifold_branch(p, src, "unstable", side_u, **kw)
    stable = manifold_branch(p, tgt, "stable", side_s, **kw)
    hit_u, hit_s = _first_hit(unstable), _first_hit(stable)
    if spec.kind is GapKind.HOMOCLINIC:
        value = abs(hit_s.x) - abs(hit_u.x)
    else:
        value = hit_u.y - hit_s.y
    return ConnectionGap(value, spec, p.theta, section, hit_u, hit_s, src, tgt)


def hopf_indicator(p: SystemParams) -> float:
    """Real part of the E0 eigenvalues; changes sign at the Hopf point."""
    spec, _ = classify(p, Equilibrium.E0)
    return spec.lambda2.real


def gap_value(p: SystemParams, spec: GapSpec, **kw) -> float:
    if spec.kind is GapKind.HOPF:
        return hopf_indicator(p)
    return connection_gap(p, spec, **kw).value


@dataclass
class BifurcationBracket:
    theta_lo: float
    theta_hi: float
    gap_lo: float
    gap_hi: float
    refined_theta: float
    kind: GapSpec
    d: float
    e: float
    evaluations: int = 0
    initial: tuple[float, float] = (math.nan, math.nan)

    @property
    def width(self) -> float:
        return self.theta_hi - self.theta_lo

    @property
    def continuous(self) -> bool:
        """False when the sign change looks like a jump rather than a root."""
        lo0, hi0 = self.initial
        if not (math.isfinite(lo0) and math.isfinite(hi0)) or hi0 == lo0:
            return True
        return abs(self.gap_hi - self.gap_lo) <= 0.25 * abs(hi0 - lo0)


def bisect_bifurcation(
    d: float,
    e: float,
    theta_lo: float,
    theta_hi: float,
    kind: GapSpec | str,
    tol_theta: float = 1e-4,
    *,
    seed_offset: float = DEFAULT_SEED_OFFSET,
    tol: float = DEFAULT_TOL,
    gap_lo: float | None = None,
    gap_hi: float | None = None,
) -> BifurcationBracket:
    """Bisect a sign change of the gap in theta down to width <= tol_theta.

    ``refined_theta`` is the secant root inside the final bracket.  A gap
    that is exactly zero at an evaluated point is returned as a zero-width
    bracket at that point.
    """
    spec = kind if isinstance(kind, GapSpec) else GapSpec.parse(kind)
    if not theta_lo < theta_hi:
        raise ValueError(f"need theta_lo < theta_hi, got ({theta_lo}, {theta_hi})")
    if tol_theta <= 0:
        raise ValueError("tol_theta must be positive")
    base = SystemParams(d, e, theta_lo)
    kw = {} if spec.kind is GapKind.HOPF else dict(seed_offset=seed_offset, tol=tol)

    def gap(theta):
        return gap_value(base.with_theta(theta), spec, **kw)

    evaluations = 0
    if gap_lo is None:
        gap_lo = gap(theta_lo)
        evaluations += 1
    if gap_hi is None:
        gap_hi = gap(theta_hi)
        evaluations += 1
    initial = (gap_lo, gap_hi)

    def result(lo, hi, glo, ghi, root):
        return BifurcationBracket(lo, hi, glo, ghi, root, spec, d, e, evaluations, initial)

    if gap_lo == 0.0:
        return result(theta_lo, theta_lo, gap_lo, gap_lo, theta_lo)
    if gap_hi == 0.0:
        return result(theta_hi, theta_hi, gap_hi, gap_hi, theta_hi)
    if (gap_lo > 0) == (gap_hi > 0):
        raise ValueError(
            f"invalid bracket: gap has the same sign at theta={theta_lo} ({gap_lo:.3g}) "
            f"and theta={theta_hi} ({gap_hi:.3g})"
        )
    lo, hi, glo, ghi = theta_lo, theta_hi, gap_lo, gap_hi
    while hi - lo > tol_theta:
        mid = 0.5 * (lo + hi)
        gm = gap(mid)
        evaluations += 1
        if gm == 0.0:
            return result(mid, mid, gm, gm, mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    root = lo - glo * (hi - lo) / (ghi - glo)
    return result(lo, hi, glo, ghi, min(max(root, lo), hi))


@dataclass
class ScanPoint:
    theta: float
    gap: float | None
    error: str | None = None


def _scan_one(args) -> ScanPoint:
    d, e, theta, spec, kw = args
    try:
        return ScanPoint(theta, gap_value(SystemParams(d, e, theta), spec, **kw))
    except (NoCrossingError, IntegrationError, ValueError) as exc:
        return ScanPoint(theta, None, str(exc))


def theta_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not lo < hi:
        raise ValueError(f"need lo < hi, got {lo}:{hi}")
    if step <= 0:
        raise ValueError("step must be positive")
    n = max(1, int(round((hi - lo) / step)))
    return np.linspace(lo, hi, n + 1)


def scan_gap(
    d: float,
    e: float,
    thetas: Sequence[float],
    kind: GapSpec | str,
    *,
    seed_offset: float = DEFAULT_SEED_OFFSET,
    tol: float = DEFAULT_TOL,
    jobs: int = 1,
) -> list[ScanPoint]:
    """Evaluate the gap on a theta grid; failed points carry the error text."""
    spec = kind if isinstance(kind, GapSpec) else GapSpec.parse(kind)
    kw = {} if spec.kind is GapKind.HOPF else dict(seed_offset=seed_offset, tol=tol)
    tasks = [(d, e, float(t), spec, kw) for t in thetas]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_scan_one, tasks))
    return [_scan_one(t) for t in tasks]


@dataclass
class DetectionResult:
    brackets: list[BifurcationBracket]
    scan: list[ScanPoint]
    rejected: list[BifurcationBracket] = field(default_factory=list)


def detect_brackets(
    d: float,
    e: float,
    theta_lo: float,
    theta_hi: float,
    step: float,
    kind: GapSpec | str,
    tol_theta: float = 1e-4,
    *,
    seed_offset: float = DEFAULT_SEED_OFFSET,
    tol: float = DEFAULT_TOL,
    jobs: int = 1,
) -> DetectionResult:
    """Scan a theta range for gap sign changes and bisect each one.

    Sign changes between adjacent successful grid points are bisected;
    those whose gap does not shrink under bisection (jumps between
    different section crossings) go to ``rejected``.
    """
    spec = kind if isinstance(kind, GapSpec) else GapSpec.parse(kind)
    scan = scan_gap(
        d, e, theta_grid(theta_lo, theta_hi, step), spec,
        seed_offset=seed_offset, tol=tol, jobs=jobs,
    )
    found, rejected = [], []
    for k, (a, b) in enumerate(zip(scan, scan[1:])):
        if a.gap is None or b.gap is None:
            continue
        if a.gap == 0.0 or (a.gap > 0) != (b.gap > 0):
            if b.gap == 0.0 and a.gap != 0.0 and k + 2 < len(scan):
                continue  # counted from the next pair
            try:
                br = bisect_bifurcation(
                    d, e, a.theta, b.theta, spec, tol_theta,
                    seed_offset=seed_offset, tol=tol, gap_lo=a.gap, gap_hi=b.gap,
                )
            except (NoCrossingError, IntegrationError, ValueError):
                continue
            (found if br.continuous else rejected).append(br)
    return DetectionResult(found, scan, rejected)


@dataclass
class LimitCycle:
    section_point: State  # on {y = 0, x > 0}
    period: float
    orbit: Trajectory
    left_point: State  # opposite crossing of y = 0
    multiplier: float  # derivative of the return map at section_point

    @property
    def amplitude(self) -> float:
        """Half the x-extent of the orbit."""
        return 0.5 * (self.section_point.x - self.left_point.x)

    @property
    def stable(self) -> bool:
        return abs(self.multiplier) < 1.0


RETURN_SECTION = Section("y", 0.0, lo=0.0, direction=-1)


def return_map(
    p: SystemParams, x: float, tol: float = DEFAULT_TOL, t_max: float = 100.0
) -> tuple[float, float] | None:
    """First return (x', time) to {y = 0, x > 0} from (x, 0), or None."""
    traj = integrate(p, (x, 0.0), t_max, tol, section=RETURN_SECTION, stop_after=1)
    if traj.status != "section":
        return None
    hit = traj.crossings[0]
    return hit.x, hit.t


@dataclass
class CycleSearch:
    cycle: LimitCycle | None
    diagnostic: str
    evaluations: int


def find_limit_cycle(
    p: SystemParams,
    *,
    x_start: float = 0.01,
    tol: float = DEFAULT_TOL,
    expand: float = 1.25,
    max_iter: int = 200,
    max_damping: int = 12,
    xtol: float = 1e-12,
) -> CycleSearch:
    """Search the return map on {y = 0, x > 0} for a fixed point.

    Starting at ``x_start`` the search moves outward while orbits expand
    (return displacement > 0) and inward while they contract, damping the
    step by halves when an orbit fails to return.  A sign change of the
    displacement brackets the cycle, which is then polished by Brent's
    safeguarded secant iteration.
    """
    _, cls = classify(p, Equilibrium.E0)
    if cls.kind is not Stability.SOURCE:
        raise ValueError(f"E0 must be a source to search for the Hopf cycle, got {cls}")
    evaluations = 0

    def disp(x):
        nonlocal evaluations
        evaluations += 1
        r = return_map(p, x, tol)
        return None if r is None else r[0] - x

    x0, g0 = x_start, disp(x_start)
    if g0 is None:
        return CycleSearch(None, f"orbit from x={x_start} does not return", evaluations)
    bracket = None
    for _ in range(max_iter):
        if g0 == 0.0:
            bracket = (x0, x0)
            break
        target = x0 * expand if g0 > 0 else x0 / expand
        x1, g1 = target, disp(target)
        damping = 0
        while g1 is None and damping < max_damping:
            x1 = x0 + 0.5 * (x1 - x0)
            g1 = disp(x1)
            damping += 1
        if g1 is None:
            return CycleSearch(
                None, f"no cycle: orbits beyond x={x0:.6g} do not return", evaluations
            )
        if (g1 > 0) != (g0 > 0) or g1 == 0.0:
            bracket = (min(x0, x1), max(x0, x1))
            break
        x0, g0 = x1, g1
        if x0 < 1e-8:
            return CycleSearch(None, "no cycle: orbits contract onto the origin", evaluations)
    if bracket is None:
        return CycleSearch(None, f"no sign change after {max_iter} steps", evaluations)

    a, b = bracket
    if a == b:
        x_star = a
    else:
        def f(x):
            g = disp(x)
            if g is None:
                raise NoCrossingError(f"orbit from x={x} does not return inside the bracket")
            return g

        try:
            x_star = brentq(f, a, b, xtol=xtol, rtol=1e-14)
        except NoCrossingError as exc:
            return CycleSearch(None, str(exc), evaluations)

    orbit = integrate(p, (x_star, 0.0), 100.0, tol, section=Section("y", 0.0), stop_after=2)
    if orbit.status != "section" or len(orbit.crossings) < 2:
        return CycleSearch(None, "cycle orbit failed to close", evaluations)
    left, back = orbit.crossings
    h = max(1e-6, 1e-4 * x_star)
    gp, gm = disp(x_star + h), disp(x_star - h)
    multiplier = math.nan if gp is None or gm is None else 1.0 + (gp - gm) / (2 * h)
    cycle = LimitCycle(State(x_star, 0.0), back.t, orbit, State(left.x, left.y), multiplier)
    return CycleSearch(cycle, "converged", evaluations)


def detect_limit_cycle(p: SystemParams, **kw) -> LimitCycle | None:
    """Stable limit cycle around the origin, or None when there is none."""
    return find_limit_cycle(p, **kw).cycle


class OmegaKind(str, enum.Enum):
    EQUILIBRIUM = "equilibrium"
    CYCLE = "cycle"
    ESCAPED = "escaped"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class OmegaLimit:
    kind: OmegaKind
    equilibrium: State | None = None
    section_x: float | None = None  # estimated cycle crossing of {y = 0, x > 0}

    def __str__(self):
        if self.kind is OmegaKind.EQUILIBRIUM:
            return f"equilibrium ({self.equilibrium.x:g}, {self.equilibrium.y:g})"
        if self.kind is OmegaKind.CYCLE:
            return f"cycle (crossing x={self.section_x:.6g})"
        return self.kind.value


def _hermite_crossings(traj: Trajectory, rhs: Callable) -> list[float]:
    """x at downward crossings of {y = 0, x > 0}, by cubic Hermite interpolation."""
    t, x, y = traj.t, traj.x, traj.y
    out = []
    idx = np.nonzero((y[:-1] > 0) & (y[1:] <= 0))[0]
    for i in idx:
        h = t[i + 1] - t[i]
        f0, f1 = rhs(x[i], y[i]), rhs(x[i + 1], y[i + 1])

        def herm(s, p0, p1, m0, m1):
            s2, s3 = s * s, s * s * s
            return ((2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0
                    + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * h * m1)

        s = brentq(lambda s: herm(s, y[i], y[i + 1], f0[1], f1[1]), 0.0, 1.0)
        xc = herm(s, x[i], x[i + 1], f0[0], f1[0])
        if xc > 0:
            out.append(float(xc))
    return out


def omega_limit_estimate(
    traj: Trajectory,
    *,
    eq_tol: float = 1e-6,
    tail_fraction: float = 0.1,
    min_crossings: int = 4,
) -> OmegaLimit:
    """Classify the tail of a forward trajectory.

    Equilibrium: every sample in the last ``tail_fraction`` of the time span
    lies within ``eq_tol`` of one equilibrium.  Cycle: the downward crossings
    of {y = 0, x > 0} in the second half recur with non-increasing return
    distances and their Aitken limit is not an equilibrium.
    """
    if traj.direction != "forward":
        raise ValueError("omega limits are estimated from forward trajectories")
    if traj.status == "escaped":
        return OmegaLimit(OmegaKind.ESCAPED)
    p = traj.params
    if p is None or len(traj) < 2:
        return OmegaLimit(OmegaKind.UNDETERMINED)
    t = traj.t
    tail = t >= t[0] + (1.0 - tail_fraction) * (t[-1] - t[0])
    tail_states = traj.states[tail]
    for eq in equilibria(p):
        dist = np.hypot(tail_states[:, 0] - eq.x, tail_states[:, 1] - eq.y)
        if np.all(dist <= eq_tol):
            return OmegaLimit(OmegaKind.EQUILIBRIUM, eq)

    half = t >= t[0] + 0.5 * (t[-1] - t[0])
    second = Trajectory(t[half], traj.states[half], "forward", traj.status, p)
    xs = _hermite_crossings(second, make_rhs(p))
    if len(xs) < min_crossings:
        return OmegaLimit(OmegaKind.UNDETERMINED)
    steps = np.abs(np.diff(xs))
    scale = max(1.0, max(abs(v) for v in xs))
    noise = 1e3 * traj.tol * scale
    if not np.all(steps[1:] <= steps[:-1] + noise):
        return OmegaLimit(OmegaKind.UNDETERMINED)
    d1, d2 = xs[-2] - xs[-3], xs[-1] - xs[-2]
    if abs(d2 - d1) > noise:
        limit = xs[-1] - d2 * d2 / (d2 - d1)
    else:
        limit = xs[-1]
    if min(math.hypot(limit - eq.x, eq.y) for eq in equilibria(p)) < 1e-3 * scale:
        return OmegaLimit(OmegaKind.UNDETERMINED)
    return OmegaLimit(OmegaKind.CYCLE, section_x=float(limit))
