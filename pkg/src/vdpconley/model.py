"""Extended modified van der Pol oscillator.

    x' = y
    y' = -(x**2 - theta) * y - x (x + d) (x + e) / (d e)

Equilibria, Jacobians, closed-form spectra and stability classes of the
three equilibria E0 = (0, 0), E1 = (-d, 0), E2 = (-e, 0), the first
Lyapunov coefficient at the Hopf point theta = 0, and the Z2 Conley index
assigned to each hyperbolic class.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np


class ParameterError(ValueError):
    """Raised for parameter triples outside the admissible family."""


class NonHyperbolicError(ValueError):
    """Raised when a Conley index is requested for a non-hyperbolic class."""


@dataclass(frozen=True)
class SystemParams:
    """One instance (d, e, theta) of the vector field, alpha fixed at 1."""

    d: float
    e: float
    theta: float
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("d", "e", "theta", "alpha"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.alpha != 1.0:
            raise ParameterError("unsupported: alpha is fixed at 1")
        if self.d == 0.0:
            raise ParameterError("d must be nonzero (d*e != 0)")
        if self.e == 0.0:
            raise ParameterError("e must be nonzero (d*e != 0)")
        if abs(self.d) > abs(self.e):
            raise ParameterError(f"|d| <= |e| required, got d={self.d}, e={self.e}")
        if self.d == self.e:
            raise ParameterError(f"d != e required, got d = e = {self.d}")

    def with_theta(self, theta: float) -> "SystemParams":
        return SystemParams(self.d, self.e, theta, self.alpha)

    @property
    def box(self) -> tuple[float, float]:
        """Half-widths (x, y) of the escape box used by the integrator."""
        return 10.0 * max(abs(self.d), abs(self.e), 1.0), 100.0


@dataclass(frozen=True)
class State:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"state components must be finite, got ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


def vector_field(p: SystemParams, s: State) -> State:
    x, y = s.x, s.y
    return State(y, -(x * x - p.theta) * y - x * (x + p.d) * (x + p.e) / (p.d * p.e))


def jacobian(p: SystemParams, s: State) -> np.ndarray:
    x, y = s.x, s.y
    d, e = p.d, p.e
    dfy_dx = -2.0 * x * y - ((x + d) * (x + e) + x * (x + e) + x * (x + d)) / (d * e)
    return np.array([[0.0, 1.0], [dfy_dx, p.theta - x * x]])


class Equilibrium(enum.Enum):
    E0 = 0
    E1 = 1
    E2 = 2


def equilibria(p: SystemParams) -> list[State]:
    return [State(0.0, 0.0), State(-p.d, 0.0), State(-p.e, 0.0)]


def equilibrium_state(p: SystemParams, which: Equilibrium | str) -> State:
    return equilibria(p)[_as_equilibrium(which).value]


def _as_equilibrium(which: Equilibrium | str) -> Equilibrium:
    if isinstance(which, Equilibrium):
        return which
    try:
        return Equilibrium[str(which).upper()]
    except KeyError:
        raise ValueError(f"unknown equilibrium {which!r}; expected E0, E1 or E2") from None


class Stability(enum.Enum):
    SINK = "sink"
    SOURCE = "source"
    SADDLE = "saddle"
    WEAK_SINK = "weak-sink"
    DEGENERATE = "degenerate"


class OrbitKind(enum.Enum):
    STABLE_CYCLE = "stable-cycle"


@dataclass(frozen=True)
class StabilityClass:
    kind: Stability
    condition: str | None = None  # only set for DEGENERATE

    def __str__(self):
        if self.condition:
            return f"{self.kind.value} ({self.condition})"
        return self.kind.value


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalue pair; lambda1 has the smaller real part (or is the smaller real root)."""

    lambda1: complex
    lambda2: complex

    @property
    def is_real(self) -> bool:
        return self.lambda1.imag == 0.0 and self.lambda2.imag == 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2])


def _linear_part(p: SystemParams, which: Equilibrium) -> tuple[float, float]:
    """Trace and lower-left Jacobian entry at an equilibrium.

    The Jacobian there is [[0, 1], [c, trace]].
    """
    if which is Equilibrium.E0:
        return p.theta, -1.0
    if which is Equilibrium.E1:
        return p.theta - p.d**2, 1.0 - p.d / p.e
    return p.theta - p.e**2, 1.0 - p.e / p.d


def _quadratic_roots(trace: float, c: float) -> SpectralData:
    # roots of lambda**2 - trace*lambda - c = 0, i.e. (trace +- sqrt(trace**2 + 4c)) / 2
    disc = trace * trace + 4.0 * c
    if disc < 0.0:
        half_im = math.sqrt(-disc) / 2.0
        return SpectralData(complex(trace / 2.0, -half_im), complex(trace / 2.0, half_im))
    if disc == 0.0:
        lam = complex(trace / 2.0)
        return SpectralData(lam, lam)
    root = math.sqrt(disc)
    # larger-magnitude root first, the other from the product -c (no cancellation)
    big = (trace + math.copysign(root, trace)) / 2.0
    other = -c / big
    lo, hi = sorted((big, other))
    return SpectralData(complex(lo), complex(hi))


def spectrum(p: SystemParams, which: Equilibrium | str) -> SpectralData:
    return _quadratic_roots(*_linear_part(p, _as_equilibrium(which)))


def classify(p: SystemParams, which: Equilibrium | str) -> tuple[SpectralData, StabilityClass]:
    """Closed-form eigenvalues and stability class of one equilibrium."""
    which = _as_equilibrium(which)
    spec = spectrum(p, which)
    theta = p.theta
    if which is Equilibrium.E0:
        if theta > 0:
            kind = StabilityClass(Stability.SOURCE)
        elif theta < 0:
            kind = StabilityClass(Stability.SINK)
        else:
            kind = StabilityClass(Stability.WEAK_SINK)
    elif which is Equilibrium.E1:
        # det J(E1) < 0 always; theta = d^2 is kept as the excluded case of the rule table
        if theta == p.d**2:
            kind = StabilityClass(Stability.DEGENERATE, "theta = d^2")
        else:
            kind = StabilityClass(Stability.SADDLE)
    else:
        if (p.d > 0) != (p.e > 0):
            kind = StabilityClass(Stability.SADDLE)
        elif theta < p.e**2:
            kind = StabilityClass(Stability.SINK)
        elif theta > p.e**2:
            kind = StabilityClass(Stability.SOURCE)
        else:
            kind = StabilityClass(Stability.DEGENERATE, "theta = e^2")
    return spec, kind


@dataclass(frozen=True)
class NormalFormCoefficients:
    """Taylor coefficients of x' = y + sum mu[i,j] x^i y^j, y' = -x + sum nu[i,j] x^i y^j."""

    mu: Mapping[tuple[int, int], float]
    nu: Mapping[tuple[int, int], float]


_NORMAL_FORM_TERMS = [(2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]


def normal_form_coefficients(p: SystemParams) -> NormalFormCoefficients:
    if p.theta != 0.0:
        raise ValueError(
            f"normal form requires theta = 0 (linear part [[0, 1], [-1, 0]]), got theta={p.theta}"
        )
    de = p.d * p.e
    mu = {ij: 0.0 for ij in _NORMAL_FORM_TERMS}
    nu = {ij: 0.0 for ij in _NORMAL_FORM_TERMS}
    # -x(x+d)(x+e)/(de) = -x - (d+e)/(de) x^2 - x^3/(de);  -(x^2) y
    nu[(2, 0)] = -(p.d + p.e) / de
    nu[(3, 0)] = -1.0 / de
    nu[(2, 1)] = -1.0
    return NormalFormCoefficients(mu, nu)


def lyapunov_value(c: NormalFormCoefficients) -> float:
    mu, nu = c.mu, c.nu
    return (
        3 * mu[3, 0] + mu[1, 2] + nu[2, 1] + 3 * nu[0, 3]
        - mu[2, 0] * mu[1, 1] + nu[1, 1] * nu[0, 2]
        - 2 * mu[0, 2] * nu[0, 2] - mu[0, 2] * mu[1, 1]
        + 2 * mu[2, 0] * nu[2, 0] + nu[1, 1] * nu[2, 0]
    )


def lyapunov_coefficient(p: SystemParams) -> tuple[NormalFormCoefficients, float]:
    """Normal-form coefficients at theta = 0 and the Lyapunov coefficient L.

    L < 0 makes E0 a weak sink and the Hopf bifurcation supercritical.
    """
    coeffs = normal_form_coefficients(p)
    return coeffs, lyapunov_value(coeffs)


@dataclass(frozen=True)
class GradedZ2Index:
    """Ranks of a graded Z2 vector space in homology degrees 0, 1, 2."""

    ranks: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        if len(ranks) != 3 or any(r < 0 for r in ranks):
            raise ValueError(f"expected three non-negative ranks, got {self.ranks!r}")
        object.__setattr__(self, "ranks", ranks)

    @classmethod
    def from_degrees(cls, degrees: Iterable[int]) -> "GradedZ2Index":
        ranks = [0, 0, 0]
        for q in degrees:
            if q not in (0, 1, 2):
                raise ValueError(f"homology degree must be 0, 1 or 2, got {q}")
            ranks[q] += 1
        return cls(tuple(ranks))

    @classmethod
    def from_mapping(cls, ranks: Mapping[int, int]) -> "GradedZ2Index":
        bad = set(ranks) - {0, 1, 2}
        if bad:
            raise ValueError(f"homology degrees must be 0..2, got {sorted(bad)}")
        return cls(tuple(ranks.get(q, 0) for q in range(3)))

    def rank(self, q: int) -> int:
        return self.ranks[q] if 0 <= q <= 2 else 0

    @property
    def degrees(self) -> list[int]:
        return [q for q in range(3) for _ in range(self.ranks[q])]

    def as_dict(self) -> dict[int, int]:
        return {q: r for q, r in enumerate(self.ranks) if r}

    def __str__(self):
        parts = [f"H{q}={r}" for q, r in enumerate(self.ranks) if r]
        return "{" + ", ".join(parts) + "}" if parts else "{0}"


_TABLE_INDEX = {
    Stability.SINK: GradedZ2Index((1, 0, 0)),
    Stability.SADDLE: GradedZ2Index((0, 1, 0)),
    Stability.SOURCE: GradedZ2Index((0, 0, 1)),
    OrbitKind.STABLE_CYCLE: GradedZ2Index((1, 1, 0)),
}


def conley_index_of(kind: Stability | StabilityClass | OrbitKind | str) -> GradedZ2Index:
    """Conley index of a hyperbolic planar Morse set from its stability type."""
    if isinstance(kind, StabilityClass):
        kind = kind.kind
    if isinstance(kind, str):
        try:
            kind = Stability(kind)
        except ValueError:
            try:
                kind = OrbitKind(kind)
            except ValueError:
                raise ValueError(f"unknown Morse set kind {kind!r}") from None
    if kind in (Stability.WEAK_SINK, Stability.DEGENERATE):
        raise NonHyperbolicError("non-hyperbolic: Conley index by continuation not assigned")
    return _TABLE_INDEX[kind]


@dataclass(frozen=True)
class EquilibriumReport:
    name: str
    state: State
    spectrum: SpectralData
    stability: StabilityClass
    index: GradedZ2Index | None = field(default=None)


def equilibrium_reports(p: SystemParams) -> list[EquilibriumReport]:
    reports = []
    for which, state in zip(Equilibrium, equilibria(p)):
        spec, cls = classify(p, which)
        try:
            index = conley_index_of(cls)
        except NonHyperbolicError:
            index = None
        reports.append(EquilibriumReport(which.name, state, spec, cls, index))
    return reports


def unit_eigenvector(p: SystemParams, which: Equilibrium | str, unstable: bool) -> np.ndarray:
    """Unit eigenvector (1, lambda)/|.| with positive x-component for a real eigenvalue."""
    spec = spectrum(p, which)
    lam = spec.lambda2 if unstable else spec.lambda1
    if lam.imag != 0.0:
        raise ValueError("eigenvector requested for a complex eigenvalue")
    v = np.array([1.0, lam.real])
    return v / np.hypot(*v)


def trace_at(p: SystemParams, s: State) -> float:
    """Divergence of the field, theta - x**2."""
    return p.theta - s.x * s.x

