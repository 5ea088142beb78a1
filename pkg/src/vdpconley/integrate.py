"""Adaptive Dormand-Prince 5(4) integration of the planar field.

The scheme propagates the 5th-order solution (local extrapolation) and
controls the step with a PI controller on the max-norm of the embedded
error estimate, so each accepted step has estimated local error <= tol.
Section crossings and requested output times are located by re-stepping
from the start of the accepted step, which keeps them at integrator
accuracy without a dense-output interpolant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .model import State, SystemParams

# Dormand & Prince (1980) tableau; the field is autonomous so the nodes are not needed
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)

SAFETY = 0.9
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA
FAC_MIN, FAC_MAX = 0.2, 10.0


class IntegrationError(RuntimeError):
    """Step-size underflow; carries the trajectory computed so far."""

    def __init__(self, message: str, partial: "Trajectory"):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class Section:
    """The line {coord = value}, restricted to lo < other coord < hi.

    ``direction`` selects crossings where coord - value increases (+1),
    decreases (-1) along the direction of integration, or either (0).
    """

    coord: str
    value: float
    lo: float = -math.inf
    hi: float = math.inf
    direction: int = 0

    def __post_init__(self):
        if self.coord not in ("x", "y"):
            raise ValueError(f"section coordinate must be 'x' or 'y', got {self.coord!r}")
        if self.direction not in (-1, 0, 1):
            raise ValueError("direction must be -1, 0 or 1")

    def g(self, x: float, y: float) -> float:
        return (x if self.coord == "x" else y) - self.value

    def other(self, x: float, y: float) -> float:
        return y if self.coord == "x" else x

    def brackets(self, g0: float, g1: float) -> bool:
        if g0 == 0.0:
            return False
        if self.direction >= 0 and g0 < 0.0 <= g1:
            return True
        if self.direction <= 0 and g0 > 0.0 >= g1:
            return True
        return False


@dataclass(frozen=True)
class Crossing:
    t: float
    x: float
    y: float


@dataclass
class Trajectory:
    """Samples (t, x, y) of one orbit segment.

    ``status`` is one of "completed", "escaped", "section", "budget".
    """

    t: np.ndarray
    states: np.ndarray
    direction: str
    status: str = "completed"
    params: SystemParams | None = None
    crossings: list[Crossing] = field(default_factory=list)
    tol: float = 1e-9

    def __len__(self):
        return len(self.t)

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 1]

    def state(self, i: int) -> State:
        return State(float(self.states[i, 0]), float(self.states[i, 1]))

    @property
    def final(self) -> State:
        return self.state(-1)

    @property
    def escaped(self) -> bool:
        return self.status == "escaped"


def make_rhs(p: SystemParams) -> Callable[[float, float], tuple[float, float]]:
    theta = p.theta
    d, e = p.d, p.e
    inv_de = 1.0 / (d * e)

    def rhs(x: float, y: float) -> tuple[float, float]:
        return y, -(x * x - theta) * y - x * (x + d) * (x + e) * inv_de

    return rhs


def _dp_step(rhs, x, y, k1x, k1y, h):
    """One Dormand-Prince step. Returns (x5, y5, err_x, err_y, k7x, k7y)."""
    k2x, k2y = rhs(x + h * A21 * k1x, y + h * A21 * k1y)
    k3x, k3y = rhs(x + h * (A31 * k1x + A32 * k2x), y + h * (A31 * k1y + A32 * k2y))
    k4x, k4y = rhs(
        x + h * (A41 * k1x + A42 * k2x + A43 * k3x),
        y + h * (A41 * k1y + A42 * k2y + A43 * k3y),
    )
    k5x, k5y = rhs(
        x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
        y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
    )
    k6x, k6y = rhs(
        x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
        y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
    )
    xn = x + h * (B1 * k1x + B3 * k3x + B4 * k4x + B5 * k5x + B6 * k6x)
    yn = y + h * (B1 * k1y + B3 * k3y + B4 * k4y + B5 * k5y + B6 * k6y)
    k7x, k7y = rhs(xn, yn)
    ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
    ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
    return xn, yn, ex, ey, k7x, k7y


def _initial_step(rhs, x, y, fx, fy, t_span, tol):
    # Hairer-Wanner starting-step heuristic, max-norm, absolute tolerance
    d0 = max(abs(x), abs(y)) / tol
    d1 = max(abs(fx), abs(fy)) / tol
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, abs(t_span))
    x1, y1 = x + h0 * fx * math.copysign(1, t_span), y + h0 * fy * math.copysign(1, t_span)
    f1x, f1y = rhs(x1, y1)
    d2 = max(abs(f1x - fx), abs(f1y - fy)) / tol / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, abs(t_span))


def integrate(
    p: SystemParams,
    s0: State | Sequence[float],
    t_end: float,
    tol: float = 1e-9,
    *,
    section: Section | None = None,
    stop_after: int | None = None,
    t_eval: Sequence[float] | None = None,
    max_steps: int = 500_000,
    h_max: float = 1.0,
) -> Trajectory:
    """Integrate from ``s0`` over [0, t_end]; negative ``t_end`` runs backward.

    Stops early when the orbit leaves the box |x| <= 10 max(|d|, |e|, 1),
    |y| <= 100 (status "escaped"), after ``stop_after`` hits of ``section``
    (status "section"), or after ``max_steps`` accepted steps ("budget").
    With ``t_eval`` the samples are taken at those times instead of at the
    accepted step points.
    """
    if not 1e-12 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-12, 1e-3], got {tol}")
    if t_end == 0 or not math.isfinite(t_end):
        raise ValueError(f"t_end must be finite and nonzero, got {t_end}")
    x, y = (float(v) for v in s0)
    rhs = make_rhs(p)
    sign = 1.0 if t_end > 0 else -1.0
    box_x, box_y = p.box

    if t_eval is not None:
        out_t = [float(t) for t in t_eval]
        if any(sign * (b - a) <= 0 for a, b in zip(out_t, out_t[1:])):
            raise ValueError("t_eval must be strictly monotone in the integration direction")
        if out_t and (sign * out_t[0] < 0 or sign * out_t[-1] > sign * t_end):
            raise ValueError("t_eval must lie within [0, t_end]")
    else:
        out_t = None
    ts: list[float] = []
    xs: list[float] = []
    ys: list[float] = []

    def record(t_, x_, y_):
        ts.append(t_)
        xs.append(x_)
        ys.append(y_)

    next_out = 0
    if out_t is None:
        record(0.0, x, y)
    elif out_t and out_t[0] == 0.0:
        record(0.0, x, y)
        next_out = 1

    crossings: list[Crossing] = []
    direction = "forward" if sign > 0 else "backward"

    def finish(status):
        return Trajectory(
            np.array(ts), np.column_stack([xs, ys]) if ts else np.empty((0, 2)),
            direction, status, p, crossings, tol,
        )

    t = 0.0
    kx, ky = rhs(x, y)
    if kx == 0.0 and ky == 0.0:
        h = min(abs(t_end), h_max)
    else:
        h = min(_initial_step(rhs, x, y, kx, ky, t_end, tol), h_max)
    err_old = 1e-4
    rejected = False
    steps = 0
    while sign * (t_end - t) > 0:
        if steps >= max_steps:
            return finish("budget")
        remaining = abs(t_end - t)
        h = min(h, remaining, h_max)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(
                f"stiff/singular segment: step size underflow at t={t:.6g}, "
                f"state=({x:.6g}, {y:.6g})",
                finish("underflow"),
            )
        xn, yn, ex, ey, k7x, k7y = _dp_step(rhs, x, y, kx, ky, sign * h)
        err = max(abs(ex), abs(ey)) / tol
        if not (math.isfinite(xn) and math.isfinite(yn) and math.isfinite(err)):
            h *= FAC_MIN
            rejected = True
            continue
        if err > 1.0:
            h *= max(FAC_MIN, SAFETY * err ** -ALPHA)
            rejected = True
            continue

        steps += 1
        t_new = t + sign * h if h < remaining else t_end
        step_h = sign * h

        def sub(s, x=x, y=y, kx=kx, ky=ky):
            xs_, ys_, *_ = _dp_step(rhs, x, y, kx, ky, s)
            return xs_, ys_

        if out_t is not None:
            while next_out < len(out_t) and sign * (out_t[next_out] - t_new) <= 0:
                to = out_t[next_out]
                xo, yo = (xn, yn) if to == t_new else sub(to - t)
                record(to, xo, yo)
                next_out += 1

        if section is not None:
            g0, g1 = section.g(x, y), section.g(xn, yn)
            if section.brackets(g0, g1):
                s_hit = brentq(lambda s: section.g(*sub(s)), 0.0, step_h, xtol=1e-15, rtol=1e-15)
                xh, yh = sub(s_hit)
                if section.lo < section.other(xh, yh) < section.hi:
                    crossings.append(Crossing(t + s_hit, xh, yh))
                    if stop_after is not None and len(crossings) >= stop_after:
                        if out_t is None:
                            record(t + s_hit, xh, yh)
                        return finish("section")

        t, x, y, kx, ky = t_new, xn, yn, k7x, k7y
        if out_t is None:
            record(t, x, y)
        if abs(x) > box_x or abs(y) > box_y:
            return finish("escaped")

        fac = SAFETY * max(err, 1e-10) ** -ALPHA * err_old**BETA
        fac = min(FAC_MAX, max(FAC_MIN, fac))
        if rejected:
            fac = min(1.0, fac)
        h *= fac
        err_old = max(err, 1e-4)
        rejected = False
    return finish("completed")
