"""Serialization: fixed-precision JSON, trajectory CSV and static SVG."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .model import EquilibriumReport, SystemParams, equilibria
from .integrate import make_rhs

FLOAT_FORMAT = ".17g"


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    s = format(v, FLOAT_FORMAT)
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def to_jsonable(obj):
    """Convert numpy scalars, enums, tuples and sets to plain JSON types."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(to_jsonable(v) for v in obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or isinstance(o, bool):
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=False)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {enc(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(isinstance(v, (int, float, str, bool)) or v is None for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(to_jsonable(obj), 0) + "\n"


def equilibrium_to_dict(r: EquilibriumReport) -> dict:
    return {
        "name": r.name,
        "state": [r.state.x, r.state.y],
        "eigenvalues": [complex(r.spectrum.lambda1), complex(r.spectrum.lambda2)],
        "class": r.stability.kind.value,
        "condition": r.stability.condition,
        "conley_index": None if r.index is None else list(r.index.ranks),
    }


# -- trajectories ------------------------------------------------------------


@dataclass
class PortraitCurve:
    branch_id: str
    t: np.ndarray
    xy: np.ndarray
    status: str
    role: str = "orbit"  # orbit | unstable | stable


@dataclass
class PortraitData:
    params: SystemParams
    window: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    curves: list[PortraitCurve] = field(default_factory=list)


def write_csv(curves: Iterable[PortraitCurve], fh) -> int:
    """Rows t, x, y, branch_id; returns the number of data rows."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "x", "y", "branch_id"])
    n = 0
    for c in curves:
        for t, (x, y) in zip(c.t, c.xy):
            w.writerow([_fmt_float(float(t)), _fmt_float(float(x)), _fmt_float(float(y)), c.branch_id])
            n += 1
    return n


_ROLE_STYLE = {
    "orbit": 'stroke="#8c8c8c" stroke-width="1"',
    "unstable": 'stroke="#c0392b" stroke-width="2"',
    "stable": 'stroke="#2c64b4" stroke-width="2"',
}


def render_svg(data: PortraitData, width: int = 720, height: int = 540, arrows: tuple[int, int] = (24, 18)) -> str:
    """Static SVG 1.1: field arrows on a lattice, curves, equilibria."""
    xmin, xmax, ymin, ymax = data.window
    sx, sy = width / (xmax - xmin), height / (ymax - ymin)

    def px(x, y):
        return (x - xmin) * sx, (ymax - y) * sy

    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    out.write(
        '<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="#b0b0b0"/></marker>'
        f'<clipPath id="frame"><rect x="0" y="0" width="{width}" height="{height}"/></clipPath></defs>\n'
    )
    out.write(f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n')
    p = data.params
    ax, ay = px(0, 0)
    out.write(f'<line x1="0" y1="{ay:.2f}" x2="{width}" y2="{ay:.2f}" stroke="#e0e0e0"/>\n')
    out.write(f'<line x1="{ax:.2f}" y1="0" x2="{ax:.2f}" y2="{height}" stroke="#e0e0e0"/>\n')

    rhs = make_rhs(p)
    nx, ny = arrows
    cell = min(width / nx, height / ny)
    out.write('<g stroke="#b0b0b0" stroke-width="1" marker-end="url(#head)">\n')
    for i in range(nx):
        for j in range(ny):
            x = xmin + (i + 0.5) * (xmax - xmin) / nx
            y = ymin + (j + 0.5) * (ymax - ymin) / ny
            fx, fy = rhs(x, y)
            u, v = fx * sx, -fy * sy
            n = math.hypot(u, v)
            if n == 0:
                continue
            u, v = 0.4 * cell * u / n, 0.4 * cell * v / n
            cx, cy = px(x, y)
            out.write(f'<line x1="{cx - u:.2f}" y1="{cy - v:.2f}" x2="{cx + u:.2f}" y2="{cy + v:.2f}"/>\n')
    out.write("</g>\n")

    out.write('<g fill="none" clip-path="url(#frame)">\n')
    for role in ("orbit", "stable", "unstable"):
        for c in data.curves:
            if c.role != role or len(c.xy) < 2:
                continue
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in (px(x, y) for x, y in c.xy))
            out.write(f'<polyline {_ROLE_STYLE[role]} points="{pts}"><title>{c.branch_id}</title></polyline>\n')
    out.write("</g>\n")
    for eq in equilibria(p):
        cx, cy = px(eq.x, eq.y)
        out.write(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="black"/>\n')
    out.write("</svg>\n")
    return out.getvalue()


def bundle(command: str, config: dict, version: str, **payload) -> dict:
    out = {"tool": "vdpconley", "version": version, "command": command, "config": config}
    out.update(payload)
    return out

