"""Command-line front end: ``vdpconley {equilibria,portrait,detect,conley}``.

Every command prints a JSON bundle (or plain text with ``--format text``)
that echoes the fully resolved configuration.  Exit status is 0 on success,
including searches that find nothing, 2 on invalid input and 3 on numerical
failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .conley import AlgebraError
from .flow import (
    DEFAULT_SEED_OFFSET,
    DEFAULT_TOL,
    GapKind,
    GapSpec,
    NoCrossingError,
    detect_brackets,
    detect_limit_cycle,
    manifold_branch,
    omega_limit_estimate,
)
from .integrate import IntegrationError, integrate
from .model import (
    Equilibrium,
    ParameterError,
    Stability,
    SystemParams,
    classify,
    equilibrium_reports,
    lyapunov_coefficient,
)
from .report import (
    PortraitCurve,
    PortraitData,
    bundle,
    dumps,
    equilibrium_to_dict,
    render_svg,
    write_csv,
)
from .scenario import PRESETS, ScenarioError, load_preset, parse_scenario, run_scenario

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
OUT_DIR_ENV = "VDPCONLEY_OUT_DIR"
HOPF_DEFAULT_RANGE = (-0.1, 0.1)


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    d: float
    e: float
    theta: float | None = None
    theta_lo: float | None = None
    theta_hi: float | None = None
    step: float | None = None
    tol: float = DEFAULT_TOL
    tol_theta: float = 1e-4
    seed_offset: float = DEFAULT_SEED_OFFSET
    kind: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.theta_lo is not None and not self.theta_lo < self.theta_hi:
            raise InputError(f"range needs lo < hi, got {self.theta_lo}:{self.theta_hi}")
        if self.step is not None and self.step <= 0:
            raise InputError("step must be positive")
        if self.tol_theta <= 0:
            raise InputError("tol-theta must be positive")
        SystemParams(self.d, self.e, 0.0 if self.theta is None else self.theta)


def _parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like lo:hi, got {text!r}") from None


def _fix_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-0.3:1.3" as an option; glue such values to their flag
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in ("--range",) and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def _common(sp: argparse.ArgumentParser, theta: bool = True):
    sp.add_argument("--d", type=float, required=True, help="root parameter d (|d| <= |e|)")
    sp.add_argument("--e", type=float, required=True, help="root parameter e")
    if theta:
        sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL, help="integrator absolute tolerance")
    sp.add_argument("--format", choices=("json", "text"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vdpconley", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("equilibria", help="classify the three equilibria")
    _common(sp)

    sp = sub.add_parser("portrait", help="sample trajectories and separatrices to CSV/SVG")
    _common(sp)
    sp.add_argument("--grid", type=int, default=4, help="seed lattice is grid x grid")
    sp.add_argument("--t-max", type=float, default=40.0)
    sp.add_argument("--samples", type=int, default=400, help="samples per curve")
    sp.add_argument("--seed-offset", type=float, default=DEFAULT_SEED_OFFSET)
    sp.add_argument("--omega-t", type=float, default=1000.0, help="horizon for omega-limit estimates")
    sp.add_argument("--svg", action="store_true", help="also write an SVG rendering")
    sp.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_DIR_ENV} or .)")
    sp.add_argument("--prefix", default="portrait")

    sp = sub.add_parser("detect", help="bracket and bisect a bifurcation in theta")
    _common(sp, theta=False)
    sp.add_argument("--kind", choices=[k.value for k in GapKind], required=True)
    sp.add_argument("--range", type=_parse_range, default=None, help="theta range lo:hi")
    sp.add_argument("--step", type=float, default=0.01)
    sp.add_argument("--tol-theta", type=float, default=1e-4)
    sp.add_argument("--seed-offset", type=float, default=DEFAULT_SEED_OFFSET)
    sp.add_argument("--saddle", default="E1", help="saddle for homoclinic gaps")
    sp.add_argument("--source", default=None, help="saddle whose unstable branch starts a heteroclinic")
    sp.add_argument("--target", default=None)
    sp.add_argument("--unstable-side", choices=("plus", "minus"), default=None)
    sp.add_argument("--stable-side", choices=("plus", "minus"), default=None)
    sp.add_argument("--jobs", type=int, default=1, help="parallel processes for the theta scan")

    sp = sub.add_parser("conley", help="solve transition matrices for a scenario")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--scenario", type=Path)
    sp.add_argument("--format", choices=("json", "text"), default="json")
    return ap


# -- commands ----------------------------------------------------------------


def cmd_equilibria(args) -> tuple[dict, str]:
    cfg = RunConfig(args.d, args.e, theta=args.theta, tol=args.tol, format=args.format)
    p = SystemParams(args.d, args.e, args.theta)
    reps = equilibrium_reports(p)
    b = bundle("equilibria", asdict(cfg), __version__, equilibria=[equilibrium_to_dict(r) for r in reps])
    lines = [f"d={p.d:g} e={p.e:g} theta={p.theta:g}"]
    for r in reps:
        idx = "n/a" if r.index is None else str(r.index)
        lines.append(
            f"{r.name} ({r.state.x:g}, {r.state.y:g}): {r.stability}  "
            f"eig {r.spectrum.lambda1:.6g}, {r.spectrum.lambda2:.6g}  CH {idx}"
        )
    return b, "\n".join(lines)


def _window(p: SystemParams) -> tuple[float, float, float, float]:
    xs = [0.0, -p.d, -p.e]
    lo, hi = min(xs), max(xs)
    m = 0.5 * max(1.0, hi - lo)
    half_y = 0.75 * (hi - lo + 2 * m) * 0.75
    return lo - m, hi + m, -half_y, half_y


def cmd_portrait(args) -> tuple[dict, str]:
    if args.grid < 1 or args.samples < 2 or args.t_max <= 0:
        raise InputError("grid >= 1, samples >= 2 and t-max > 0 are required")
    cfg = RunConfig(args.d, args.e, theta=args.theta, tol=args.tol, seed_offset=args.seed_offset,
                    format="svg" if args.svg else "csv")
    p = SystemParams(args.d, args.e, args.theta)
    win = _window(p)
    data = PortraitData(p, win)
    t_fwd = np.linspace(0.0, args.t_max, args.samples)
    truncated = []

    def add(branch_id, s0, t_eval, role):
        tr = integrate(p, s0, float(t_eval[-1]), args.tol, t_eval=t_eval)
        data.curves.append(PortraitCurve(branch_id, tr.t, tr.states, tr.status, role))
        if len(tr) < len(t_eval):
            truncated.append({"branch_id": branch_id, "rows": len(tr), "status": tr.status})

    xmin, xmax, ymin, ymax = win
    k = 0
    for i in range(args.grid):
        for j in range(args.grid):
            x0 = xmin + (i + 0.5) * (xmax - xmin) / args.grid
            y0 = ymin + (j + 0.5) * (ymax - ymin) / args.grid
            add(f"seed-{k:03d}", (x0, y0), t_fwd, "orbit")
            k += 1

    branches = []
    for which in (Equilibrium.E1, Equilibrium.E2):
        _, cls = classify(p, which)
        if cls.kind is not Stability.SADDLE:
            continue
        for kind in ("unstable", "stable"):
            for side in (1, -1):
                br = manifold_branch(p, which, kind, side, args.seed_offset, tol=args.tol, section=None)
                t_eval = t_fwd if kind == "unstable" else -t_fwd
                add(br.branch_id, br.seed, t_eval, kind)
                entry = {"branch_id": br.branch_id, "seed": [br.seed.x, br.seed.y]}
                if kind == "unstable":
                    long = integrate(p, br.seed, args.omega_t, args.tol)
                    entry["omega_limit"] = str(omega_limit_estimate(long))
                branches.append(entry)

    cycle = None
    try:
        lc = detect_limit_cycle(p, tol=args.tol)
    except ValueError:
        lc = None
    if lc is not None:
        cycle = {"section_x": lc.section_point.x, "period": lc.period, "amplitude": lc.amplitude,
                 "multiplier": lc.multiplier, "stable": lc.stable}

    out_dir = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or ".")
    files = {}
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / f"{args.prefix}.csv"
        with open(csv_path, "w", newline="") as fh:
            rows = write_csv(data.curves, fh)
        files["csv"] = str(csv_path)
        if args.svg:
            svg_path = out_dir / f"{args.prefix}.svg"
            svg_path.write_text(render_svg(data))
            files["svg"] = str(svg_path)
    except OSError as exc:
        raise OSError(f"cannot write portrait to {out_dir}: {exc}") from exc

    config = asdict(cfg) | {"grid": args.grid, "t_max": args.t_max, "samples": args.samples,
                            "omega_t": args.omega_t, "out_dir": str(out_dir), "prefix": args.prefix}
    b = bundle(
        "portrait", config, __version__,
        files=files, rows=rows, requested_rows=args.samples * len(data.curves),
        truncated=truncated, branches=branches, limit_cycle=cycle,
    )
    lines = [f"wrote {rows} rows to {files['csv']}" + (f" and {files['svg']}" if "svg" in files else "")]
    lines += [f"{e['branch_id']}: omega {e['omega_limit']}" for e in branches if "omega_limit" in e]
    lines.append("limit cycle: none" if cycle is None else
                 f"limit cycle: x={cycle['section_x']:.6g} period={cycle['period']:.6g}")
    return b, "\n".join(lines)


def _bracket_dict(br) -> dict:
    return {"theta_lo": br.theta_lo, "theta_hi": br.theta_hi, "theta_star": br.refined_theta,
            "gap_lo": br.gap_lo, "gap_hi": br.gap_hi, "evaluations": br.evaluations}


def cmd_detect(args) -> tuple[dict, str]:
    kind = GapKind(args.kind)
    if args.range is None:
        if kind is not GapKind.HOPF:
            raise InputError(f"--range is required for --kind {kind.value}")
        lo, hi = HOPF_DEFAULT_RANGE
    else:
        lo, hi = args.range
    if args.jobs < 1:
        raise InputError("jobs must be >= 1")
    cfg = RunConfig(args.d, args.e, theta_lo=lo, theta_hi=hi, step=args.step, tol=args.tol,
                    tol_theta=args.tol_theta, seed_offset=args.seed_offset, kind=kind.value,
                    format=args.format)
    side = {"plus": 1, "minus": -1, None: None}
    spec = GapSpec(kind, saddle=args.saddle.upper(),
                   source=args.source.upper() if args.source else None,
                   target=args.target.upper() if args.target else None,
                   unstable_side=side[args.unstable_side], stable_side=side[args.stable_side])
    res = detect_brackets(args.d, args.e, lo, hi, args.step, spec, args.tol_theta,
                          seed_offset=args.seed_offset, tol=args.tol, jobs=args.jobs)
    config = asdict(cfg) | {"saddle": spec.saddle, "source": spec.source, "target": spec.target,
                            "unstable_side": args.unstable_side, "stable_side": args.stable_side,
                            "jobs": args.jobs}
    payload = {
        "brackets": [_bracket_dict(b) for b in res.brackets],
        "rejected_jumps": [_bracket_dict(b) for b in res.rejected],
        "failed_points": [{"theta": s.theta, "error": s.error} for s in res.scan if s.error],
    }
    lines = [f"{kind.value}: {len(res.brackets)} bracket(s) in [{lo:g}, {hi:g}]"]
    for b in res.brackets:
        lines.append(f"  theta* = {b.refined_theta:.8g} in ({b.theta_lo:.8g}, {b.theta_hi:.8g})")
    if not res.brackets:
        payload["note"] = "no sign change found"
        lines.append("  no sign change found")
    if kind is GapKind.HOPF:
        _, L = lyapunov_coefficient(SystemParams(args.d, args.e, 0.0))
        verdict = "stable limit cycle on source side" if L < 0 else "unstable limit cycle on sink side"
        payload["hopf"] = {"theta_star": 0.0, "lyapunov_coefficient": L, "verdict": verdict}
        lines.append(f"  Hopf at theta*=0, L={L:g}: {verdict}")
    return bundle("detect", config, __version__, **payload), "\n".join(lines)


def cmd_conley(args) -> tuple[dict, str]:
    if args.preset:
        sc = load_preset(args.preset)
        config = {"preset": args.preset, "format": args.format}
    else:
        try:
            text = args.scenario.read_text()
        except OSError as exc:
            raise InputError(f"cannot read scenario {args.scenario}: {exc}") from None
        sc = parse_scenario(text, source=str(args.scenario))
        config = {"scenario": str(args.scenario), "format": args.format}
    res = run_scenario(sc)
    payload = {
        "name": sc.name,
        "theta_bracket": list(sc.bracket) if sc.bracket else None,
        "validation": {
            side: {"valid": rep.valid, "violations": [
                {"axiom": v.axiom, "detail": v.detail} for v in rep.violations]}
            for side, rep in (("before", res.report_before), ("after", res.report_after))
        },
        "connection_matrices": {"before": sc.delta_before.to_dict(), "after": sc.delta_after.to_dict()},
    }
    lines = [f"scenario {sc.name}"]
    for side, D, rep in (("before", sc.delta_before, res.report_before),
                         ("after", sc.delta_after, res.report_after)):
        lines += [f"Delta ({side}): {rep.summary()}", D.to_text(), ""]
    if res.solution is not None:
        sol = res.solution
        fmt = lambda k: f"T({k[0]},{k[1]}) @{k[2]}"
        payload["transition"] = {
            "rows": sol.M0.basis_labels(), "cols": sol.M1.basis_labels(),
            "constrained": [{"entry": fmt(k), "value": v} for k, v in sol.constrained.items()],
            "forced": [{"entry": fmt(k), "value": v} for k, v in sol.forced.items()],
            "free": [fmt(k) for k in sol.free],
            "solutions": [T.matrix.astype(int).tolist() for T in sol.solutions],
        }
        payload["certificates"] = [c.to_dict() for c in res.certificates]
        lines += ["T (forced entries shown, * free):", sol.pattern_text(), ""]
        lines += ["forced: " + (", ".join(f"{fmt(k)}={'iso' if v else '0'}" for k, v in sol.forced.items())
                                or "none")]
        lines += ["certificate: " + str(c) for c in res.certificates] or ["no certificates"]
    return bundle("conley", config, __version__, **payload), "\n".join(lines)


COMMANDS = {"equilibria": cmd_equilibria, "portrait": cmd_portrait,
            "detect": cmd_detect, "conley": cmd_conley}


def main(argv: list[str] | None = None) -> int:
    argv = _fix_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        b, text = COMMANDS[args.command](args)
    except (ParameterError, InputError, ScenarioError, AlgebraError, ValueError) as exc:
        print(f"vdpconley: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegrationError, NoCrossingError, FloatingPointError, OSError) as exc:
        print(f"vdpconley: numerical failure: {exc}" if not isinstance(exc, OSError)
              else f"vdpconley: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    sys.stdout.write(dumps(b) if args.format == "json" else text + "\n")
    if args.command == "conley" and not all(v["valid"] for v in b["validation"].values()):
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
