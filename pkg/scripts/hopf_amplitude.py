"""Limit-cycle amplitude near the Hopf point and its power-law exponent."""

import argparse

import numpy as np

from vdpconley.flow import detect_limit_cycle
from vdpconley.model import SystemParams, lyapunov_coefficient


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=float, default=0.5)
    ap.add_argument("--e", type=float, default=2.0)
    ap.add_argument("--thetas", type=float, nargs="+", default=[1e-3, 2e-3, 5e-3, 1e-2, 2e-2])
    args = ap.parse_args()

    _, L = lyapunov_coefficient(SystemParams(args.d, args.e, 0.0))
    print(f"Lyapunov coefficient at theta=0: {L:g}")
    print(f"{'theta':>10}{'amplitude':>14}{'amp/sqrt(theta)':>18}{'period':>12}{'multiplier':>14}")
    thetas, amps = [], []
    for th in args.thetas:
        lc = detect_limit_cycle(SystemParams(args.d, args.e, th))
        if lc is None:
            print(f"{th:>10g}  no cycle")
            continue
        thetas.append(th)
        amps.append(lc.amplitude)
        print(f"{th:>10g}{lc.amplitude:>14.6f}{lc.amplitude / np.sqrt(th):>18.6f}"
              f"{lc.period:>12.5f}{lc.multiplier:>14.6g}")
    if len(thetas) >= 2:
        slope = np.polyfit(np.log(thetas), np.log(amps), 1)[0]
        print(f"fitted exponent: {slope:.4f}")


if __name__ == "__main__":
    main()
