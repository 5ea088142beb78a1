"""Scan the gap functionals and refine every saddle-connection value.

    python3 scripts/reproduce_brackets.py [--step 0.01] [--tol-theta 1e-4]
"""

import argparse
import time

from vdpconley.flow import detect_brackets

CASES = [
    ("homoclinic", 0.5, 2.0, 0.0, 0.1),
    ("heteroclinic-upper", -1.0, 2.0, -0.3, 0.0),
    ("homoclinic", -1.0, 2.0, 0.0, 0.5),
    ("heteroclinic-lower", -1.0, 2.0, 0.5, 1.3),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--tol-theta", type=float, default=1e-4)
    args = ap.parse_args()
    print(f"{'kind':<20}{'d':>6}{'e':>6}   {'theta_lo':>12}{'theta_hi':>12}{'theta*':>14}")
    for kind, d, e, lo, hi in CASES:
        t0 = time.perf_counter()
        res = detect_brackets(d, e, lo, hi, args.step, kind, args.tol_theta)
        dt = time.perf_counter() - t0
        if not res.brackets:
            print(f"{kind:<20}{d:>6g}{e:>6g}   no sign change in [{lo:g}, {hi:g}]")
        for b in res.brackets:
            print(f"{kind:<20}{d:>6g}{e:>6g}   {b.theta_lo:>12.6f}{b.theta_hi:>12.6f}"
                  f"{b.refined_theta:>14.8f}   ({dt:.2f} s)")


if __name__ == "__main__":
    main()
