"""Write CSV and SVG phase portraits on both sides of each connection value."""

import argparse
from pathlib import Path

from vdpconley.cli import main as cli

SNAPSHOTS = [
    (0.5, 2.0, 0.02), (0.5, 2.0, 0.04),
    (-1.0, 2.0, -0.2), (-1.0, 2.0, -0.05), (-1.0, 2.0, 0.1), (-1.0, 2.0, 0.2),
    (-1.0, 2.0, 1.1), (-1.0, 2.0, 1.2),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="portraits")
    args = ap.parse_args()
    Path(args.out_dir).mkdir(parents=True, exist_ok=True)
    for d, e, th in SNAPSHOTS:
        prefix = f"d{d:g}_e{e:g}_theta{th:g}"
        rc = cli(["portrait", "--d", str(d), "--e", str(e), "--theta", str(th), "--svg",
                  "--out-dir", args.out_dir, "--prefix", prefix, "--format", "text"])
        if rc:
            raise SystemExit(rc)


if __name__ == "__main__":
    main()
