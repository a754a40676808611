#!/usr/bin/env python3
"""Run the three preset concurrence maps and write CSVs for plotting.

Produces fig2.csv (noise intensity x time), fig3.csv (noise x cavity decay)
and fig4.csv (noise x atomic decay), each with a .summary.csv sidecar giving
the per-row maximum location. Downstream plotting tools consume the CSVs.
"""

import argparse
import sys
from pathlib import Path

from noisycav.cli import main as noisycav_main


def run(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="results", help="output directory")
    parser.add_argument("--points", type=int, default=31, help="grid points per axis")
    parser.add_argument("--workers", type=int, default=None, help="parallel trajectory workers")
    parser.add_argument("--cutoff", type=int, default=5, help="Fock cutoff")
    args = parser.parse_args(argv)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for preset in ("fig2", "fig3", "fig4"):
        out = outdir / f"{preset}.csv"
        cmd = [
            "sweep",
            "--preset", preset,
            "--points", str(args.points),
            "--cutoff", str(args.cutoff),
            "--out", str(out),
        ]
        if args.workers:
            cmd += ["--workers", str(args.workers)]
        code = noisycav_main(cmd)
        if code != 0:
            print(f"{preset}: failed with exit code {code}", file=sys.stderr)
            return code
        print(f"{preset}: wrote {out} and {out}.summary.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(run())
