#!/usr/bin/env python3
"""Run every experiment at a chosen scale and print a short summary.

    python scripts/reproduce_figures.py --scale quick   # 2,000 states, 50,000 shadows (~30 s)
    python scripts/reproduce_figures.py --scale full    # 20,000 states, 500,000 shadows

Outputs land in ``<out>/<kind>/`` as CSV, JSON metadata and SVG plots.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from mubtomo import cli

SCALES = {
    "quick": {"trials": 2_000, "shadow": 50_000, "mc": 10_000},
    "full": {"trials": 20_000, "shadow": 500_000, "mc": 10_000},
}


def rows(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def run(kind: str, out: Path, *extra: str) -> Path:
    target = out / kind
    code = cli.main([kind, "--out", str(target), *extra])
    if code != 0:
        sys.exit(f"{kind} exited with {code}")
    return target


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", choices=SCALES, default="quick")
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", default="0xC0FFEE")
    ap.add_argument("--workers", default="1")
    args = ap.parse_args()
    s = SCALES[args.scale]
    out = Path(args.out)
    common = ["--seed", args.seed, "--workers", args.workers]

    run("verify", out)
    run("crosscheck", out, "--trials", str(s["mc"]), "--shots", "10000", *common)
    fig1 = run("fig1", out, "--trials", str(s["trials"]), *common)
    fig2 = run("fig2", out, "--trials", str(s["trials"]), *common)
    fig3 = run("fig3", out, "--shadow-samples", str(s["shadow"]), *common)
    run("shadow", out, *common)

    print("\nmean fidelity error (N = 1 per basis)")
    table = {(r["catalog"], r["family"]): r for r in rows(fig1 / "fig1.csv")}
    families = sorted({f for _, f in table})
    catalogs = sorted({c for c, _ in table})
    print("family      " + "".join(f"{c:>18}" for c in catalogs))
    for fam in families:
        cells = "".join(
            f"{float(table[(c, fam)]['mean']):10.5f}+-{float(table[(c, fam)]['standard_error']):.5f}"
            for c in catalogs
        )
        print(f"{fam:<12}{cells}")

    print("\nentropy vs fidelity error")
    for r in rows(fig2 / "fig2_correlations.csv"):
        print(f"  {r['catalog']} {r['family']:<4} pearson {float(r['pearson']):.3f}"
              f"  mean entropy {float(r['mean_entropy_bits']):.3f} bits")

    print("\nshadow histogram tails (Delta P = P_A - P_B)")
    for r in rows(fig3 / "fig3_tails.csv"):
        print(f"  {r['family']:<4} low {float(r['left_tail_delta']):+.4f}  high {float(r['right_tail_delta']):+.4f}")


if __name__ == "__main__":
    main()
