#!/usr/bin/env python3
"""Regenerate every figure data set as CSV plus manifest.

Each entry below is one ``cgcat`` invocation; outputs land in ``--out-dir``.
``--quick`` swaps in coarse grids for a smoke run.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from cgcat.cli import main as cgcat_main

FIGURES = {
    "fig01_bell_res": ["bell-res", "--alpha", "1", "2",
                       "--delta-min", "0", "--delta-max", "3", "--delta-steps", "31"],
    "fig02_bell_ref": ["bell-ref", "--Delta-min", "0", "--Delta-max", "1",
                       "--Delta-steps", "41"],
    "fig03_neg_ref_cat": ["neg-ref-cat", "--alpha", "2",
                          "--theta-a", "pi/4", "13/100pi", "--theta-b", "3pi/4", "21/50pi"],
    "fig06_slice_ref": ["wigner-slice", "--alpha", "2", "--state", "ref", "--Delta", "0"],
    "fig07_slice_res": ["wigner-slice", "--alpha", "2", "--state", "res", "--delta", "1"],
    "fig08_neg_res_cat": ["neg-res-cat", "--alpha", "2", "--nmax", "20"],
    "fig09_neg_map": ["neg-map", "--alpha", "2"],
    "fig10_neg_ref_noon": ["neg-ref-noon", "--n", "1", "3", "5",
                           "--theta-a", "13/100pi", "--theta-b", "21/50pi"],
    "fig12_neg_ref_pasv": ["neg-ref-pasv", "--r", "0.3", "0.6", "0.9",
                           "--theta-a", "53/100pi", "--theta-b", "2/3pi"],
}

QUICK = ["--grid-points", "21"]


def parse_args(argv=None) -> argparse.Namespace:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", type=Path, default=Path("figures"))
    p.add_argument("--workers", type=int, default=8)
    p.add_argument("--only", nargs="+", choices=sorted(FIGURES), default=None)
    p.add_argument("--quick", action="store_true", help="coarse grids, for smoke runs")
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    status = 0
    for name in args.only or FIGURES:
        cmd = list(FIGURES[name]) + ["--workers", str(args.workers),
                                     "--out", str(args.out_dir / f"{name}.csv")]
        if args.quick and not cmd[0].startswith("bell"):
            cmd += QUICK
        t0 = time.perf_counter()
        code = cgcat_main(cmd)
        print(f"{name}: exit {code} in {time.perf_counter() - t0:.1f}s", flush=True)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
