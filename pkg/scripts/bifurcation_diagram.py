#!/usr/bin/env python3
"""Sweep lambda for a chosen family and tabulate the solution structure.

Writes two CSVs: the threshold sequences (one row per class index) and a
per-lambda census of class tags.

Example:
    python scripts/bifurcation_diagram.py --p 3 --q 3 --r-exp 6 --n 6 \
        --lam-max 4000 --steps 25 --out-dir out/
"""

import argparse
import csv
import pathlib

import numpy as np

from plap.bifurcation import bifurcation_table, structure
from plap.nonlinearity import build_nonlinearity
from plap.timemap import Problem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--q", type=float, default=3.0)
    ap.add_argument("--b-plus", type=float, default=1.0)
    ap.add_argument("--b-minus", type=float, default=1.0)
    ap.add_argument("--r-exp", type=float, default=6.0)
    ap.add_argument("--n", type=int, default=6, help="largest class index")
    ap.add_argument("--lam-min", type=float, default=None)
    ap.add_argument("--lam-max", type=float, default=None)
    ap.add_argument("--steps", type=int, default=20)
    ap.add_argument("--out-dir", default="out")
    args = ap.parse_args()

    nl = build_nonlinearity(
        "power_asym",
        args.q,
        {"b_plus": args.b_plus, "b_minus": args.b_minus, "r_exp": args.r_exp},
    )
    table = bifurcation_table(nl, args.p, args.n)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "thresholds.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["n", "lambda_tilde_plus", "lambda_tilde_minus"]
        if table.star_plus is not None:
            header += ["lambda_star_plus", "lambda_star_minus"]
        if table.classical is not None:
            header.append("lambda_n")
        w.writerow(header)
        for i, idx in enumerate(table.n):
            row = [idx, table.tilde_plus[i], table.tilde_minus[i]]
            if table.star_plus is not None:
                row += [table.star_plus[i], table.star_minus[i]]
            if table.classical is not None:
                row.append(table.classical[i])
            w.writerow(row)

    finite = [v for v in table.tilde_plus + table.tilde_minus if np.isfinite(v)]
    anchors = finite or table.classical or [1.0]
    lam_lo = args.lam_min if args.lam_min is not None else 0.2 * min(anchors)
    lam_hi = args.lam_max if args.lam_max is not None else 2.0 * max(anchors)

    with open(out / "structure_sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda"] + [f"S{j}{s}" for j in range(1, args.n + 1) for s in "+-"])
        for lam in np.geomspace(lam_lo, lam_hi, args.steps):
            rep = structure(Problem(p=args.p, nl=nl, lam=float(lam)), args.n)
            row = [f"{lam:.6g}"]
            for j in range(1, args.n + 1):
                for s in "+-":
                    e = rep.entry(j, s)
                    tag = f"continuum[{e.continuum_dim}]" if e.tag == "continuum" else e.tag
                    row.append(tag)
            w.writerow(row)
    print(f"wrote {out/'thresholds.csv'} and {out/'structure_sweep.csv'}")


if __name__ == "__main__":
    main()
