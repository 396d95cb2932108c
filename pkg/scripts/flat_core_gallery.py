#!/usr/bin/env python3
"""Reconstruct a few members of a flat-core continuum and verify each one.

Picks the first class with an open plateau budget at the requested lambda,
samples the budget split, and writes one profile CSV per member together
with the energy residual and oracle deviation.

Example:
    python scripts/flat_core_gallery.py --p 3 --q 3 --r-exp 6 --factor 1.6 \
        --j 2 --members 3 --out-dir out/
"""

import argparse
import csv
import pathlib

import numpy as np

from plap.bifurcation import bifurcation_table
from plap.nonlinearity import build_nonlinearity
from plap.profile import energy_residual, reconstruct, shoot_compare
from plap.solver import SolutionClass, solve_class
from plap.timemap import Problem


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--q", type=float, default=3.0)
    ap.add_argument("--b-plus", type=float, default=1.0)
    ap.add_argument("--b-minus", type=float, default=1.0)
    ap.add_argument("--r-exp", type=float, default=6.0)
    ap.add_argument("--j", type=int, default=2, help="class index")
    ap.add_argument("--sign", default="+", choices="+-")
    ap.add_argument("--factor", type=float, default=1.6, help="lambda / flat-core threshold")
    ap.add_argument("--members", type=int, default=3)
    ap.add_argument("--grid", type=int, default=2048)
    ap.add_argument("--out-dir", default="out")
    args = ap.parse_args()

    nl = build_nonlinearity(
        "power_asym",
        args.q,
        {"b_plus": args.b_plus, "b_minus": args.b_minus, "r_exp": args.r_exp},
    )
    table = bifurcation_table(nl, args.p, args.j)
    threshold = table.tilde(args.sign)[args.j - 1]
    if not np.isfinite(threshold):
        raise SystemExit("no flat cores for p <= 2")
    prob = Problem(p=args.p, nl=nl, lam=args.factor * threshold)
    descs = [d for d in solve_class(prob, SolutionClass(args.j, args.sign)) if d.kind == "flat_core"]
    if not descs:
        raise SystemExit(f"class has no plateau budget at lambda = {prob.lam}")
    d = descs[0]
    print(
        f"class S{args.j}{args.sign}: budget {d.core_budget:.6f} over {d.core_count} "
        f"plateau(s) on the {d.core_side} side, continuum dimension {d.continuum_dim}"
    )

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(11)
    for k in range(args.members):
        if d.core_count == 1 or k == 0:
            lengths = [d.core_budget / d.core_count] * d.core_count
        else:
            raw = rng.dirichlet(np.ones(d.core_count))
            lengths = list(d.core_budget * raw)
        prof = reconstruct(prob, d, M=args.grid, core_lengths=lengths)
        energy = energy_residual(prob, prof)
        oracle = shoot_compare(prob, prof)
        path = out / f"flat_core_{args.j}{'p' if args.sign == '+' else 'm'}_{k}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "phi", "dphi"])
            for row in zip(prof.x, prof.phi, prof.dphi):
                w.writerow([f"{v:.17g}" for v in row])
        print(
            f"  member {k}: plateaus {[f'{v:.4f}' for v in lengths]}, "
            f"energy {energy:.2e}, oracle sup-diff {oracle:.2e} -> {path}"
        )


if __name__ == "__main__":
    main()
