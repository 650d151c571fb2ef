"""Efficiency E and speedup S across synthetic shapes and comm/compute ratios,
one CSV row per (shape, ratio, algorithm)."""

import argparse
import csv
import statistics
import sys
from fractions import Fraction

from commsched import (
    Shape,
    SimPolicy,
    SyntheticSpec,
    declared_oracle,
    efficiency_report,
    generate_synthetic,
    random_schedule,
    simulate,
    tac,
    tic,
)

RATIOS = ["1/4", "1/2", "1", "2", "4"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--layers", type=int, default=6)
    ap.add_argument("--params-per-layer", type=int, default=2)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(["shape", "ratio", "algo", "mean_E", "mean_S"])
    for shape in Shape:
        for r in RATIOS:
            ratio = Fraction(r)
            es = {"none": [], "random": [], "tic": [], "tac": []}
            ss = []
            for i in range(args.instances):
                g = generate_synthetic(SyntheticSpec(shape, args.layers, args.params_per_layer, ratio, i))
                t = declared_oracle(g)
                scheds = {"none": None, "random": random_schedule(g, i), "tic": tic(g), "tac": tac(g, t)}
                for algo, sched in scheds.items():
                    m = simulate(g, t, sched, SimPolicy(unprioritized_choice_seed=i)).makespan
                    rep = efficiency_report(g, t, m)
                    if rep.efficiency is not None:
                        es[algo].append(float(rep.efficiency))
                        if algo == "none":
                            ss.append(float(rep.speedup))
            s_mean = statistics.fmean(ss) if ss else float("nan")
            for algo, vals in es.items():
                e_mean = statistics.fmean(vals) if vals else float("nan")
                w.writerow([shape.value, r, algo, f"{e_mean:.4f}", f"{s_mean:.4f}"])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
