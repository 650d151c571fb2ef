"""Straggler fraction of a synchronized multi-worker iteration when each worker
uses its own random order versus a shared TIC/TAC order."""

import argparse
import statistics
from fractions import Fraction

from commsched import (
    Shape,
    SimPolicy,
    SyntheticSpec,
    declared_oracle,
    derive_seed,
    expand_to_mr,
    generate_synthetic,
    random_schedule,
    simulate_cluster,
    tac,
    tic,
    worker_devices,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shape", choices=[s.value for s in Shape], default="layered")
    ap.add_argument("--layers", type=int, default=4)
    ap.add_argument("--params-per-layer", type=int, default=2)
    ap.add_argument("--ratio", type=Fraction, default=Fraction(1))
    ap.add_argument("--gen-seed", type=int, default=11)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--ps", type=int, default=1)
    ap.add_argument("--seeds", type=int, default=50)
    args = ap.parse_args()

    w = generate_synthetic(SyntheticSpec(
        Shape(args.shape), args.layers, args.params_per_layer, args.ratio, args.gen_seed))
    g = expand_to_mr(w, args.workers, args.ps)
    t = declared_oracle(g)
    wt = declared_oracle(w)
    devices = worker_devices(g)
    shared = {"tic": tic(w), "tac": tac(w, wt)}

    results = {"random": [], "tic": [], "tac": []}
    iters = {k: [] for k in results}
    for s in range(args.seeds):
        pol = SimPolicy(unprioritized_choice_seed=s)
        per = {d: random_schedule(w, derive_seed(s, i)) for i, d in enumerate(devices)}
        runs = {"random": per}
        runs.update({k: {d: sched for d in devices} for k, sched in shared.items()})
        for k, sched in runs.items():
            _, stats = simulate_cluster(g, t, sched, pol)
            results[k].append(float(stats.straggler_fraction))
            iters[k].append(stats.iteration_time)

    print(f"{len(devices)} workers, {args.ps} PS, {len(w.recv_ids)} params, {args.seeds} seeds")
    print("algo    mean_straggler  max_straggler  mean_iter_us")
    for k in results:
        print(f"{k:7s} {statistics.fmean(results[k]):14.6f} {max(results[k]):14.6f} "
              f"{statistics.fmean(iters[k]):13.1f}")


if __name__ == "__main__":
    main()
