"""Compare TAC against random orders and the brute-force optimum on small
series-parallel instances.

    python3 scripts/near_optimality.py --instances 100 --random-seeds 100
"""

import argparse
import statistics
from fractions import Fraction

from commsched import (
    Shape,
    SimPolicy,
    SyntheticSpec,
    brute_force_best,
    declared_oracle,
    generate_synthetic,
    random_schedule,
    simulate,
    tac,
)

SIZES = [(2, 2), (2, 3), (3, 2), (1, 5), (5, 1), (1, 6), (6, 1), (7, 1), (1, 7), (3, 1)]
RATIOS = [Fraction(1, 2), Fraction(1), Fraction(2)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=100)
    ap.add_argument("--random-seeds", type=int, default=100)
    ap.add_argument("--base-seed", type=int, default=1000)
    args = ap.parse_args()

    beats = within = 0
    gaps = []
    print("inst layers k ratio  tac  median  best")
    for i in range(args.instances):
        layers, k = SIZES[i % len(SIZES)]
        ratio = RATIOS[i % 3]
        g = generate_synthetic(SyntheticSpec(Shape.SERIES_PARALLEL, layers, k, ratio, args.base_seed + i))
        t = declared_oracle(g)
        pol = SimPolicy()
        m_tac = simulate(g, t, tac(g, t), pol).makespan
        med = statistics.median(
            simulate(g, t, random_schedule(g, s), pol).makespan for s in range(args.random_seeds)
        )
        best = brute_force_best(g, t, pol).best_makespan
        beats += m_tac <= med
        within += 10 * m_tac <= 11 * best
        gaps.append(m_tac / best - 1)
        print(f"{i:4d} {layers:6d} {k} {str(ratio):>5} {m_tac:5d} {med:7.1f} {best:5d}")

    n = args.instances
    print(f"\nTAC <= random median: {beats}/{n}")
    print(f"TAC within 10% of optimum: {within}/{n}")
    print(f"mean gap to optimum: {100 * statistics.fmean(gaps):.2f}%")


if __name__ == "__main__":
    main()
