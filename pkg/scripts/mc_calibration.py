"""Monte Carlo failure rates against the analytic curve.

    python scripts/mc_calibration.py --arch bucket --ns 2,4,6,8,10 --epsilons 0.001,0.01,0.1 --trials 10000

Prints a CSV with one extra column, z = (fail_rate - analytic) / Wilson sigma.
"""
import argparse
import csv
import sys
import time

from qramsim.noise import CHANNELS, COUNTINGS, NoiseModel, monte_carlo_failure


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--arch", choices=("bucket", "fanout"), default="bucket")
    p.add_argument("--ns", default="2,4,6,8,10")
    p.add_argument("--epsilons", default="0.01")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--counting", choices=COUNTINGS, default="per-active-switch")
    p.add_argument("--channel", choices=CHANNELS, default="route-flip")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    args = p.parse_args()
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["architecture", "n", "epsilon", "trials", "fail_rate", "ci_half", "analytic", "z", "seconds"])
    for eps in (float(e) for e in args.epsilons.split(",")):
        for n in (int(x) for x in args.ns.split(",")):
            t0 = time.perf_counter()
            model = NoiseModel(eps, args.channel, args.counting, args.seed)
            row = monte_carlo_failure(args.arch, n, model, args.trials, workers=args.workers)
            z = (row.fail_rate - row.analytic) / row.sigma if row.sigma else 0.0
            w.writerow([row.architecture, n, eps, row.trials, row.fail_rate, row.ci_half, row.analytic, f"{z:+.2f}", f"{time.perf_counter() - t0:.1f}"])
            sys.stdout.flush()


if __name__ == "__main__":
    main()
