"""Analytic failure per call for both architectures over an (epsilon, n) grid.

    python scripts/error_scaling.py --epsilons 0.01,0.001 --ns 10,20,30,100 > error_scaling.csv
"""
import argparse
import sys

from qramsim.noise import error_scaling_table


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--epsilons", default="0.01,0.001")
    p.add_argument("--ns", default="1,2,5,10,20,30,100")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    args = p.parse_args()
    table = error_scaling_table([float(e) for e in args.epsilons.split(",")], [int(n) for n in args.ns.split(",")])
    sys.stdout.write(table.to_csv() if args.format == "csv" else table.to_json() + "\n")
    # a short human summary on stderr
    for row in table.rows:
        if row.architecture == "bucket":
            print(f"bucket eps={row.epsilon:g} n={row.n}: {100 * row.analytic:.1f}% (first order {100 * min(1, row.n * row.epsilon):.1f}%)", file=sys.stderr)


if __name__ == "__main__":
    main()
