"""Activated elements per call for the classical circuits, measured by simulation.

Every address is traced for small n (a random sample of 64 beyond --exhaustive-max),
and the table reports the largest count seen, which is also the only one.
"""
import argparse
import csv
import sys

import numpy as np

from qramsim import classical
from qramsim.bucket import bb_step_count


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--exhaustive-max", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    cols = ["n", "fanout_total", "fanout_activated", "modified_activated", "bucket_active", "bucket_waiting", "bucket_quantum_steps", "addresses_traced"]
    w = csv.DictWriter(sys.stdout, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for n in range(1, args.n_max + 1):
        ks = range(2**n) if n <= args.exhaustive_max else rng.choice(2**n, size=64, replace=False).tolist()
        seen = {c: set() for c in cols[1:6]}
        for k in ks:
            fan, mod, bb = (classical.simulate(a, n, k) for a in ("fanout", "modified", "bucket"))
            seen["fanout_total"].add(fan.total_elements)
            seen["fanout_activated"].add(fan.activated_count)
            seen["modified_activated"].add(mod.activated_count)
            seen["bucket_active"].add(bb.activated_count)
            seen["bucket_waiting"].add(bb.waiting_trits)
        for name, values in seen.items():
            if len(values) != 1:
                raise SystemExit(f"{name} depends on the address at n={n}: {sorted(values)}")
        row = {name: values.pop() for name, values in seen.items()}
        w.writerow({"n": n, **row, "bucket_quantum_steps": bb_step_count(n), "addresses_traced": len(ks)})


if __name__ == "__main__":
    main()
