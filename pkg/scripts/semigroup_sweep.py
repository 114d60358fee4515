"""Chain-factor census: classify every factor of a maximal ideal chain for all
labeled associative tables up to a given order and for random semigroups."""
import argparse
from collections import Counter

import numpy as np

from quasiapprox.semigroup import (FiniteSemigroup, all_associative_tables, chain_factors,
                                   classify, maximal_ideal_chain, random_semigroup)


def census(semigroups):
    verdicts, chain_lengths, total = Counter(), Counter(), 0
    for s in semigroups:
        chain = maximal_ideal_chain(s)
        chain_lengths[len(chain.chain) - 1] += 1
        verdicts.update(classify(f).verdict for f in chain_factors(s, chain))
        total += 1
    return total, verdicts, chain_lengths


def report(title, result):
    total, verdicts, lengths = result
    print(f"{title}: {total} semigroups")
    print("  factor verdicts: " + ", ".join(f"{k}={v}" for k, v in sorted(verdicts.items())))
    print("  chain lengths:   " + ", ".join(f"{k}={v}" for k, v in sorted(lengths.items())))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-order", type=int, default=3, help="exhaustive sweep bound (4 takes ~5 s)")
    ap.add_argument("--random", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for n in range(1, args.max_order + 1):
        report(f"all tables of order {n}",
               census(FiniteSemigroup(t) for t in all_associative_tables(n)))
    rng = np.random.default_rng(args.seed)
    report("random", census(random_semigroup(rng) for _ in range(args.random)))


if __name__ == "__main__":
    main()
