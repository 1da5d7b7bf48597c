"""Random transformation semigroups: kernel shape, orthodoxy and Rees checks.

    python scripts/random_kernels.py --count 500 --seed 20240611 --max-degree 5
"""
import argparse
import collections
import random
import time

from ellislab.finsemi import (
    Transformation, generate_semigroup, kernel, rees_decomposition, rees_mismatches,
    structure_groups, verify_kernel_laws,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--max-degree", type=int, default=5)
    ap.add_argument("--max-gens", type=int, default=3)
    ap.add_argument("--idempotent-rank", type=int, default=0,
                    help="if > 0, draw idempotent generators of this rank instead")
    ap.add_argument("--cap", type=int, default=5000)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    shapes = collections.Counter()
    mism = laws = non_orth = 0
    t0 = time.perf_counter()
    for _ in range(args.count):
        n = rng.randint(max(1, args.idempotent_rank), args.max_degree)
        gens = []
        for _ in range(rng.randint(1, args.max_gens)):
            if args.idempotent_rank:
                fixed = rng.sample(range(n), args.idempotent_rank)
                f = [rng.choice(fixed) for _ in range(n)]
                for x in fixed:
                    f[x] = x
            else:
                f = [rng.randrange(n) for _ in range(n)]
            gens.append(Transformation(tuple(f)))
        S = generate_semigroup(gens, cap=args.cap)
        ideals = kernel(S)
        rees = rees_decomposition(S, ideals=ideals)
        mism += len(rees_mismatches(S, rees))
        laws += not verify_kernel_laws(S, ideals).passed
        g = structure_groups(S, ideals=ideals)
        non_orth += not g.orthodox
        shapes[(len(rees.I), len(rees.Lambda), len(rees.H))] += 1
    dt = time.perf_counter() - t0
    print(f"{args.count} instances in {dt:.1f} s; Rees mismatches {mism}; "
          f"kernel-law failures {laws}; non-orthodox {non_orth}")
    print("most common (|I|, |Lambda|, |H|):")
    for shape, c in shapes.most_common(10):
        print(f"  {shape}: {c}")


if __name__ == "__main__":
    main()
