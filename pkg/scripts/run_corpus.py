"""Analyze every substitution in a directory and print one summary row each.

    python scripts/run_corpus.py [corpus_dir] [--json out.json]
"""
import argparse
import json
import pathlib
import time

from ellislab.classifier import analyze
from ellislab.substitution import parse_substitution

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus", nargs="?", default=str(ROOT / "corpus"))
    ap.add_argument("--level", type=int, default=24)
    ap.add_argument("--samples", type=int, default=32)
    ap.add_argument("--json", help="also write the full reports here")
    args = ap.parse_args()

    rows, full = [], {}
    for path in sorted(pathlib.Path(args.corpus).glob("*.sub")):
        theta = parse_substitution(path.read_text())
        t0 = time.perf_counter()
        rep = analyze(theta, args.level, args.samples)
        dt = time.perf_counter() - t0
        inv = rep.invariants
        rows.append((path.stem, theta.length, theta.size, rep.columns.bijective, inv.height,
                     inv.coincidence_rank, rep.gamma.gamma_trivial, rep.singular.singular_set_descriptor,
                     rep.verdict, f"{dt:.2f}"))
        full[path.stem] = rep.to_json()

    head = ("name", "ell", "|A|", "bij", "height", "cr", "gamma_triv", "singular", "verdict", "sec")
    widths = [max(len(str(r[i])) for r in rows + [head]) for i in range(len(head))]
    for r in [head] + rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(r, widths)))
    if args.json:
        pathlib.Path(args.json).write_text(json.dumps(full, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
