"""Regenerate the toy collection bundled under src/drmm/data/toy.

    python scripts/make_toy_dataset.py [--out DIR]
"""

import argparse
from pathlib import Path

from drmm.synthetic import generate

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "drmm" / "data" / "toy"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=DEFAULT_OUT)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    col = generate(num_docs=200, num_queries=15, vocab_size=40, dim=16, seed=args.seed)
    # index and outputs go under the caller's output_dir, never into the package
    cfg = col.write(args.out, {"index_dir": None, "output_dir": None, "max_epochs": 15,
                               "patience": 3, "fisher_iterations": 20000})
    print(f"wrote {len(col.documents)} docs, {len(col.topics)} topics to {cfg.parent}")


if __name__ == "__main__":
    main()
