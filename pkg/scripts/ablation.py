"""Compare histogram modes and gating variants on one synthetic collection.

Every variant shares the collection, first-stage run and fold plan, so the
table isolates the effect of the input mapping and the term gate.

    python scripts/ablation.py --out runs/ablation
"""

import argparse
from pathlib import Path

from drmm.config import load_config
from drmm.pipeline import load_collection, run_experiment
from drmm.synthetic import generate

VARIANTS = ["CHxIDF", "NHxIDF", "LCHxIDF", "LCHxTV", "LCHxUNI", "KMAXxIDF"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/ablation"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--variants", nargs="+", default=VARIANTS)
    args = ap.parse_args()

    cfg = generate(seed=args.seed).write(args.out / "data")
    collection = load_collection(load_config(cfg))
    reports, baseline = [], None
    for variant in args.variants:
        config = load_config(cfg, {"variant": variant, "output_dir": str(args.out / variant),
                                   "fisher_iterations": "20000"})
        result = run_experiment(config, collection)
        reports.append(result.drmm)
        baseline = result.baseline
    print(baseline.table(reports))


if __name__ == "__main__":
    main()
