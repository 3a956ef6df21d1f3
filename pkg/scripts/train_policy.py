"""Train the footstep-residual policy and report the learning-curve improvement.

    python3 scripts/train_policy.py --out runs/train --steps 200000 --seed 0
"""
import argparse
import logging
import time
from dataclasses import replace
from pathlib import Path

from husl.learning import TrainConfig, train
from husl.learning.train import improvement


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="runs/train", help="directory for training.csv and policy.json")
    p.add_argument("--steps", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = TrainConfig()
    cfg = replace(base, learning=replace(base.learning, total_steps=args.steps, seed=args.seed))
    t0 = time.perf_counter()
    result = train(cfg, out / "training.csv", out / "policy.json")
    ret, length = improvement(result.rows)
    print(f"{args.steps} steps in {time.perf_counter() - t0:.0f} s: mean return {ret:+.1%}, "
          f"mean episode length {length:+.1%} (first vs last fifth)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
