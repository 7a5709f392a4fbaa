"""Fit single-hidden-layer V-MLPs to targets on the unit ball for several
algebras and print the train MSE and grid sup error of each run.

    python scripts/approximation_demo.py --algebras quaternion complex dual --target square
"""

import argparse
import time
import warnings

from vnets.algebra import BUILTINS, builtin_algebra
from vnets.training import DEMO_CONFIG, TARGETS, TrainConfig, approximation_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--algebras", nargs="+", default=["quaternion", "complex", "hyperbolic", "dual"],
                    choices=sorted(BUILTINS))
    ap.add_argument("--target", default="square", choices=TARGETS)
    ap.add_argument("--hidden", type=int, default=32)
    ap.add_argument("--iterations", type=int, default=DEMO_CONFIG.iterations)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    args = ap.parse_args()

    print(f"{'algebra':<12}{'seed':>5}{'train MSE':>12}{'sup error':>11}{'seconds':>9}")
    for name in args.algebras:
        alg = builtin_algebra(name)
        for seed in args.seeds:
            cfg = TrainConfig(learning_rate=DEMO_CONFIG.learning_rate, iterations=args.iterations,
                              momentum=DEMO_CONFIG.momentum, seed=seed)
            start = time.perf_counter()
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                report = approximation_demo(alg, args.target, hidden=args.hidden, cfg=cfg)
            flag = "  (degenerate)" if caught else ""
            print(f"{name:<12}{seed:>5}{report.final_train_mse:>12.2e}{report.sup_error_on_grid:>11.3f}"
                  f"{time.perf_counter() - start:>9.1f}{flag}")


if __name__ == "__main__":
    main()
