"""What candidate-pool scoring costs and how pool size trades off.

Two quick studies on the toy trainer:

  1. per-phase wall time for random batching versus ratio-scored selection
     (the scoring overhead is the price of the method);
  2. a sweep of the candidate-pool ratio: a pool equal to the batch is
     plain random batching, larger pools cost more per iteration.
"""

import numpy as np

from batchlens import (InpaintingDataset, SelectorConfig, build_masks,
                       sweep_ratio, synthetic_dataset, timing_study)

SIZE, SEED = 16, 0


def make_sets():
    train_imgs = synthetic_dataset(384, size=SIZE, seed=SEED)
    test_imgs = synthetic_dataset(96, size=SIZE, seed=SEED + 5000)
    return (InpaintingDataset(train_imgs,
                              build_masks(384, SIZE, SIZE, "irregular", 0.25, SEED)),
            InpaintingDataset(test_imgs,
                              build_masks(96, SIZE, SIZE, "irregular", 0.25, SEED + 9999)))


def main():
    train_set, test_set = make_sets()
    config = SelectorConfig(b=8, big_batch_ratio=2.0, weights=(0.0, 0.0, 1.0),
                            seed=SEED)

    print("== per-phase wall time (median seconds over 200 iterations) ==")
    stats = timing_study(train_set, test_set, config,
                         ["random", "kawaguchi", "proposed"],
                         iterations=200, warmup=30, learning_rate=0.01)
    print(f"{'method':<11} {'score':>10} {'select':>10} {'update':>10} {'iteration':>10}")
    for method, row in stats.items():
        print(f"{method:<11} {row['score_seconds']:>10.6f} {row['select_seconds']:>10.6f} "
              f"{row['update_seconds']:>10.6f} {row['iter_seconds']:>10.6f}")
    overhead = stats["proposed"]["iter_seconds"] / stats["random"]["iter_seconds"] - 1.0
    print(f"ratio-scored selection adds {overhead * 100:.1f}% per iteration here\n")

    print("== candidate-pool ratio sweep (600 iterations each) ==")
    rows = sweep_ratio(train_set, test_set, config, [1.0, 1.5, 2.0, 3.0],
                       method="proposed", iterations=600, learning_rate=0.01,
                       test_every=601)
    print(f"{'ratio':>5} {'pool':>5} {'final test L1':>14} {'ms/iter':>9}")
    for row in rows:
        print(f"{row['ratio']:>5} {row['big_batch']:>5} {row['final_test_l1']:>14.4f} "
              f"{row['median_iter_seconds'] * 1e3:>9.3f}")
    print("\nA ratio of 1 degenerates to random batching; cost grows with the")
    print("pool while the quality gain flattens, which is why 2x is the default.")


if __name__ == "__main__":
    main()
