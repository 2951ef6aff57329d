"""Test-loss curves of the toy inpainter under three batch-selection rules.

Trains the linear stencil predictor on the synthetic mixture (60% smooth
ramps, 40% noise fields) with random batching, subset loss top-k, and the
loss-to-complexity-ratio rule, then prints the test curve side by side.
The ratio rule should descend fastest early because its batches stay on
the learnable samples without abandoning any complexity band.
"""

import numpy as np

from batchlens import (InpaintingDataset, SelectorConfig, build_masks,
                       synthetic_dataset, train)

SIZE, N_TRAIN, N_TEST = 16, 512, 128
ITERATIONS, LR, SEED = 2000, 0.01, 0


def make_sets(seed):
    train_imgs = synthetic_dataset(N_TRAIN, size=SIZE, seed=seed)
    test_imgs = synthetic_dataset(N_TEST, size=SIZE, seed=seed + 5000)
    return (InpaintingDataset(train_imgs,
                              build_masks(N_TRAIN, SIZE, SIZE, "irregular", 0.25, seed)),
            InpaintingDataset(test_imgs,
                              build_masks(N_TEST, SIZE, SIZE, "irregular", 0.25, seed + 9999)))


def main():
    train_set, test_set = make_sets(SEED)
    config = SelectorConfig(b=8, big_batch_ratio=2.0, weights=(0.0, 0.0, 1.0),
                            seed=SEED)
    curves = {}
    for method in ("random", "kawaguchi", "proposed"):
        result = train(train_set, test_set, config, method, ITERATIONS,
                       learning_rate=LR, test_every=100,
                       mask_mode="irregular", mask_ratio=0.25)
        curves[method] = dict(result.test_curve())
        print(f"trained {method:<10} final test L1 = {result.final_test_loss:.4f} "
              f"({result.seconds:.1f}s)")

    print(f"\n{'iter':>5} {'random':>8} {'loss top-k':>11} {'ratio rule':>11}")
    for it in sorted(curves["random"]):
        print(f"{it:>5} {curves['random'][it]:>8.4f} "
              f"{curves['kawaguchi'][it]:>11.4f} {curves['proposed'][it]:>11.4f}")

    early = {m: np.mean([v for k, v in c.items() if k <= 500])
             for m, c in curves.items()}
    print(f"\nmean test L1 over the first 500 iterations:")
    for m, v in sorted(early.items(), key=lambda kv: kv[1]):
        print(f"  {m:<10} {v:.4f}")


if __name__ == "__main__":
    main()
