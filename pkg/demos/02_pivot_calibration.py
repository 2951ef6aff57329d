"""Where the pivot lands on a lopsided complexity distribution.

The pivot is the smallest complexity inside the largest density cluster,
not the population mean. On a distribution with a dense easy bulk and a
sparse hard tail, the mean drifts toward the tail while the pivot stays
anchored at the bulk's lower edge, which is what keeps easy samples
selectable.
"""

import numpy as np

from batchlens import NOISE, estimate_pivot


def main():
    rng = np.random.default_rng(21)
    bulk = rng.normal(0.25, 0.03, 300)          # the easy majority
    tail = rng.uniform(0.6, 1.0, 60)            # scattered hard samples
    values = np.clip(np.concatenate([bulk, tail]), 0.0, 1.0)

    result = estimate_pivot(values)
    labels = result.labels
    n_clusters = len(set(labels[labels != NOISE].tolist()))
    largest = labels == result.largest_cluster

    print(f"population: {values.size} values "
          f"(bulk ~N(0.25, 0.03), tail ~U(0.6, 1.0))")
    print(f"clusters found:      {n_clusters} (+ {int(np.sum(labels == NOISE))} noise points)")
    print(f"largest cluster:     {int(largest.sum())} members, "
          f"range [{values[largest].min():.4f}, {values[largest].max():.4f}]")
    print(f"pivot (cluster min): {result.pivot:.4f}")
    print(f"population mean:     {values.mean():.4f}")
    print(f"population median:   {np.median(values):.4f}")
    print()
    print("A sample's selection score divides its loss by the distance of its")
    print("complexity from the pivot, so scores peak near the bulk's lower edge")
    print("rather than at the distribution's center of mass.")


if __name__ == "__main__":
    main()
