#!/usr/bin/env python3
"""Three ways to pick an agent's neighbors, head to head.

A query agent is planted at latent position 1.0 in a [0, 5] box among 500
sampled agents ranking 2000 alternatives. The raw rank-distance baseline
(kt_knn) picks agents pulled toward the support boundary; the corrected
global-feature algorithm (global_knn) and the latent-space oracle pick agents
near the query. The demo prints each method's neighbor positions and the
error of its pairwise-preference votes.
"""

import numpy as np

from plknn import (
    ModelConfig,
    Population,
    feature_matrix,
    global_knn,
    kt_knn,
    oracle_knn,
    prediction_error,
    sample_pairs,
    sample_population,
    sample_rankings,
)
from plknn import rng


def main():
    seed, n, m, box, x_q, k = 0, 500, 2000, 5.0, 1.0, 10
    cfg = ModelConfig(n_agents=n, n_alternatives=m, dim=1, box=box, seed=seed)
    base = sample_population(cfg)
    pop = Population(
        agents=np.vstack([base.agents, [[x_q]]]), alternatives=base.alternatives
    )
    query = n
    print(f"{n} agents, {m} alternatives on [0, {box:g}], query planted at {x_q}")
    rankings = sample_rankings(pop, seed=seed)
    feats = feature_matrix(rankings, pairing_seed=seed)
    pairs = sample_pairs(m, 500, rng.substream(seed, rng.PAIR_SAMPLE, query))

    results = {
        "kt_knn": kt_knn(rankings, query, k),
        "global_knn": global_knn(feats, query, k=k),
        "oracle": oracle_knn(pop, query, k),
    }
    print(f"\n{'method':12s} {'neighbor positions (sorted)':42s} {'mean':>6s} {'vote err':>9s}")
    for name, ns in results.items():
        xs = np.sort(pop.agents[list(ns.members), 0])
        err = prediction_error(
            name, query, pop, rankings, pairs, k=k,
            features=feats if name == "global_knn" else None,
        )
        shown = " ".join(f"{x:.2f}" for x in xs)
        print(f"{name:12s} {shown:42s} {xs.mean():6.2f} {err:9.4f}")
    print("\nthe baseline's neighbors sit far below the query; the corrected")
    print("algorithm matches the oracle almost exactly.")


if __name__ == "__main__":
    main()
