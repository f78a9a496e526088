"""Agent-neighbor algorithms and pairwise preference prediction.

Three ways to pick an agent's neighbors: the raw rank-distance baseline
(kt_knn, provably biased toward the support boundary under nondeterministic
preferences), the corrected global-feature algorithm (global_knn), and the
latent-space oracle (oracle_knn, simulation only). Predictions are made by
neighbor voting on pairwise preferences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kendall import FeatureMatrix, agent_distances_from, kendall_tau
from .latent import Population, pairwise_prob
from .rankings import Ranking, rank_matrix

METHODS = ("kt_knn", "global_knn", "oracle")


@dataclass(frozen=True)
class NeighborSet:
    """Result of a neighbor query with provenance.

    ``selector`` is ("top_k", k) or ("threshold", eps). In top-k mode
    ``members`` has min(k, n-1) entries; in threshold mode it holds every
    agent within the threshold. The query never appears among the members.
    """

    query: int
    members: tuple[int, ...]
    method: str
    selector: tuple[str, float]

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.query in self.members:
            raise ValueError("query must not be a member of its own neighbor set")

    def to_dict(self) -> dict:
        mode, value = self.selector
        return {
            "query": self.query,
            "members": list(self.members),
            "method": self.method,
            "selector": {"mode": mode, ("k" if mode == "top_k" else "eps"): value},
        }


def _top_k(distances: np.ndarray, query: int, k: int) -> tuple[int, ...]:
    """Indices of the k smallest distances, query excluded, ties by index."""
    n = distances.size
    order = np.lexsort((np.arange(n), distances))
    order = order[order != query]
    return tuple(int(j) for j in order[: min(k, n - 1)])


def kt_knn(rankings: list[Ranking], query: int, k: int) -> NeighborSet:
    """The k agents whose observed rankings are closest to the query's in raw
    Kendall-tau distance, ties broken by ascending agent index."""
    n = len(rankings)
    if n < k + 1:
        raise ValueError("need at least k+1 agents")
    distances = np.array(
        [kendall_tau(rankings[query], rankings[j]) if j != query else np.inf for j in range(n)],
        dtype=float,
    )
    return NeighborSet(
        query=int(query),
        members=_top_k(distances, query, k),
        method="kt_knn",
        selector=("top_k", k),
    )


def global_knn(
    features: FeatureMatrix,
    query: int,
    k: int | None = None,
    eps: float | None = None,
) -> NeighborSet:
    """Neighbors under the global-feature agent distance.

    Threshold mode (``eps``) returns every agent within distance eps, the
    form the correctness guarantee addresses; top-k mode exists for
    experiment parity. Exactly one selector must be given.
    """
    if (k is None) == (eps is None):
        raise ValueError("specify exactly one of k or eps")
    if features.n_agents < 3:
        raise ValueError("need at least 3 agents")
    distances = agent_distances_from(features, query)
    if eps is not None:
        members = tuple(
            int(j)
            for j in range(features.n_agents)
            if j != query and distances[j] <= eps
        )
        return NeighborSet(int(query), members, "global_knn", ("threshold", float(eps)))
    distances = np.where(np.isnan(distances), np.inf, distances)
    return NeighborSet(int(query), _top_k(distances, query, k), "global_knn", ("top_k", k))


def oracle_knn(population: Population, query: int, k: int) -> NeighborSet:
    """The k agents truly closest to the query in latent space."""
    diffs = population.agents - population.agents[query]
    distances = np.linalg.norm(diffs, axis=1)
    distances[query] = np.inf
    return NeighborSet(int(query), _top_k(distances, query, k), "oracle", ("top_k", k))


def predict_pair(neighbors: NeighborSet, rankings: list[Ranking], a: int, b: int) -> float:
    """Fraction of usable neighbors ranking alternative ``a`` above ``b``.

    Neighbors that do not observe both alternatives are skipped; at least one
    usable neighbor is required.
    """
    votes = []
    for j in neighbors.members:
        r = rankings[j]
        try:
            votes.append(r.rank_of(a) < r.rank_of(b))
        except KeyError:
            continue
    if not votes:
        raise ValueError("no neighbor ranks both alternatives")
    return float(np.mean(votes))


def sample_pairs(m: int, count: int, generator: np.random.Generator) -> np.ndarray:
    """(count, 2) array of uniformly sampled distinct alternative pairs."""
    a = generator.integers(0, m, size=count)
    b = generator.integers(0, m - 1, size=count)
    b = np.where(b >= a, b + 1, b)
    return np.stack([a, b], axis=1)


def prediction_error(
    method: str,
    query: int,
    population: Population,
    rankings: list[Ranking],
    pair_sample: np.ndarray,
    k: int | None = None,
    eps: float | None = None,
    features: FeatureMatrix | None = None,
) -> float:
    """Mean absolute deviation between the neighbor vote and the ground-truth
    pairwise probability over the sampled alternative pairs."""
    pair_sample = np.asarray(pair_sample, dtype=np.int64)
    if pair_sample.size == 0:
        raise ValueError("pair sample must be nonempty")
    if method == "kt_knn":
        neighbors = kt_knn(rankings, query, k)
    elif method == "global_knn":
        if features is None:
            raise ValueError("global_knn needs a feature matrix")
        neighbors = global_knn(features, query, k=k, eps=eps)
    elif method == "oracle":
        neighbors = oracle_knn(population, query, k)
    else:
        raise ValueError(f"unknown method {method!r}")

    matrix = rank_matrix(rankings, m=population.n_alternatives)
    votes = vote_probabilities(matrix, neighbors.members, pair_sample)
    x_q = population.agents[query]
    truth = np.array(
        [
            pairwise_prob(x_q, population.alternatives[a], population.alternatives[b])
            for a, b in pair_sample
        ]
    )
    return float(np.mean(np.abs(votes - truth)))


def vote_probabilities(matrix: np.ndarray, members, pair_sample: np.ndarray) -> np.ndarray:
    """Per-pair fraction of usable members ranking a above b (vectorized)."""
    members = np.asarray(members, dtype=np.int64)
    pos_a = matrix[np.ix_(members, pair_sample[:, 0])]
    pos_b = matrix[np.ix_(members, pair_sample[:, 1])]
    usable = (pos_a >= 0) & (pos_b >= 0)
    counts = usable.sum(axis=0)
    if np.any(counts == 0):
        raise ValueError("a sampled pair has no usable neighbor")
    prefer = ((pos_a < pos_b) & usable).sum(axis=0)
    return prefer / counts
