"""Two-step alternative-neighbor algorithm: sign-statistic candidates, then
split-cluster filtering of the mirror cluster.

Everything here reads only the rankings' columns for the query alternative
and its candidates; no global feature matrix is involved. The filtering step
assumes a 1-D latent geometry (the mirror point of y is the reflection
through the box midpoint); in higher dimensions only the candidate stage is
meaningful and callers should treat it as experimental.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rankings import Ranking, rank_matrix


@dataclass(frozen=True)
class CandidateSet:
    """Alternatives whose sign distance to the query is below 1/ell.

    The query belongs to its own candidate set by convention (its
    self-distance is undefined).
    """

    query: int
    members: tuple[int, ...]
    ell: float

    def __post_init__(self):
        if self.query not in self.members:
            raise ValueError("candidate set must contain its query")


@dataclass(frozen=True)
class HalfStat:
    """Fraction of agents ranking two alternatives in the same half."""

    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("half statistic must lie in [0, 1]")


def _positions(rankings, m: int | None = None) -> np.ndarray:
    """Rankings may be given as a list or directly as a position matrix
    ((n, m), -1 marking unobserved), which large-population callers prefer."""
    if isinstance(rankings, np.ndarray):
        if rankings.ndim != 2:
            raise ValueError("position matrix must be 2-D")
        return rankings
    return rank_matrix(rankings, m=m)


def sign_distance(rankings: list[Ranking], a: int, b: int) -> float:
    """Absolute mean of the per-agent preference sign between two alternatives.

    Agent k contributes s_k = +1 when it ranks ``a`` below ``b`` and -1
    otherwise, so exchangeable alternatives give mean 0. Agents that do not
    rank both are skipped; at least one must rank both.
    """
    if a == b:
        raise ValueError("sign distance of an alternative against itself is undefined")
    matrix = _positions(rankings)
    value = float(_sign_distance_columns(matrix, a)[b])
    if math.isnan(value):
        raise ValueError(f"no agent ranks both {a} and {b}")
    return value


def _sign_distance_columns(matrix: np.ndarray, a: int) -> np.ndarray:
    """Vector of sign distances from alternative ``a`` to every alternative.

    Entry ``a`` is NaN (self-pair undefined); entries with no co-ranking
    agent are NaN as well.
    """
    pos_a = matrix[:, a]
    usable = (pos_a[:, None] >= 0) & (matrix >= 0)
    s = np.where(pos_a[:, None] > matrix, 1.0, -1.0)
    s = np.where(usable, s, 0.0)
    counts = usable.sum(axis=0)
    with np.errstate(invalid="ignore"):
        out = np.abs(s.sum(axis=0)) / counts
    out[counts == 0] = np.nan
    out[a] = np.nan
    return out


def candidate_set(rankings: list[Ranking], a: int, ell: float) -> CandidateSet:
    """All alternatives whose sign distance to ``a`` is at most 1/ell."""
    if ell < 1:
        raise ValueError("ell must be >= 1")
    matrix = _positions(rankings)
    distances = _sign_distance_columns(matrix, a)
    members = [a]
    for b in range(matrix.shape[1]):
        if b != a and not np.isnan(distances[b]) and distances[b] <= 1.0 / ell:
            members.append(b)
    return CandidateSet(query=int(a), members=tuple(sorted(members)), ell=float(ell))


def _first_half(matrix: np.ndarray) -> np.ndarray:
    """Boolean first-half membership per (agent, alternative).

    For an agent observing s alternatives the first half is positions
    1..ceil(s/2) (1-based); unobserved entries are False.
    """
    sizes = (matrix >= 0).sum(axis=1)
    boundary = np.ceil(sizes / 2.0).astype(np.int64)
    return (matrix >= 0) & (matrix < boundary[:, None])


def half_stat(rankings: list[Ranking], a: int, b: int) -> HalfStat:
    """Fraction of co-ranking agents placing ``a`` and ``b`` in the same half."""
    matrix = _positions(rankings)
    usable = (matrix[:, a] >= 0) & (matrix[:, b] >= 0)
    if not usable.any():
        raise ValueError("no agent ranks both alternatives")
    halves = _first_half(matrix)
    same = halves[usable, a] == halves[usable, b]
    return HalfStat(value=float(np.mean(same)))


def two_means_1d(values) -> tuple[np.ndarray, np.ndarray]:
    """Exact 1-D 2-means: labels (0 = smaller centroid) and the two centroids.

    Optimal clusters are contiguous in sorted order, so the best split is the
    prefix cut minimizing within-cluster sum of squares; resolved by a single
    scan over prefix sums.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("need at least 2 values")
    order = np.argsort(values, kind="stable")
    v = values[order]
    p = np.size(v)
    csum = np.cumsum(v)
    csq = np.cumsum(v * v)
    sizes = np.arange(1, p, dtype=float)  # left cluster sizes 1..p-1
    left_sum = csum[:-1]
    left_sse = csq[:-1] - left_sum**2 / sizes
    right_sum = csum[-1] - left_sum
    right_sse = (csq[-1] - csq[:-1]) - right_sum**2 / (p - sizes)
    cut = int(np.argmin(left_sse + right_sse))
    labels_sorted = np.zeros(p, dtype=np.int64)
    labels_sorted[cut + 1 :] = 1
    centroids = np.array([v[: cut + 1].mean(), v[cut + 1 :].mean()])
    labels = np.empty(p, dtype=np.int64)
    labels[order] = labels_sorted
    return labels, centroids


def split_cluster(rankings: list[Ranking], a: int, candidates: CandidateSet) -> set[int]:
    """Keep the candidate cluster co-located with the query alternative.

    Computes the half statistic for every candidate, 2-means-clusters the 1-D
    values exactly, and returns the cluster with the larger centroid (agents
    put co-located alternatives in the same half far more often than mirror
    images). When the centroid gap falls below 2/sqrt(n_agents), the noise
    scale of the statistic, the clusters are indistinguishable - the query
    sits near the box midpoint and no filtering is needed - so the whole
    candidate set is returned.
    """
    members = [int(b) for b in candidates.members]
    if not members:
        raise ValueError("candidate set is empty")
    others = [b for b in members if b != a]
    if len(others) < 2:
        return set(members)
    matrix = _positions(rankings)
    halves = _first_half(matrix)
    usable_a = matrix[:, a] >= 0
    stats = np.empty(len(others), dtype=float)
    for idx, b in enumerate(others):
        usable = usable_a & (matrix[:, b] >= 0)
        if not usable.any():
            raise ValueError(f"no agent ranks both {a} and {b}")
        stats[idx] = np.mean(halves[usable, a] == halves[usable, b])
    # the query itself is always kept; its degenerate self-statistic (1.0)
    # must not take part in the clustering
    labels, centroids = two_means_1d(stats)
    gap = abs(centroids[1] - centroids[0])
    if gap < 2.0 / math.sqrt(len(rankings)):
        return set(members)
    keep = int(np.argmax(centroids))
    kept = {b for b, lab in zip(others, labels) if lab == keep}
    if a in members:
        kept.add(a)
    return kept


def alt_neighbors(rankings: list[Ranking], a: int, ell: float) -> set[int]:
    """Two-step neighbor set for an alternative: candidates, then filtering."""
    return split_cluster(rankings, a, candidate_set(rankings, a, ell))
