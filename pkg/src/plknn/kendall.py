"""Kendall-tau machinery: exact distances, pair-sampled estimators, and the
global feature matrix with its agent distance.

Convention note: the per-pair indicator S_k is 1 when the pair is DISCORDANT
between the two rankings (product of rank differences negative). Only this
direction makes the pair-sampled estimator unbiased for the expected
normalized Kendall-tau distance, which is what every downstream bound needs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import rng
from .rankings import Ranking, rank_matrix


def _shared_positions(r1: Ranking, r2: Ranking) -> tuple[np.ndarray, np.ndarray]:
    shared = np.intersect1d(r1.observed, r2.observed, assume_unique=True)
    if shared.size < 2:
        raise ValueError("rankings share fewer than 2 alternatives")
    return r1.positions_of(shared), r2.positions_of(shared)


def kendall_tau_naive(r1: Ranking, r2: Ranking) -> int:
    """Reference O(s^2) discordant-pair count over the shared alternatives."""
    p1, p2 = _shared_positions(r1, r2)
    d1 = np.sign(p1[:, None] - p1[None, :])
    d2 = np.sign(p2[:, None] - p2[None, :])
    return int(np.sum(d1 * d2 < 0) // 2)


def kendall_tau(r1: Ranking, r2: Ranking) -> int:
    """Discordant-pair count over the shared alternatives, O(s log s)."""
    p1, p2 = _shared_positions(r1, r2)
    return _discordant_from_positions(p1, p2)


def _discordant_from_positions(p1: np.ndarray, p2: np.ndarray) -> int:
    s = p1.size
    if s == 2:
        return int((p1[0] - p1[1]) * (p2[0] - p2[1]) < 0)
    # Rankings are strict orders, so there are no ties and tau-b reduces to
    # (concordant - discordant) / C(s, 2); the count recovers exactly.
    tau = stats.kendalltau(p1, p2).statistic
    pairs = s * (s - 1) // 2
    return int(round(pairs * (1.0 - tau) / 2.0))


def nkt(r1: Ranking, r2: Ranking) -> float:
    """Normalized Kendall-tau distance: discordant pairs over C(s, 2)."""
    p1, p2 = _shared_positions(r1, r2)
    pairs = p1.size * (p1.size - 1) // 2
    return _discordant_from_positions(p1, p2) / pairs


def make_pairing(alt_ids, pairing_seed: int) -> np.ndarray:
    """Disjoint pairs (k, 2) formed after a seed-derived shuffle of ``alt_ids``.

    The shuffle removes any accidental order dependence; an odd leftover
    alternative is dropped.
    """
    alt_ids = np.asarray(alt_ids, dtype=np.int64)
    perm = rng.substream(pairing_seed, rng.PAIRING).permutation(alt_ids.size)
    shuffled = alt_ids[perm]
    return shuffled[: 2 * (alt_ids.size // 2)].reshape(-1, 2)


def enkt_feature(r1: Ranking, r2: Ranking, pairing) -> float:
    """Mean per-pair discordance indicator over disjoint alternative pairs.

    Each pair must be fully observed by both rankings; pairs must not share
    alternatives. The result is a multiple of 1/len(pairing) in [0, 1] and is
    an unbiased estimate of E[NKT(r1, r2)] for i.i.d. alternatives.
    """
    pairing = np.asarray(pairing, dtype=np.int64)
    if pairing.ndim != 2 or pairing.shape[1] != 2 or pairing.shape[0] == 0:
        raise ValueError("pairing must be a nonempty (k, 2) index array")
    flat = pairing.ravel()
    if np.unique(flat).size != flat.size:
        raise ValueError("pairing contains overlapping pairs")
    for r in (r1, r2):
        if np.setdiff1d(flat, r.observed).size:
            raise ValueError("pairing contains alternatives not observed by both rankings")
    a1 = r1.positions_of(pairing[:, 0]) - r1.positions_of(pairing[:, 1])
    a2 = r2.positions_of(pairing[:, 0]) - r2.positions_of(pairing[:, 1])
    return float(np.mean(a1 * a2 < 0))


@dataclass(frozen=True)
class FeatureVector:
    """One agent's row of pair-sampled discordance frequencies."""

    owner: int
    values: np.ndarray  # length n; entry at owner is NaN

    def __getitem__(self, j: int) -> float:
        if j == self.owner:
            raise KeyError("feature against itself is undefined")
        return float(self.values[j])


@dataclass(frozen=True)
class FeatureMatrix:
    """Symmetric (n, n) matrix of pair-sampled NKT estimates F[i, j].

    The diagonal is held at 0 and excluded by every consumer. ``n_pairs`` is
    the number of disjoint alternative pairs behind each entry (full
    observation fast path); entries built from per-pair intersections record
    ``n_pairs = 0``.
    """

    values: np.ndarray
    n_pairs: int

    @property
    def n_agents(self) -> int:
        return self.values.shape[0]

    def vector(self, i: int) -> FeatureVector:
        row = self.values[i].astype(float).copy()
        row[i] = np.nan
        return FeatureVector(owner=int(i), values=row)

    def vectors(self) -> list[FeatureVector]:
        return [self.vector(i) for i in range(self.n_agents)]


def feature_matrix(rankings: list[Ranking], pairing_seed: int) -> FeatureMatrix:
    """All-pairs feature matrix F[i, j] = enkt_feature(R_i, R_j, shared pairing).

    When every agent observes the same alternatives the pairing is shared and
    the matrix is computed by one sign-matrix product. With partial
    observations the pairing for (i, j) is formed inside the intersection
    O_i and O_j, pairing consecutive elements of the shared shuffle order;
    any intersection smaller than 2 is an error.
    """
    n = len(rankings)
    if n < 3:
        raise ValueError("feature matrix needs at least 3 agents")
    first = rankings[0].observed
    full = all(
        len(r.observed) == len(first) and np.array_equal(r.observed, first)
        for r in rankings[1:]
    )
    if full:
        pairing = make_pairing(first, pairing_seed)
        matrix = rank_matrix(rankings, m=int(first[-1]) + 1)
        signs = np.sign(matrix[:, pairing[:, 0]] - matrix[:, pairing[:, 1]]).astype(np.float32)
        p = pairing.shape[0]
        agree = signs @ signs.T  # in [-p, p]
        values = (p - agree) / (2.0 * p)
        np.fill_diagonal(values, 0.0)
        return FeatureMatrix(values=values.astype(float), n_pairs=p)

    shuffle = make_pairing_order(rankings, pairing_seed)
    values = np.zeros((n, n), dtype=float)
    for i in range(n):
        for j in range(i + 1, n):
            shared = np.intersect1d(rankings[i].observed, rankings[j].observed, assume_unique=True)
            if shared.size < 2:
                raise ValueError(f"agents {i} and {j} share fewer than 2 alternatives")
            ordered = shared[np.argsort(shuffle[shared], kind="stable")]
            pairing = ordered[: 2 * (ordered.size // 2)].reshape(-1, 2)
            values[i, j] = values[j, i] = enkt_feature(rankings[i], rankings[j], pairing)
    return FeatureMatrix(values=values, n_pairs=0)


def make_pairing_order(rankings: list[Ranking], pairing_seed: int) -> np.ndarray:
    """Shuffle positions for every alternative id seen by any ranking."""
    m = 1 + max(int(r.observed[-1]) for r in rankings)
    perm = rng.substream(pairing_seed, rng.PAIRING).permutation(m)
    order = np.empty(m, dtype=np.int64)
    order[perm] = np.arange(m)
    return order


def agent_distance(features: FeatureMatrix, i: int, j: int) -> float:
    """Mean absolute feature gap over shared coordinates k not in {i, j}.

    The mean (rather than a sum) keeps threshold semantics independent of the
    number of agents.
    """
    if i == j:
        raise ValueError("agent distance to itself is undefined")
    n = features.n_agents
    if n < 3:
        raise ValueError("agent distance needs at least 3 agents")
    mask = np.ones(n, dtype=bool)
    mask[[i, j]] = False
    diff = np.abs(features.values[i] - features.values[j])
    return float(diff[mask].mean())


def agent_distances_from(features: FeatureMatrix, i: int) -> np.ndarray:
    """Vector of agent_distance(features, i, j) for all j (NaN at i)."""
    n = features.n_agents
    vals = features.values
    diff = np.abs(vals[i][None, :] - vals)  # (n, n)
    # remove the i and j columns from each row's mean
    total = diff.sum(axis=1) - diff[:, i] - np.diag(diff)
    out = total / (n - 2)
    out[i] = np.nan
    return out


def write_features_csv(features: FeatureMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write("i,j,f\n")
        n = features.n_agents
        for i in range(n):
            for j in range(n):
                if i != j:
                    fp.write(f"{i},{j},{features.values[i, j]:.17g}\n")


def read_features_csv(path) -> FeatureMatrix:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    body = [ln.split(",") for ln in lines[1:] if ln.strip()]
    n = 1 + max(int(row[0]) for row in body)
    values = np.zeros((n, n), dtype=float)
    for i_s, j_s, f_s in body:
        values[int(i_s), int(j_s)] = float(f_s)
    return FeatureMatrix(values=values, n_pairs=0)


def write_features_binary(features: FeatureMatrix, path) -> None:
    """Row-major float64 dump with an 8-byte little-endian header holding n."""
    with open(path, "wb") as fp:
        fp.write(struct.pack("<Q", features.n_agents))
        fp.write(np.ascontiguousarray(features.values, dtype="<f8").tobytes())


def read_features_binary(path) -> FeatureMatrix:
    raw = Path(path).read_bytes()
    (n,) = struct.unpack("<Q", raw[:8])
    values = np.frombuffer(raw[8:], dtype="<f8").reshape(n, n).copy()
    return FeatureMatrix(values=values, n_pairs=0)
