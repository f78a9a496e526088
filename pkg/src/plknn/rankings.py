"""Plackett-Luce ranking sampler and exact order probabilities.

Rankings are strict total orders over an observed subset of alternative
indices. Sampling follows the sequential-choice model: at each step the next
alternative is drawn from the remaining pool with probability proportional to
its utility. The Gumbel-max sampler (rank by log-utility plus i.i.d. Gumbel
noise) is the default because it is a single argsort; the sequential roulette
sampler realizes the product formula directly and the two are cross-checked
in the tests.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng
from .latent import Population

_MAX_EXACT_M = 8


@dataclass(frozen=True, eq=False)
class Ranking:
    """A strict order over an observed subset of alternative indices.

    ``order`` lists alternative indices best-first; ``observed`` is the same
    set sorted ascending. ``rank_of`` is 1-based.
    """

    order: np.ndarray
    observed: np.ndarray

    @classmethod
    def from_order(cls, order) -> "Ranking":
        order = np.asarray(order, dtype=np.int64)
        if order.ndim != 1 or order.size == 0:
            raise ValueError("order must be a nonempty 1-D index sequence")
        observed = np.sort(order)
        if observed[0] < 0 or np.any(observed[1:] == observed[:-1]):
            raise ValueError("order must be a duplicate-free list of nonnegative indices")
        return cls(order=order, observed=observed)

    def __len__(self) -> int:
        return int(self.order.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Ranking):
            return NotImplemented
        return np.array_equal(self.order, other.order)

    def _positions(self) -> dict[int, int]:
        cached = self.__dict__.get("_pos_cache")
        if cached is None:
            cached = {int(j): p for p, j in enumerate(self.order)}
            object.__setattr__(self, "_pos_cache", cached)
        return cached

    def rank_of(self, j: int) -> int:
        """1-based position of alternative ``j`` within this ranking."""
        try:
            return self._positions()[int(j)] + 1
        except KeyError:
            raise KeyError(f"alternative {j} is not observed by this ranking") from None

    def positions_of(self, indices) -> np.ndarray:
        """0-based positions of the given observed alternatives."""
        pos = self._positions()
        return np.fromiter((pos[int(j)] for j in indices), dtype=np.int64, count=len(indices))


def _utilities(x: np.ndarray, alternatives: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alternatives = np.asarray(alternatives, dtype=float)
    if alternatives.ndim == 1:
        alternatives = alternatives[:, None]
    if alternatives.shape[0] == 0:
        raise ValueError("alternative list must be nonempty")
    if alternatives.shape[1] != x.shape[-1]:
        raise ValueError("dimension mismatch between agent and alternatives")
    return np.exp(-np.linalg.norm(alternatives - x[None, :], axis=1))


def _gumbel_order(log_u: np.ndarray, generator: np.random.Generator) -> np.ndarray:
    u = generator.random(log_u.shape[-1])
    perceived = log_u - np.log(-np.log(u))
    return np.argsort(-perceived, kind="stable")


def sample_ranking(x, alternatives, rng_stream: np.random.Generator, method: str = "gumbel") -> Ranking:
    """Sample one full ranking of ``alternatives`` for the agent at ``x``.

    ``method`` selects between the Gumbel-max sampler and the sequential
    roulette sampler; both realize the same order distribution.
    """
    u = _utilities(x, alternatives)
    if method == "gumbel":
        order = _gumbel_order(np.log(u), rng_stream)
    elif method == "sequential":
        order = _sequential_order(u, rng_stream)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    return Ranking.from_order(order)


def _sequential_order(utilities: np.ndarray, generator: np.random.Generator) -> np.ndarray:
    weights = utilities.astype(float).copy()
    m = weights.size
    order = np.empty(m, dtype=np.int64)
    alive = np.arange(m)
    for step in range(m):
        cum = np.cumsum(weights[alive])
        pick = np.searchsorted(cum, generator.random() * cum[-1], side="right")
        pick = min(pick, alive.size - 1)
        order[step] = alive[pick]
        alive = np.delete(alive, pick)
    return order


def sample_rankings(
    population: Population,
    seed: int,
    c_obs: float = 1.0,
    method: str = "gumbel",
) -> list[Ranking]:
    """Sample every agent's ranking from its own derived substream.

    Agent ``i`` draws from substream (seed, RANKINGS, i), so rankings can be
    generated in parallel with results identical to serial execution. With
    ``c_obs > 1`` each agent reveals its order on a uniformly random subset of
    floor(m / c_obs) alternatives, chosen from substream (seed, OBSERVATION, i).
    """
    if c_obs < 1.0:
        raise ValueError("c_obs must be >= 1")
    m = population.n_alternatives
    n_obs = int(m // c_obs)
    if n_obs < 1:
        raise ValueError("observation fraction leaves no alternatives")
    dists = np.linalg.norm(
        population.agents[:, None, :] - population.alternatives[None, :, :], axis=2
    )
    out = []
    for i in range(population.n_agents):
        gen = rng.substream(seed, rng.RANKINGS, i)
        if method == "gumbel":
            order = _gumbel_order(-dists[i], gen)
        else:
            order = _sequential_order(np.exp(-dists[i]), gen)
        if n_obs < m:
            subset = rng.substream(seed, rng.OBSERVATION, i).choice(m, size=n_obs, replace=False)
            keep = np.zeros(m, dtype=bool)
            keep[subset] = True
            order = order[keep[order]]
        out.append(Ranking.from_order(order))
    return out


def exact_order_prob(x, alternatives, order) -> float:
    """Exact probability of producing ``order`` under the sequential model.

    Guarded to m <= 8: full-distribution checks enumerate all m! orders.
    """
    u = _utilities(x, alternatives)
    m = u.size
    if m > _MAX_EXACT_M:
        raise ValueError(f"exact order probabilities are limited to m <= {_MAX_EXACT_M}")
    order = np.asarray(order, dtype=np.int64)
    if sorted(order.tolist()) != list(range(m)):
        raise ValueError("order must be a permutation of range(m)")
    chosen = u[order]
    remaining = np.cumsum(chosen[::-1])[::-1]
    return float(np.prod(chosen / remaining))


def restrict_ranking(r: Ranking, subset) -> Ranking:
    """Induced order on ``subset``; relative order is preserved."""
    subset = np.asarray(sorted(int(j) for j in set(np.asarray(subset).tolist())), dtype=np.int64)
    if subset.size == 0:
        raise ValueError("subset must be nonempty")
    missing = np.setdiff1d(subset, r.observed, assume_unique=True)
    if missing.size:
        raise ValueError(f"subset contains unobserved alternatives: {missing.tolist()}")
    mask = np.isin(r.order, subset)
    return Ranking.from_order(r.order[mask])


def rank_matrix(rankings: list[Ranking], m: int | None = None) -> np.ndarray:
    """(n, m) matrix of 0-based positions; -1 marks unobserved alternatives."""
    if m is None:
        m = 1 + max(int(r.observed[-1]) for r in rankings)
    out = np.full((len(rankings), m), -1, dtype=np.int64)
    for i, r in enumerate(rankings):
        out[i, r.order] = np.arange(len(r))
    return out


def positions_matrix(
    population: Population, seed: int, chunk: int = 8192, stream: str = "per_agent"
) -> np.ndarray:
    """Full-observation position matrix computed in agent chunks, so
    populations of hundreds of thousands of agents fit in memory.

    With ``stream="per_agent"`` the result is bit-identical to
    ``rank_matrix(sample_rankings(population, seed))``. With
    ``stream="batched"`` all agents draw from one substream in row blocks
    (agent i owns block i, so prefixes are stable under n growth); this is
    distributionally identical and much faster at very large n.
    """
    if stream not in ("per_agent", "batched"):
        raise ValueError(f"unknown stream mode {stream!r}")
    n, m = population.n_agents, population.n_alternatives
    batched_gen = rng.substream(seed, rng.RANKINGS) if stream == "batched" else None
    out = np.empty((n, m), dtype=np.int64)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        dists = np.linalg.norm(
            population.agents[start:stop, None, :] - population.alternatives[None, :, :],
            axis=2,
        )
        if batched_gen is not None:
            u = batched_gen.random((stop - start, m))
        else:
            u = np.empty((stop - start, m))
            for i in range(start, stop):
                u[i - start] = rng.substream(seed, rng.RANKINGS, i).random(m)
        perceived = -dists - np.log(-np.log(u))
        order = np.argsort(-perceived, axis=1, kind="stable")
        out[start:stop] = np.argsort(order, axis=1, kind="stable")
    return out


def write_rankings_csv(rankings: list[Ranking], path, n: int, m: int, seed: int) -> None:
    """One file per ranking matrix: a header naming n, m, seed, then one
    row per agent: agent_id, alternative ids best-first."""
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(f"n={n},m={m},seed={seed}\n")
        for i, r in enumerate(rankings):
            fp.write(str(i) + "," + ",".join(str(int(j)) for j in r.order) + "\n")


def read_rankings_csv(path) -> tuple[list[Ranking], dict]:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in io.StringIO(text).read().splitlines() if ln.strip()]
    header = dict(kv.split("=") for kv in lines[0].split(","))
    meta = {"n": int(header["n"]), "m": int(header["m"]), "seed": int(header["seed"])}
    rankings: list[Ranking] = [None] * meta["n"]  # type: ignore[list-item]
    for line in lines[1:]:
        fields = [int(v) for v in line.split(",")]
        rankings[fields[0]] = Ranking.from_order(fields[1:])
    if any(r is None for r in rankings):
        raise ValueError("rankings file is missing agents")
    return rankings, meta
