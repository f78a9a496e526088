"""Latent-space model: box support, sampling distributions, RBF utility.

Agents and alternatives are points in the box [0, box]^dim. An agent's
utility for an alternative decays exponentially with Euclidean distance,
which induces the ground-truth pairwise preference probabilities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from . import rng

# A latent point is a 1-D float array of length dim with coords in [0, box].
LatentPoint = np.ndarray

_DIST_KINDS = ("uniform", "near_uniform")


@dataclass(frozen=True)
class DistSpec:
    """Sampling distribution for one entity kind on [0, box]^dim.

    ``uniform`` is the flat density.  ``near_uniform`` is a piecewise-constant
    density on ``cells`` equal cells per coordinate whose weight alternates
    between 1 and ``ratio``; coordinates are independent, so the joint
    max/min density ratio is ``ratio ** dim``.
    """

    kind: str = "uniform"
    ratio: float = 1.0
    cells: int = 8

    def validate(self) -> None:
        if self.kind not in _DIST_KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not np.isfinite(self.ratio) or self.ratio < 1.0:
            raise ValueError("density ratio must be finite and >= 1")
        if self.kind == "near_uniform" and self.cells < 2:
            raise ValueError("near-uniform grid needs at least 2 cells")

    def density_ratio(self, dim: int) -> float:
        """Joint sup/inf density ratio realized in ``dim`` dimensions."""
        if self.kind == "uniform":
            return 1.0
        return float(self.ratio) ** dim

    def sample(self, generator: np.random.Generator, count: int, dim: int, box: float) -> np.ndarray:
        """Draw ``count`` i.i.d. points of shape (count, dim)."""
        u = generator.random((count, dim))
        if self.kind == "uniform" or self.ratio == 1.0:
            return u * box
        weights = np.where(np.arange(self.cells) % 2 == 0, 1.0, self.ratio)
        cum = np.cumsum(weights / weights.sum())
        cum[-1] = 1.0
        cell = np.searchsorted(cum, u, side="right")
        lower = np.concatenate([[0.0], cum[:-1]])
        frac = (u - lower[cell]) / (cum[cell] - lower[cell])
        return (cell + frac) / self.cells * box

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform"}
        return {"kind": self.kind, "ratio": self.ratio, "cells": self.cells}

    @classmethod
    def from_dict(cls, data: dict) -> "DistSpec":
        spec = cls(**data)
        spec.validate()
        return spec


@dataclass(frozen=True)
class ModelConfig:
    """Full description of one synthetic population.

    The seed determines every downstream sample; entity kinds draw from
    disjoint substreams so changing ``n_agents`` never perturbs the
    alternatives and vice versa.
    """

    n_agents: int
    n_alternatives: int
    dim: int = 1
    box: float = 1.0
    dist_x: DistSpec = field(default_factory=DistSpec)
    dist_y: DistSpec = field(default_factory=DistSpec)
    seed: int = 0

    def validate(self) -> None:
        if self.n_agents < 1 or self.n_alternatives < 1:
            raise ValueError("population sizes must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not np.isfinite(self.box) or self.box <= 0:
            raise ValueError("box size must be a positive real")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        self.dist_x.validate()
        self.dist_y.validate()

    @property
    def c_x(self) -> float:
        """Recorded density ratio of the agent distribution."""
        return self.dist_x.density_ratio(self.dim)

    @property
    def c_y(self) -> float:
        """Recorded density ratio of the alternative distribution."""
        return self.dist_y.density_ratio(self.dim)

    def to_dict(self) -> dict:
        return {
            "n_agents": self.n_agents,
            "n_alternatives": self.n_alternatives,
            "dim": self.dim,
            "box": self.box,
            "dist_x": self.dist_x.to_dict(),
            "dist_y": self.dist_y.to_dict(),
            "seed": self.seed,
        }

    def to_json(self, fp: IO[str] | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if fp is not None:
            fp.write(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        data["dist_x"] = DistSpec.from_dict(data.get("dist_x", {"kind": "uniform"}))
        data["dist_y"] = DistSpec.from_dict(data.get("dist_y", {"kind": "uniform"}))
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Population:
    """Sampled latent positions: agents (n, dim) and alternatives (m, dim)."""

    agents: np.ndarray
    alternatives: np.ndarray

    def __post_init__(self):
        if self.agents.ndim != 2 or self.alternatives.ndim != 2:
            raise ValueError("positions must be 2-D arrays (count, dim)")
        if self.agents.shape[1] != self.alternatives.shape[1]:
            raise ValueError("agents and alternatives must share a dimension")

    @property
    def n_agents(self) -> int:
        return self.agents.shape[0]

    @property
    def n_alternatives(self) -> int:
        return self.alternatives.shape[0]

    @property
    def dim(self) -> int:
        return self.agents.shape[1]


def sample_population(cfg: ModelConfig) -> Population:
    """Draw the agent and alternative positions described by ``cfg``.

    Deterministic given ``cfg.seed``; agents and alternatives come from
    disjoint substreams, and within a kind entity ``i`` owns the ``i``-th
    block of the stream, so extending one count leaves existing points
    untouched.
    """
    cfg.validate()
    agents = cfg.dist_x.sample(
        rng.substream(cfg.seed, rng.AGENTS), cfg.n_agents, cfg.dim, cfg.box
    )
    alternatives = cfg.dist_y.sample(
        rng.substream(cfg.seed, rng.ALTERNATIVES), cfg.n_alternatives, cfg.dim, cfg.box
    )
    return Population(agents=agents, alternatives=alternatives)


def _as_points(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return x, y


def utility(x: LatentPoint, y: LatentPoint) -> float:
    """RBF utility exp(-||x - y||_2); always in (0, 1] on a bounded box."""
    x, y = _as_points(x, y)
    return float(np.exp(-np.linalg.norm(x - y)))


def pairwise_prob(x: LatentPoint, y1: LatentPoint, y2: LatentPoint) -> float:
    """Ground-truth probability that the agent at ``x`` prefers ``y1`` to ``y2``.

    Equals u(x,y1) / (u(x,y1) + u(x,y2)): the two-alternative restriction of
    the sequential-choice ranking model.
    """
    x, y1 = _as_points(x, y1)
    x, y2 = _as_points(x, y2)
    d1 = np.linalg.norm(x - y1)
    d2 = np.linalg.norm(x - y2)
    # 1 / (1 + exp(d1 - d2)), written to stay stable for large gaps
    return float(0.5 * (1.0 + np.tanh(0.5 * (d2 - d1))))
