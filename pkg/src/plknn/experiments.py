"""Reproducible experiment runner: error-vs-k, error-vs-position, and the
high-dimensional neighbor-distance sweep.

Every agent serves once as the query; the query's own ranking feeds the
distance computations a method needs but never votes. Queries execute
independently (optionally across a thread pool) and results are reduced on
sorted keys, so the emitted CSV bytes are identical for any worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import rng
from .agents import METHODS, sample_pairs
from .kendall import FeatureMatrix, agent_distances_from, feature_matrix, _discordant_from_positions
from .latent import ModelConfig, Population, sample_population
from .rankings import rank_matrix, sample_rankings

CSV_HEADER = "method,k,dim,seed,query_bin,error_mean,error_stderr,neighbor_dist_mean,config_hash"
POSITION_BINS = 40


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of a reproducible synthetic run."""

    model: ModelConfig
    k_grid: tuple[int, ...]
    methods: tuple[str, ...] = METHODS
    pair_sample_size: int = 1000
    dims: tuple[int, ...] = (1,)
    output_dir: str = "."
    replicate_seeds: tuple[int, ...] = (0,)

    def validate(self) -> None:
        self.model.validate()
        if not self.k_grid or list(self.k_grid) != sorted(set(self.k_grid)):
            raise ValueError("k_grid must be sorted ascending without duplicates")
        if any(k < 1 for k in self.k_grid):
            raise ValueError("k values must be positive")
        # k values above the per-query candidate pool (n - 1) are truncated at
        # query time, matching the top-k neighbor-set contract min(k, n - 1)
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if self.pair_sample_size < 1:
            raise ValueError("pair_sample_size must be positive")
        if any(d < 1 for d in self.dims):
            raise ValueError("dims must be positive")
        if not self.replicate_seeds:
            raise ValueError("at least one replicate seed is required")

    def to_dict(self) -> dict:
        return {
            "model": self.model.to_dict(),
            "k_grid": list(self.k_grid),
            "methods": list(self.methods),
            "pair_sample_size": self.pair_sample_size,
            "dims": list(self.dims),
            "output_dir": self.output_dir,
            "replicate_seeds": list(self.replicate_seeds),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        data["model"] = ModelConfig.from_dict(data["model"])
        for key in ("k_grid", "methods", "dims", "replicate_seeds"):
            if key in data:
                data[key] = tuple(data[key])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class ReportRow:
    method: str
    k: int
    dim: int
    seed: int
    query_bin: int | None
    error_mean: float | None
    error_stderr: float | None
    neighbor_dist_mean: float

    def validate(self) -> None:
        if self.error_mean is not None and not 0.0 <= self.error_mean <= 1.0:
            raise ValueError("error_mean must lie in [0, 1]")
        if self.neighbor_dist_mean < 0:
            raise ValueError("neighbor distances are nonnegative")


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[ReportRow, ...]
    config_hash: str

    def merge(self, other: "ExperimentReport") -> "ExperimentReport":
        if other.config_hash != self.config_hash:
            raise ValueError(
                f"refusing to merge reports from different configs "
                f"({self.config_hash} vs {other.config_hash})"
            )
        return ExperimentReport(rows=self.rows + other.rows, config_hash=self.config_hash)

    def best_errors(self, seed: int | None = None) -> dict[str, float]:
        """Per-method minimum error over k (optionally within one seed)."""
        best: dict[str, float] = {}
        for row in self.rows:
            if row.error_mean is None or (seed is not None and row.seed != seed):
                continue
            if row.method not in best or row.error_mean < best[row.method]:
                best[row.method] = row.error_mean
        return best


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_report_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(CSV_HEADER + "\n")
        for row in report.rows:
            fp.write(
                ",".join(
                    [
                        row.method,
                        str(row.k),
                        str(row.dim),
                        str(row.seed),
                        _fmt(row.query_bin),
                        _fmt(row.error_mean),
                        _fmt(row.error_stderr),
                        _fmt(row.neighbor_dist_mean),
                        report.config_hash,
                    ]
                )
                + "\n"
            )


def read_report_csv(path) -> ExperimentReport:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized report header")
    rows = []
    hashes = set()
    for line in lines[1:]:
        if not line.strip():
            continue
        f = line.split(",")
        rows.append(
            ReportRow(
                method=f[0],
                k=int(f[1]),
                dim=int(f[2]),
                seed=int(f[3]),
                query_bin=int(f[4]) if f[4] else None,
                error_mean=float(f[5]) if f[5] else None,
                error_stderr=float(f[6]) if f[6] else None,
                neighbor_dist_mean=float(f[7]),
            )
        )
        hashes.add(f[8])
    if len(hashes) != 1:
        raise ValueError("report file mixes config hashes")
    return ExperimentReport(rows=tuple(rows), config_hash=hashes.pop())


@dataclass(frozen=True)
class _SeedContext:
    """Shared read-only state for one replicate."""

    population: Population
    matrix: np.ndarray
    features: FeatureMatrix | None
    latent_dist: np.ndarray  # (n, n) agent-agent distances
    seed: int


def _build_context(model: ModelConfig, seed: int, need_features: bool) -> _SeedContext:
    cfg = replace(model, seed=seed)
    pop = sample_population(cfg)
    rankings = sample_rankings(pop, seed=seed)
    matrix = rank_matrix(rankings, m=pop.n_alternatives)
    features = feature_matrix(rankings, pairing_seed=seed) if need_features else None
    diffs = pop.agents[:, None, :] - pop.agents[None, :, :]
    latent = np.linalg.norm(diffs, axis=2)
    return _SeedContext(
        population=pop, matrix=matrix, features=features, latent_dist=latent, seed=seed
    )


def _truth_probs(pop: Population, q: int, pairs: np.ndarray) -> np.ndarray:
    x_q = pop.agents[q]
    da = np.linalg.norm(pop.alternatives[pairs[:, 0]] - x_q, axis=1)
    db = np.linalg.norm(pop.alternatives[pairs[:, 1]] - x_q, axis=1)
    return 0.5 * (1.0 + np.tanh(0.5 * (db - da)))


def _method_distances(ctx: _SeedContext, method: str, q: int) -> np.ndarray:
    n = ctx.matrix.shape[0]
    if method == "kt_knn":
        out = np.empty(n)
        for j in range(n):
            out[j] = _discordant_from_positions(ctx.matrix[q], ctx.matrix[j]) if j != q else np.inf
        return out
    if method == "global_knn":
        d = agent_distances_from(ctx.features, q)
        return np.where(np.isnan(d), np.inf, d)
    if method == "oracle":
        d = ctx.latent_dist[q].copy()
        d[q] = np.inf
        return d
    raise ValueError(f"unknown method {method!r}")


def _query_errors(
    ctx: _SeedContext, q: int, methods, k_grid, pair_count: int
) -> dict[tuple[str, int], tuple[float, float]]:
    """Per (method, k): (prediction error, mean latent distance of neighbors)."""
    pairs = sample_pairs(
        ctx.population.n_alternatives, pair_count, rng.substream(ctx.seed, rng.PAIR_SAMPLE, q)
    )
    truth = _truth_probs(ctx.population, q, pairs)
    n = ctx.matrix.shape[0]
    out: dict[tuple[str, int], tuple[float, float]] = {}
    for method in methods:
        dist = _method_distances(ctx, method, q)
        order = np.lexsort((np.arange(n), dist))
        order = order[order != q]
        prefer = (ctx.matrix[np.ix_(order, pairs[:, 0])] < ctx.matrix[np.ix_(order, pairs[:, 1])])
        cum_votes = np.cumsum(prefer, axis=0, dtype=np.float64)
        cum_dist = np.cumsum(ctx.latent_dist[q][order])
        for k in k_grid:
            kk = min(k, n - 1)
            votes = cum_votes[kk - 1] / kk
            err = float(np.mean(np.abs(votes - truth)))
            out[(method, k)] = (err, float(cum_dist[kk - 1] / kk))
    return out


def _map_queries(ctx, queries, methods, k_grid, pair_count, n_jobs):
    def work(q):
        return q, _query_errors(ctx, q, methods, k_grid, pair_count)

    if n_jobs is None or n_jobs <= 1:
        results = [work(q) for q in queries]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(work, queries))
    return [stats for _, stats in sorted(results, key=lambda item: item[0])]


def run_error_vs_k(cfg: ExperimentConfig, n_jobs: int | None = None) -> ExperimentReport:
    """Error and neighbor-distance summary per (method, k, seed); every agent
    serves once as the query and errors are averaged over queries."""
    cfg.validate()
    rows = []
    need_features = "global_knn" in cfg.methods
    for seed in cfg.replicate_seeds:
        ctx = _build_context(cfg.model, seed, need_features)
        per_query = _map_queries(
            ctx, range(cfg.model.n_agents), cfg.methods, cfg.k_grid, cfg.pair_sample_size, n_jobs
        )
        for method in cfg.methods:
            for k in cfg.k_grid:
                errs = np.array([stats[(method, k)][0] for stats in per_query])
                dists = np.array([stats[(method, k)][1] for stats in per_query])
                rows.append(
                    ReportRow(
                        method=method,
                        k=k,
                        dim=cfg.model.dim,
                        seed=seed,
                        query_bin=None,
                        error_mean=float(errs.mean()),
                        error_stderr=float(errs.std(ddof=1) / math.sqrt(errs.size)),
                        neighbor_dist_mean=float(dists.mean()),
                    )
                )
    return ExperimentReport(rows=tuple(rows), config_hash=cfg.config_hash())


def run_error_vs_position(
    cfg: ExperimentConfig, k: int, n_jobs: int | None = None
) -> ExperimentReport:
    """Errors at a fixed k, binned by the query's latent position."""
    cfg.validate()
    if cfg.model.dim != 1:
        raise ValueError("position binning is defined for dim = 1")
    if k >= cfg.model.n_agents:
        raise ValueError("k must be below the number of agents")
    rows = []
    need_features = "global_knn" in cfg.methods
    edges = np.linspace(0.0, cfg.model.box, POSITION_BINS + 1)
    for seed in cfg.replicate_seeds:
        ctx = _build_context(cfg.model, seed, need_features)
        per_query = _map_queries(
            ctx, range(cfg.model.n_agents), cfg.methods, (k,), cfg.pair_sample_size, n_jobs
        )
        positions = ctx.population.agents[:, 0]
        bins = np.clip(np.digitize(positions, edges) - 1, 0, POSITION_BINS - 1)
        for method in cfg.methods:
            for b in range(POSITION_BINS):
                idx = np.flatnonzero(bins == b)
                if idx.size == 0:
                    continue
                errs = np.array([per_query[q][(method, k)][0] for q in idx])
                dists = np.array([per_query[q][(method, k)][1] for q in idx])
                stderr = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else 0.0
                rows.append(
                    ReportRow(
                        method=method,
                        k=k,
                        dim=1,
                        seed=seed,
                        query_bin=b,
                        error_mean=float(errs.mean()),
                        error_stderr=stderr,
                        neighbor_dist_mean=float(dists.mean()),
                    )
                )
    return ExperimentReport(rows=tuple(rows), config_hash=cfg.config_hash())


def run_dim_sweep(cfg: ExperimentConfig, n_jobs: int | None = None) -> ExperimentReport:
    """Mean latent distance to the selected neighbors per (method, k, dim).

    For dimension d the box edge is scaled to box / sqrt(d), keeping the
    diameter of the support comparable across dimensions. Prediction-error
    columns are left empty.
    """
    cfg.validate()
    if not cfg.dims:
        raise ValueError("dims must be nonempty")
    rows = []
    need_features = "global_knn" in cfg.methods
    for seed in cfg.replicate_seeds:
        for dim in cfg.dims:
            model = replace(cfg.model, dim=dim, box=cfg.model.box / math.sqrt(dim))
            ctx = _build_context(model, seed, need_features)
            per_query = _map_queries(
                ctx, range(model.n_agents), cfg.methods, cfg.k_grid, 1, n_jobs
            )
            for method in cfg.methods:
                for k in cfg.k_grid:
                    dists = np.array([stats[(method, k)][1] for stats in per_query])
                    rows.append(
                        ReportRow(
                            method=method,
                            k=k,
                            dim=dim,
                            seed=seed,
                            query_bin=None,
                            error_mean=None,
                            error_stderr=None,
                            neighbor_dist_mean=float(dists.mean()),
                        )
                    )
    return ExperimentReport(rows=tuple(rows), config_hash=cfg.config_hash())
