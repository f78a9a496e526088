"""Numerical verification of the model's distance-curve claims.

Per-pair conditional expectations are available in closed form, so curve
values reduce to low-dimensional integrals: those are evaluated with
panel-split Gauss-Legendre quadrature (panels split at the integrand's kink
lines, where convergence is then spectral) and cross-checked by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import rng
from .kendall import agent_distance, feature_matrix
from .latent import Population
from .rankings import sample_rankings


class QuadratureError(RuntimeError):
    """Raised when the adaptive quadrature fails to reach its tolerance."""


@dataclass(frozen=True)
class CurveSample:
    """A curve evaluated on a grid, with per-point Monte Carlo stderr
    (zero for quadrature evaluations)."""

    x_grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        if not (len(self.x_grid) == len(self.values) == len(self.stderr)):
            raise ValueError("grid, values and stderr must have equal lengths")
        if np.any(self.stderr < 0):
            raise ValueError("stderr must be nonnegative")


@dataclass(frozen=True)
class ClaimReport:
    name: str
    status: str  # "pass" | "fail" | "inconclusive"
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class VerifyReport:
    target: str
    claims: tuple[ClaimReport, ...]
    curves: dict[str, CurveSample] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" for c in self.claims)

    @property
    def inconclusive(self) -> bool:
        return any(c.status == "inconclusive" for c in self.claims)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "passed": self.passed,
            "claims": [
                {"name": c.name, "status": c.status, "details": _jsonable(c.details)}
                for c in self.claims
            ],
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in np.asarray(obj).tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _pair_prob(x, y1, y2):
    """P[y1 preferred to y2 | agent at x], vectorized over 1-D arrays."""
    d1 = np.abs(np.asarray(y1, dtype=float) - x)
    d2 = np.abs(np.asarray(y2, dtype=float) - x)
    return 0.5 * (1.0 + np.tanh(0.5 * (d2 - d1)))


def expected_nkt_pair(x_q: float, x: float, y1, y2):
    """Conditional discordance probability of one alternative pair between
    agents at ``x_q`` and ``x``: p_x (1 - p_q) + p_q (1 - p_x)."""
    p_q = _pair_prob(x_q, y1, y2)
    p_x = _pair_prob(x, y1, y2)
    return p_x * (1.0 - p_q) + p_q * (1.0 - p_x)


def _gl_panels(breaks: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    outs_n, outs_w = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        h = 0.5 * (b - a)
        outs_n.append(a + h * (nodes + 1.0))
        outs_w.append(weights * h)
    return np.concatenate(outs_n), np.concatenate(outs_w)


def _integrate_square(f, breaks: np.ndarray, order: int) -> float:
    n, w = _gl_panels(breaks, order)
    return float(f(n[:, None], n[None, :]) @ w @ w)


def integrate_unit_square(f, kinks=(), rtol: float = 1e-8, max_order: int = 128) -> tuple[float, float]:
    """Adaptive tensor Gauss-Legendre over [0,1]^2 with panels split at the
    given kink coordinates. Returns (value, error estimate); raises
    QuadratureError instead of silently returning a non-converged value."""
    breaks = np.unique(np.clip(np.concatenate([[0.0, 1.0], np.atleast_1d(kinks)]), 0.0, 1.0))
    order = 16
    prev = _integrate_square(f, breaks, order)
    while order < max_order:
        order *= 2
        cur = _integrate_square(f, breaks, order)
        err = abs(cur - prev)
        if err <= rtol * max(abs(cur), 1e-12):
            return cur, err
        prev = cur
    raise QuadratureError(f"quadrature did not reach rtol={rtol} by order {max_order}")


def expected_nkt_value(x_q: float, x: float, rtol: float = 1e-9) -> float:
    """Expected normalized rank distance between agents at ``x_q`` and ``x``
    for alternatives uniform on [0, 1] (quadrature over one i.i.d. pair)."""
    value, _ = integrate_unit_square(
        lambda y1, y2: expected_nkt_pair(x_q, x, y1, y2), kinks=(x, x_q), rtol=rtol
    )
    return value


def expected_nkt_curve(
    x_q: float,
    grid,
    integrator: str = "quadrature",
    rtol: float = 1e-9,
    mc_samples: int = 100_000,
    seed: int = 0,
) -> CurveSample:
    """Curve x -> expected NKT against the agent at ``x_q`` on a grid.

    ``integrator`` is "quadrature" (deterministic, stderr 0) or
    "monte_carlo" (per-point derived seeds, so parallel evaluation is
    bit-reproducible)."""
    grid = np.asarray(grid, dtype=float)
    values = np.empty(grid.size)
    stderr = np.zeros(grid.size)
    if integrator == "quadrature":
        for t, x in enumerate(grid):
            values[t] = expected_nkt_value(x_q, float(x), rtol=rtol)
    elif integrator == "monte_carlo":
        for t, x in enumerate(grid):
            gen = rng.substream(seed, rng.TRIAL, t)
            y = gen.random((mc_samples, 2))
            vals = expected_nkt_pair(x_q, float(x), y[:, 0], y[:, 1])
            values[t] = vals.mean()
            stderr[t] = vals.std(ddof=1) / math.sqrt(mc_samples)
    else:
        raise ValueError(f"unknown integrator {integrator!r}")
    return CurveSample(x_grid=grid, values=values, stderr=stderr)


# --- the two-alternative worked example ------------------------------------

EXAMPLE_Y1 = 0.4
EXAMPLE_Y2 = 0.7
EXAMPLE_X1 = 0.5


def example_deterministic_kt(x2: float) -> int:
    """Rank distance between the noise-free orders of the fixed agent and an
    agent at ``x2`` (two fixed alternatives, so the distance is 0 or 1)."""
    first_prefers_y1 = abs(EXAMPLE_X1 - EXAMPLE_Y1) < abs(EXAMPLE_X1 - EXAMPLE_Y2)
    second_prefers_y1 = abs(x2 - EXAMPLE_Y1) < abs(x2 - EXAMPLE_Y2)
    return int(first_prefers_y1 != second_prefers_y1)


def example_expected_kt(x2):
    """E[KT] between the fixed agent's noisy order and that of an agent at
    ``x2`` over the two fixed alternatives (closed form)."""
    p1 = _pair_prob(EXAMPLE_X1, EXAMPLE_Y1, EXAMPLE_Y2)
    p2 = _pair_prob(np.asarray(x2, dtype=float), EXAMPLE_Y1, EXAMPLE_Y2)
    return p1 * (1.0 - p2) + p2 * (1.0 - p1)


def example_expected_kt_complement(x2):
    """Probability that the two noisy orders agree; complements example_expected_kt."""
    p1 = _pair_prob(EXAMPLE_X1, EXAMPLE_Y1, EXAMPLE_Y2)
    p2 = _pair_prob(np.asarray(x2, dtype=float), EXAMPLE_Y1, EXAMPLE_Y2)
    return p1 * p2 + (1.0 - p1) * (1.0 - p2)


def example_one(span: tuple[float, float] = (-2.0, 2.0), step: float = 0.01) -> dict:
    """Report on the two-alternative example: the noise-free optimum boundary,
    the expected-distance curve, its derivative at probe points, and the
    measured end of the curve's flat minimal region.

    The domain is truncated to ``span`` for the curve dump; the tested claims
    are derivative signs, which are insensitive to the truncation.
    """
    boundary = 0.5 * (EXAMPLE_Y1 + EXAMPLE_Y2)
    grid = np.arange(span[0], span[1] + step / 2, step)
    values = example_expected_kt(grid)
    h = 1e-6
    probes = {
        x2: float((example_expected_kt(x2 + h) - example_expected_kt(x2 - h)) / (2 * h))
        for x2 in (0.0, 0.25, 0.5)
    }
    floor = float(values.min())
    flat = grid[np.abs(values - floor) <= 1e-12]
    return {
        "deterministic_boundary": boundary,
        "deterministic_left_of_boundary": example_deterministic_kt(boundary - 1e-9),
        "deterministic_right_of_boundary": example_deterministic_kt(boundary + 1e-9),
        "curve": CurveSample(x_grid=grid, values=np.asarray(values), stderr=np.zeros(grid.size)),
        "derivatives": probes,
        "value_at_minus_1": float(example_expected_kt(-1.0)),
        "value_at_x1": float(example_expected_kt(EXAMPLE_X1)),
        "flat_region_end": float(flat.max()) if flat.size else float("nan"),
    }


# --- verification targets ---------------------------------------------------

BIAS_GRID_STEP = 1.0 / 200.0


def verify_theorem_bias(
    left_queries=(0.05, 0.1, 0.2, 0.25),
    right_queries=(0.75, 0.9),
    rtol: float = 1e-9,
) -> VerifyReport:
    """Check that the expected rank-distance curve against a query agent is
    minimized at the support boundary for off-center queries (and at the
    center for a centered query)."""
    grid = np.round(np.arange(0.0, 1.0 + BIAS_GRID_STEP / 2, BIAS_GRID_STEP), 10)
    claims = []
    curves = {}
    for x_q in left_queries:
        curve = expected_nkt_curve(x_q, grid, rtol=rtol)
        curves[f"curve_xq_{x_q:g}"] = curve
        diffs = np.diff(curve.values)
        inner = (grid[:-1] > 0) & (grid[:-1] <= x_q + 1e-12)
        ok = int(np.argmin(curve.values)) == 0 and bool(np.all(diffs[inner] > 0))
        claims.append(
            ClaimReport(
                name=f"boundary_argmin_left_xq_{x_q:g}",
                status="pass" if ok else "fail",
                details={
                    "argmin": float(grid[int(np.argmin(curve.values))]),
                    "min_forward_difference": float(diffs[inner].min()),
                },
            )
        )
    for x_q in right_queries:
        curve = expected_nkt_curve(x_q, grid, rtol=rtol)
        curves[f"curve_xq_{x_q:g}"] = curve
        diffs = np.diff(curve.values)
        inner = (grid[1:] < 1) & (grid[1:] >= x_q - 1e-12)
        ok = int(np.argmin(curve.values)) == grid.size - 1 and bool(np.all(diffs[inner] < 0))
        claims.append(
            ClaimReport(
                name=f"boundary_argmin_right_xq_{x_q:g}",
                status="pass" if ok else "fail",
                details={
                    "argmin": float(grid[int(np.argmin(curve.values))]),
                    "max_forward_difference": float(diffs[inner].max()),
                },
            )
        )
    center = expected_nkt_curve(0.5, grid, rtol=rtol)
    curves["curve_xq_0.5"] = center
    ok = abs(grid[int(np.argmin(center.values))] - 0.5) < 1e-12
    claims.append(
        ClaimReport(
            name="center_fixed_point",
            status="pass" if ok else "fail",
            details={"argmin": float(grid[int(np.argmin(center.values))])},
        )
    )
    return VerifyReport(target="theorem-bias", claims=tuple(claims), curves=curves)


def verify_example_one(tol: float = 1e-6) -> VerifyReport:
    """Check the two-alternative example: exact noise-free boundary, a
    tolerance-qualified nonnegative slope at the probe points (the curve is
    exactly flat left of the smaller alternative), strict increase at the
    fixed agent's own position, and the strict value comparison showing that
    position is not expected-distance optimal."""
    report = example_one()
    claims = [
        ClaimReport(
            name="deterministic_boundary",
            status="pass" if report["deterministic_boundary"] == 0.55 else "fail",
            details={"boundary": report["deterministic_boundary"]},
        ),
        ClaimReport(
            name="derivative_nonneg_at_0",
            status="pass" if report["derivatives"][0.0] >= -tol else "fail",
            details={"derivative": report["derivatives"][0.0]},
        ),
        ClaimReport(
            name="derivative_nonneg_at_0.25",
            status="pass" if report["derivatives"][0.25] >= -tol else "fail",
            details={"derivative": report["derivatives"][0.25]},
        ),
        ClaimReport(
            name="derivative_positive_at_0.5",
            status="pass" if report["derivatives"][0.5] > tol else "fail",
            details={"derivative": report["derivatives"][0.5]},
        ),
        ClaimReport(
            name="far_left_beats_own_position",
            status="pass" if report["value_at_minus_1"] < report["value_at_x1"] - tol else "fail",
            details={
                "value_at_minus_1": report["value_at_minus_1"],
                "value_at_own_position": report["value_at_x1"],
            },
        ),
        ClaimReport(
            name="flat_region_ends_at_smaller_alternative",
            status="pass" if abs(report["flat_region_end"] - EXAMPLE_Y1) <= 0.011 else "fail",
            details={"flat_region_end": report["flat_region_end"]},
        ),
    ]
    return VerifyReport(
        target="example-1", claims=tuple(claims), curves={"expected_kt": report["curve"]}
    )


def _loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    return float(slope), 1.0 - ss_res / ss_tot


@lru_cache(maxsize=200_000)
def _expected_nkt_cached(x_q: float, x: float, rtol: float) -> float:
    return expected_nkt_value(x_q, x, rtol=rtol)


def expected_agent_gap_curve(
    eps: float, x_base: float = 0.35, grid_size: int = 401, rtol: float = 1e-7
):
    """Interpolator for x_k -> |F(x_base; x_k) - F(x_base+eps; x_k)| with the
    inner alternative/ranking expectation computed exactly by quadrature."""
    x_i, x_j = x_base, x_base + eps
    knots = np.union1d(np.round(np.linspace(0.0, 1.0, grid_size), 12), [x_i, x_j])
    gap = np.array(
        [
            _expected_nkt_cached(x_i, float(xk), rtol)
            - _expected_nkt_cached(x_j, float(xk), rtol)
            for xk in knots
        ]
    )
    return PchipInterpolator(knots, gap)


def agent_bound_check(
    eps_grid=None,
    trials: int = 10_000,
    seed: int = 0,
    x_base: float = 0.35,
    concentration: bool = True,
) -> VerifyReport:
    """Monte Carlo estimate of the expected agent distance as a function of
    the latent gap, with shape assertions against the quadratic-to-linear
    envelope.

    Trials draw the third agent's position (one common sample shared across
    the grid, which stabilizes the slope fit); the inner expectation over
    alternatives and rankings is exact (closed-form per-pair expectation
    integrated numerically), which is the regime the envelope addresses.
    A separate sub-check runs the finite-sample pipeline and verifies the
    variance of the distance halves when the alternative count doubles
    (other agents frozen).
    """
    if eps_grid is None:
        eps_grid = np.geomspace(0.02, 0.2, 8)
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0) or np.any(np.diff(eps_grid) <= 0):
        raise ValueError("eps grid must be positive and sorted ascending")
    xk = _stratified_uniform(rng.substream(seed, rng.TRIAL, 0), trials)
    means = np.empty(eps_grid.size)
    stderrs = np.empty(eps_grid.size)
    for t, eps in enumerate(eps_grid):
        interp = expected_agent_gap_curve(float(eps), x_base=x_base)
        vals = np.abs(interp(xk))
        means[t] = vals.mean()
        stderrs[t] = vals.std(ddof=1) / math.sqrt(trials)

    claims = []
    conclusive = bool(np.all(stderrs <= 0.2 * means))
    if not conclusive:
        claims.append(
            ClaimReport(
                name="statistical_power",
                status="inconclusive",
                details={"max_stderr_fraction": float((stderrs / means).max())},
            )
        )
    slope, r2 = _loglog_fit(eps_grid, means)
    claims.append(
        ClaimReport(
            name="envelope_slope",
            status="pass" if conclusive and 1.0 <= slope <= 2.0 and r2 > 0.98 else
            ("inconclusive" if not conclusive else "fail"),
            details={"slope": slope, "r_squared": r2},
        )
    )
    claims.append(
        ClaimReport(
            name="monotone_in_gap",
            status="pass" if bool(np.all(np.diff(means) > 0)) else "fail",
            details={"means": means},
        )
    )
    ratio = float(np.min(means / eps_grid**2))
    claims.append(
        ClaimReport(
            name="quadratic_lower_envelope",
            status="pass" if ratio > 0.05 else "fail",
            details={"min_mean_over_eps_sq": ratio},
        )
    )
    claims.append(
        ClaimReport(
            name="vanishes_toward_zero_gap",
            status="pass" if means[0] < 0.1 * eps_grid[0] else "fail",
            details={"mean_at_smallest_gap": float(means[0])},
        )
    )
    if concentration:
        claims.append(_concentration_claim(seed))
    curve = CurveSample(x_grid=eps_grid, values=means, stderr=stderrs)
    return VerifyReport(target="agent-bounds", claims=(*claims,), curves={"gap_curve": curve})


def _concentration_claim(
    seed: int, eps: float = 0.1, n_other: int = 40, m_small: int = 400, reps: int = 400
) -> ClaimReport:
    """Variance of the pipeline agent distance should halve when the
    alternative count doubles (exponential-tail behavior in m)."""
    x_gen = rng.substream(seed, rng.TRIAL, 10_000)
    others = x_gen.random(n_other)
    agents = np.concatenate([[0.35, 0.35 + eps], others])[:, None]
    variances = []
    for idx, m in enumerate((m_small, 2 * m_small)):
        samples = np.empty(reps)
        for rep in range(reps):
            sub = int(seed) + 1 + idx * reps + rep
            alts = rng.substream(sub, rng.ALTERNATIVES).random(m)[:, None]
            pop = Population(agents=agents, alternatives=alts)
            rankings = sample_rankings(pop, seed=sub)
            feats = feature_matrix(rankings, pairing_seed=sub)
            samples[rep] = agent_distance(feats, 0, 1)
        variances.append(float(np.var(samples, ddof=1)))
    ratio = variances[0] / variances[1]
    return ClaimReport(
        name="variance_halves_with_double_m",
        status="pass" if 1.4 <= ratio <= 2.8 else "fail",
        details={"variance_ratio": ratio, "variances": variances},
    )


def item_sign_mean(y_i: float, y_j: float, x: np.ndarray) -> np.ndarray:
    """Exact conditional mean of the preference sign for agents at ``x``:
    the ranking noise integrates out to tanh of half the distance gap."""
    return np.tanh(0.5 * (np.abs(x - y_i) - np.abs(x - y_j)))


def _stratified_uniform(generator: np.random.Generator, n: int) -> np.ndarray:
    """Jittered-grid uniform sample on [0, 1]: one draw per stratum."""
    return (np.arange(n) + generator.random(n)) / n


def item_bound_check(
    delta_grid=None,
    trials: int = 200_000,
    seed: int = 0,
    fold_base: float = 0.5,
    side_base: float = 0.2,
) -> VerifyReport:
    """Monte Carlo estimate of the alternative sign statistic against the
    fold-distance gap delta, with envelope shape and mirror-pair assertions.

    Agents are drawn uniformly (one common sample shared across the grid);
    the per-agent ranking noise is integrated out analytically, so trials
    are agent draws. The slope is measured on the near-fold slice (query at
    the box midpoint), the regime where the quadratic lower envelope is
    active; the off-center slice checks the envelopes and monotonicity in the
    linear regime, and the mirror pair checks that the statistic vanishes at
    fold distance zero despite the large latent gap.
    """
    if delta_grid is None:
        delta_grid = np.geomspace(0.02, 0.2, 8)
    delta_grid = np.asarray(delta_grid, dtype=float)
    if np.any(delta_grid <= 0) or np.any(np.diff(delta_grid) <= 0):
        raise ValueError("delta grid must be positive and sorted ascending")

    x = _stratified_uniform(rng.substream(seed, rng.TRIAL, 0), trials)

    def slice_stats(y_base: float) -> tuple[np.ndarray, np.ndarray]:
        means = np.empty(delta_grid.size)
        stderrs = np.empty(delta_grid.size)
        for t, delta in enumerate(delta_grid):
            vals = item_sign_mean(y_base, y_base + float(delta), x)
            means[t] = abs(vals.mean())
            stderrs[t] = vals.std(ddof=1) / math.sqrt(trials)
        return means, stderrs

    fold_means, fold_se = slice_stats(fold_base)
    side_means, side_se = slice_stats(side_base)

    mirror_vals = item_sign_mean(side_base, 1.0 - side_base, x)
    mirror_mean = abs(float(mirror_vals.mean()))
    mirror_se = float(mirror_vals.std(ddof=1)) / math.sqrt(trials)

    claims = []
    conclusive = bool(np.all(fold_se <= 0.2 * fold_means)) and bool(
        np.all(side_se <= 0.2 * side_means)
    )
    if not conclusive:
        claims.append(
            ClaimReport(
                name="statistical_power",
                status="inconclusive",
                details={
                    "max_stderr_fraction": float(
                        max((fold_se / fold_means).max(), (side_se / side_means).max())
                    )
                },
            )
        )
    slope, r2 = _loglog_fit(delta_grid, fold_means)
    claims.append(
        ClaimReport(
            name="envelope_slope",
            status="pass" if conclusive and 1.0 <= slope <= 2.0 and r2 > 0.98 else
            ("inconclusive" if not conclusive else "fail"),
            details={"slope": slope, "r_squared": r2},
        )
    )
    for label, means in (("near_fold", fold_means), ("off_center", side_means)):
        claims.append(
            ClaimReport(
                name=f"monotone_in_gap_{label}",
                status="pass" if bool(np.all(np.diff(means) > 0)) else "fail",
                details={"means": means},
            )
        )
        lower = float(np.min(means / delta_grid**2))
        upper = float(np.max(means / delta_grid))
        claims.append(
            ClaimReport(
                name=f"quadratic_to_linear_envelope_{label}",
                status="pass" if lower > 0.1 and upper < 0.5 else "fail",
                details={"min_mean_over_delta_sq": lower, "max_mean_over_delta": upper},
            )
        )
    claims.append(
        ClaimReport(
            name="mirror_pair_vanishes",
            status="pass" if mirror_mean <= 4.0 * mirror_se else "fail",
            details={"mirror_mean": mirror_mean, "mirror_stderr": mirror_se},
        )
    )
    curves = {
        "gap_curve_near_fold": CurveSample(x_grid=delta_grid, values=fold_means, stderr=fold_se),
        "gap_curve_off_center": CurveSample(x_grid=delta_grid, values=side_means, stderr=side_se),
    }
    return VerifyReport(target="item-bounds", claims=(*claims,), curves=curves)
