"""Weight recovery from reinforced-walk trajectories.

The pipeline has two stages.  Stage one turns each trajectory into an
empirical transition matrix from the first m departures per vertex and
averages the per-trajectory edge products U_hat_e = P_ij P_ji and their
pairwise products over trajectories.  Stage two inverts the closed-form
moment identities: the vertex quantity o_j is read off adjacent edge
pairs as 2 V_hat / Delta_hat, degree-one vertices chain through their
neighbor, and each edge weight solves x(x+1) = o_i o_j U_hat_e.

Also here: the ratio divergence d used to compare weight vectors, and
log-space calculators for the cover-time/occupancy bounds and for the
sample sizes (m, T, K) that guarantee recovery at accuracy (eps, delta).
Those guarantee-driven sizes are astronomically conservative; estimation
itself accepts any user-chosen (K, T, m).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import first_departure_counts
from .graphs import Graph, as_weights
from .moments import MomentOracle, covariance_gap, expected_u, expected_uu
from .special import DomainError
from .walk import Trajectory, validate_trajectory

__all__ = [
    "DegenerateStartError",
    "DimensionMismatchError",
    "EstimationReport",
    "EstimatorError",
    "MomentEstimates",
    "adjacent_edge_pairs",
    "divergence_d",
    "empirical_moments",
    "empirical_transition",
    "estimate_weights",
    "exact_moment_estimates",
    "recover_weights",
    "sample_size_plan",
    "theoretical_bounds",
]

_LN2 = math.log(2.0)


class EstimatorError(ValueError):
    """Base class for estimation failures."""


class DegenerateStartError(EstimatorError):
    """Weight recovery needs a start vertex of degree at least 2."""


class DimensionMismatchError(EstimatorError):
    """Two edge vectors do not describe the same edge set."""


def adjacent_edge_pairs(g: Graph) -> list[tuple[int, int]]:
    """All unordered pairs of distinct edges sharing exactly one vertex."""
    pairs = set()
    for v in range(g.n):
        inc = g.incident_edges(v)
        for x in range(len(inc)):
            for y in range(x + 1, len(inc)):
                pairs.add((inc[x], inc[y]))
    return sorted(pairs)


@dataclass(frozen=True)
class MomentEstimates:
    """Trajectory-averaged moment estimates.

    v_hat and delta_hat are indexed by `pairs`, the sorted list of
    adjacent edge-id pairs; error_flags lists the pairs where the
    Delta placeholder 1 fired because U_hat U_hat' <= V_hat.
    """

    u_hat: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    v_hat: np.ndarray
    delta_hat: np.ndarray
    error_flags: frozenset
    m: int
    k: int


@dataclass(frozen=True)
class EstimationReport:
    """Recovered per-vertex o and per-edge weights, plus error events."""

    o_hat: np.ndarray
    a_hat: np.ndarray
    flags: frozenset
    divergence: float | None = None


def _steps_matrix(g: Graph, trajectories) -> np.ndarray:
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    if isinstance(trajectories, np.ndarray) and trajectories.ndim == 2:
        steps = np.ascontiguousarray(trajectories, dtype=np.int64)
    else:
        rows = [np.asarray(t.steps if isinstance(t, Trajectory) else t) for t in trajectories]
        if not rows:
            raise EstimatorError("at least one trajectory is required")
        length = rows[0].size
        if any(r.size != length for r in rows):
            raise EstimatorError("trajectories must share a common length")
        steps = np.ascontiguousarray(np.vstack(rows), dtype=np.int64)
    if steps.shape[0] == 0 or steps.shape[1] == 0:
        raise EstimatorError("at least one nonempty trajectory is required")
    if np.any(steps[:, 0] != steps[0, 0]):
        raise EstimatorError("trajectories must share a common start vertex")
    return steps


def empirical_transition(g: Graph, traj, m: int) -> np.ndarray:
    """Transition matrix from the first m departures per vertex.

    Row i is the frequency vector of those departures when at least m
    exist, the uniform law over neighbors otherwise; non-neighbor
    entries are zero.
    """
    if m < 1:
        raise EstimatorError("m must be at least 1")
    steps = validate_trajectory(g, traj)
    counts = np.zeros((g.n, g.n), dtype=np.int64)
    consumed = np.zeros(g.n, dtype=np.int64)
    totals = np.zeros(g.n, dtype=np.int64)
    first_departure_counts(steps, g.n, m, counts, consumed, totals)
    p = np.zeros((g.n, g.n))
    for i in range(g.n):
        if totals[i] >= m:
            p[i] = counts[i] / m
        else:
            for j, _ in g.neighbors(i):
                p[i, j] = 1.0 / g.degree(i)
    return p


def _u_rows(
    g: Graph,
    steps: np.ndarray,
    m: int,
    out: np.ndarray,
    lo: int,
    hi: int,
    ii: np.ndarray,
    jj: np.ndarray,
    inv_deg: np.ndarray,
) -> None:
    counts = np.zeros((g.n, g.n), dtype=np.int64)
    consumed = np.zeros(g.n, dtype=np.int64)
    totals = np.zeros(g.n, dtype=np.int64)
    for k in range(lo, hi):
        counts[:] = 0
        consumed[:] = 0
        totals[:] = 0
        first_departure_counts(steps[k], g.n, m, counts, consumed, totals)
        pij = np.where(totals[ii] >= m, counts[ii, jj] / m, inv_deg[ii])
        pji = np.where(totals[jj] >= m, counts[jj, ii] / m, inv_deg[jj])
        out[k] = pij * pji


def empirical_moments(g: Graph, trajectories, m: int, threads: int = 1) -> MomentEstimates:
    """Average the per-trajectory U products and their adjacent-pair products.

    The per-trajectory values are materialized and reduced with numpy's
    pairwise summation, so results are bit-identical across thread counts.
    """
    if m < 1:
        raise EstimatorError("m must be at least 1")
    steps = _steps_matrix(g, trajectories)
    if np.any(steps < 0) or np.any(steps >= g.n):
        raise EstimatorError("trajectory visits a vertex outside the graph")
    k = steps.shape[0]
    ii, jj = g.edge_endpoints()
    inv_deg = 1.0 / g.degrees.astype(np.float64)
    u = np.empty((k, g.m))
    if threads > 1 and k > 1:
        bounds = np.linspace(0, k, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_u_rows, g, steps, m, u, lo, hi, ii, jj, inv_deg)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for f in futures:
                f.result()
    else:
        _u_rows(g, steps, m, u, 0, k, ii, jj, inv_deg)

    pairs = adjacent_edge_pairs(g)
    p1 = np.array([p[0] for p in pairs], dtype=np.int64)
    p2 = np.array([p[1] for p in pairs], dtype=np.int64)
    u_hat = u.mean(axis=0)
    v_hat = (u[:, p1] * u[:, p2]).mean(axis=0) if pairs else np.zeros(0)
    gap = u_hat[p1] * u_hat[p2] - v_hat if pairs else np.zeros(0)
    flagged = gap <= 0.0
    delta_hat = np.where(flagged, 1.0, gap)
    flags = frozenset(p for p, bad in zip(pairs, flagged) if bad)
    return MomentEstimates(
        u_hat=u_hat,
        pairs=tuple(pairs),
        v_hat=v_hat,
        delta_hat=delta_hat,
        error_flags=flags,
        m=int(m),
        k=int(k),
    )


def exact_moment_estimates(g: Graph, a, v0: int) -> MomentEstimates:
    """Noise-free MomentEstimates built from the closed-form moments.

    Feeding these to recover_weights must return the weights exactly,
    which validates the recovery algebra with zero statistical error.
    """
    oracle = MomentOracle(g=g, a=a, v0=v0)
    pairs = adjacent_edge_pairs(g)
    u = np.array([expected_u(oracle, e) for e in range(g.m)])
    v = np.array([expected_uu(oracle, e1, e2) for e1, e2 in pairs])
    gap = np.array([covariance_gap(oracle, e1, e2) for e1, e2 in pairs])
    return MomentEstimates(
        u_hat=u,
        pairs=tuple(pairs),
        v_hat=v,
        delta_hat=gap,
        error_flags=frozenset(),
        m=1,
        k=0,
    )


def recover_weights(
    g: Graph,
    v0: int,
    est: MomentEstimates,
    truth=None,
    average_pairs: bool = False,
) -> EstimationReport:
    """Invert the moment identities to per-vertex o and per-edge weights.

    Each vertex of degree >= 2 gets o = 2 V_hat / Delta_hat from its
    lexicographically smallest adjacent edge pair (or the average over
    all its pairs); each degree-1 vertex chains through its neighbor
    as o_j = o_i U_hat_e + 1; each edge weight is the positive root of
    x(x+1) = o_i o_j U_hat_e.
    """
    if not (0 <= v0 < g.n):
        raise EstimatorError("start vertex out of range")
    if g.degree(v0) < 2:
        raise DegenerateStartError(
            "start vertex has degree 1; re-anchor at its neighbor first"
        )
    pair_index = {p: idx for idx, p in enumerate(est.pairs)}
    o_hat = np.zeros(g.n)
    for v in range(g.n):
        inc = g.incident_edges(v)
        if len(inc) < 2:
            continue
        if average_pairs:
            vals = []
            for x in range(len(inc)):
                for y in range(x + 1, len(inc)):
                    idx = pair_index[(inc[x], inc[y])]
                    vals.append(2.0 * est.v_hat[idx] / est.delta_hat[idx])
            o_hat[v] = float(np.mean(vals))
        else:
            idx = pair_index[(inc[0], inc[1])]
            o_hat[v] = 2.0 * est.v_hat[idx] / est.delta_hat[idx]
    for v in range(g.n):
        if g.degree(v) == 1:
            u, e = g.neighbors(v)[0]
            o_hat[v] = o_hat[u] * est.u_hat[e] + 1.0
    ii, jj = g.edge_endpoints()
    product = o_hat[ii] * o_hat[jj] * est.u_hat
    a_hat = -0.5 + np.sqrt(0.25 + product)
    divergence = None if truth is None else divergence_d(as_weights(g, truth), a_hat)
    return EstimationReport(
        o_hat=o_hat, a_hat=a_hat, flags=est.error_flags, divergence=divergence
    )


def estimate_weights(
    g: Graph,
    v0: int,
    trajectories,
    m: int,
    truth=None,
    average_pairs: bool = False,
    threads: int = 1,
) -> EstimationReport:
    """Full pipeline: empirical moments, then weight recovery.

    A degree-1 start is re-anchored at its unique neighbor: the forced
    first step is dropped, recovery runs as if started there, and the
    crossed edge's weight is lowered by 1 to undo the forced crossing
    (its reported o at the original start is lowered by 2 accordingly).
    """
    steps = _steps_matrix(g, trajectories)
    if np.any(steps[:, 0] != v0):
        raise EstimatorError("trajectories do not start at the stated vertex")
    if g.degree(v0) >= 2:
        est = empirical_moments(g, steps, m, threads=threads)
        return recover_weights(g, v0, est, truth=truth, average_pairs=average_pairs)
    if steps.shape[1] < 2:
        raise EstimatorError("degree-1 re-anchoring needs at least one step")
    u, e0 = g.neighbors(v0)[0]
    est = empirical_moments(g, steps[:, 1:], m, threads=threads)
    rep = recover_weights(g, u, est, average_pairs=average_pairs)
    a_hat = rep.a_hat.copy()
    a_hat[e0] -= 1.0
    o_hat = rep.o_hat.copy()
    o_hat[v0] -= 2.0
    flags = set(rep.flags)
    if a_hat[e0] <= 0.0:
        flags.add(("degree_one_weight_nonpositive", e0))
    divergence = None
    if truth is not None and a_hat[e0] > 0.0:
        divergence = divergence_d(as_weights(g, truth), a_hat)
    return EstimationReport(
        o_hat=o_hat, a_hat=a_hat, flags=frozenset(flags), divergence=divergence
    )


def divergence_d(a, b) -> float:
    """Largest relative ratio distortion between two positive edge vectors:
    max over edges of (max(a_e/b_e, b_e/a_e) - 1)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size == 0:
        raise DimensionMismatchError(
            f"weight vectors must be equal-length and 1-d, got {a.shape} and {b.shape}"
        )
    if (
        not np.all(np.isfinite(a))
        or not np.all(np.isfinite(b))
        or np.any(a <= 0.0)
        or np.any(b <= 0.0)
    ):
        raise DomainError("weight vectors must be positive and finite")
    ratio = np.maximum(a / b, b / a)
    return float(ratio.max() - 1.0)


def _g1(a_lo: float, a_hi: float) -> float:
    return 3.0 * (math.log(2.0 * a_hi) + (2.0 * a_hi + 3.0 + 2.0 * _LN2) / a_lo)


def _check_bound_args(n: int, diam: int, a_lo: float, a_hi: float) -> None:
    if not (n >= 2 and diam >= 1):
        raise DomainError("need n >= 2 and diam >= 1")
    if not (0.0 < a_lo <= a_hi and np.isfinite(a_hi)):
        raise DomainError("need 0 < a_lo <= a_hi")


def theoretical_bounds(n: int, diam: int, a_lo: float, a_hi: float, delta: float) -> dict:
    """Log-space cover-time and occupancy bounds for weights in [a_lo, a_hi].

    Values are natural logs: tcov_bound is ln of the cover-time upper
    bound n^3 ln n (n/delta)^{2 g1 diam}; pi_star_bound and p_min_bound
    are ln of the stationary-mass and transition-probability lower
    bounds; q_range is (ln lower, ln upper) for the conductances.
    """
    _check_bound_args(n, diam, a_lo, a_hi)
    if not (0.0 < delta < 1.0):
        raise DomainError("delta must lie in (0, 1)")
    g1 = _g1(a_lo, a_hi)
    ln_ratio = math.log(n) - math.log(delta)
    exponent = 2.0 * g1 * diam * ln_ratio
    return {
        "g1": g1,
        "tcov_bound": 3.0 * math.log(n) + math.log(math.log(n)) + exponent,
        "pi_star_bound": -2.0 * math.log(n) - exponent,
        "p_min_bound": -math.log(n) - exponent,
        "q_range": (-g1 * diam * ln_ratio, g1 * diam * ln_ratio),
    }


def sample_size_plan(
    n: int,
    diam: int,
    a_lo: float,
    a_hi: float,
    eps: float,
    delta: float,
    g2: float = 1.0,
) -> dict:
    """Sample sizes guaranteeing eps-accurate recovery with confidence delta.

    Returns delta_prime and eps_prime linearly and m, T, K as natural
    logs (the values are astronomically large by construction): m is the
    per-vertex departure count, T the trajectory length, K the number of
    trajectories.  The cover-time constant g2 is not pinned down by the
    underlying bound; it defaults to 1 and scales T linearly.
    """
    _check_bound_args(n, diam, a_lo, a_hi)
    if not (0.0 < eps < 0.5):
        raise DomainError("eps must lie in (0, 1/2)")
    if not (0.0 < delta < 1.0):
        raise DomainError("delta must lie in (0, 1)")
    if not (g2 > 0.0 and np.isfinite(g2)):
        raise DomainError("g2 must be positive")
    g1 = _g1(a_lo, a_hi)
    na1 = n * a_hi + 1.0
    delta_prime = eps * min(
        a_lo * (a_lo + 1.0) / (9.0 * na1**2),
        a_lo**3 * (a_lo + 1.0) ** 2 / (18.0 * (a_hi + 3.0) * na1**4),
        a_lo**2 * (a_lo + 1.0) ** 2 / (18.0 * (a_hi + 3.0) * na1**4),
    )
    eps_prime = delta_prime
    ln_n = math.log(n)
    ln_dp = math.log(delta_prime)
    ln_m = (
        math.log(8.0)
        + 2.0 * ln_n
        - 2.0 * math.log(eps_prime)
        + 4.0 * g1 * diam * (ln_n - ln_dp)
        + math.log(math.log(2.0 * n * n) - ln_dp)
    )
    ln_t = (
        1.0
        + math.log(g2)
        + np.logaddexp(math.log(n**3 * math.log(n)), np.logaddexp(ln_m, 0.0) + 2.0 * ln_n)
        + 2.0 * g1 * diam * (ln_n - ln_dp)
        + math.log(1.0 - ln_dp)
    )
    ln_k = (
        4.0 * ln_n
        + 2.0 * math.log(a_hi + 3.0)
        + 8.0 * math.log(na1)
        + math.log(2.0 + 13.0 * a_lo**2)
        - math.log(delta)
        - 2.0 * math.log(eps)
        - 6.0 * math.log(a_lo)
        - 4.0 * math.log(a_lo + 1.0)
    )
    return {
        "g1": g1,
        "delta_prime": delta_prime,
        "eps_prime": eps_prime,
        "log_m": float(ln_m),
        "log_T": float(ln_t),
        "log_K": float(ln_k),
    }
