"""Linearly edge-reinforced random walks on finite connected graphs.

The walk starts at ``v0`` with positive initial edge weights ``a``; at
each step it crosses an incident edge with probability proportional to
that edge's current local time (initial weight plus crossings so far),
and the crossed edge's local time increases by one.

Besides forward simulation this module evaluates the exact closed-form
trajectory likelihood, which depends on a trajectory only through its
final edge crossing counts and per-vertex departure counts, exposes the
counting statistics themselves, and computes cover times.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as streams
from ._kernels import reinforced_walk
from .graphs import Graph, as_weights, vertex_weights
from .special import log_gamma

_LN2 = np.log(2.0)


class TrajectoryError(ValueError):
    """Base class for trajectory validation failures."""


class NonAdjacentStepError(TrajectoryError):
    """A trajectory steps between non-adjacent vertices."""


class MismatchedStartError(TrajectoryError):
    """A trajectory does not start at the stated start vertex."""


@dataclass(frozen=True)
class Trajectory:
    """A realized walk: vertices X_0..X_T with X_0 = v0."""

    v0: int
    steps: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.steps, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise TrajectoryError("steps must be a nonempty 1-d integer sequence")
        if int(arr[0]) != int(self.v0):
            raise MismatchedStartError(f"steps begin at {arr[0]}, expected {self.v0}")
        object.__setattr__(self, "steps", arr)
        object.__setattr__(self, "v0", int(self.v0))

    @property
    def T(self) -> int:
        return self.steps.size - 1


def _steps_of(traj) -> np.ndarray:
    if isinstance(traj, Trajectory):
        return traj.steps
    return np.asarray(traj, dtype=np.int64)


def validate_trajectory(g: Graph, traj) -> np.ndarray:
    """Check every step uses an edge of g; returns the steps array."""
    steps = _steps_of(traj)
    for t in range(steps.size - 1):
        if not g.has_edge(int(steps[t]), int(steps[t + 1])):
            raise NonAdjacentStepError(
                f"step {t}: no edge between {steps[t]} and {steps[t + 1]}"
            )
    return steps


def simulate_trajectory(g: Graph, a, v0: int, T: int, rng: np.random.Generator) -> Trajectory:
    """Sample one reinforced trajectory of T steps from v0."""
    a = as_weights(g, a)
    if not (0 <= v0 < g.n):
        raise TrajectoryError("start vertex out of range")
    if T < 0:
        raise TrajectoryError("T must be nonnegative")
    indptr, nbr, eid = g.csr()
    steps = np.empty(T + 1, dtype=np.int64)
    reinforced_walk(indptr, nbr, eid, a.copy(), v0, rng.random(T), steps)
    return Trajectory(v0=v0, steps=steps)


def simulate_batch(
    g: Graph, a, v0: int, T: int, K: int, master_seed: int, threads: int = 1
) -> list[Trajectory]:
    """K independent trajectories; draw k depends only on (master_seed, k)."""
    a = as_weights(g, a)
    if K < 1:
        raise TrajectoryError("K must be at least 1")
    if T < 0:
        raise TrajectoryError("T must be nonnegative")
    indptr, nbr, eid = g.csr()
    out = np.empty((K, T + 1), dtype=np.int64)

    def run(k: int):
        u = streams.stream(master_seed, k, streams.DOMAIN_WALK).random(T)
        reinforced_walk(indptr, nbr, eid, a.copy(), v0, u, out[k])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(K)))
    else:
        for k in range(K):
            run(k)
    return [Trajectory(v0=v0, steps=out[k]) for k in range(K)]


def edge_crossings(g: Graph, traj) -> np.ndarray:
    """Undirected crossing counts per canonical edge."""
    steps = validate_trajectory(g, traj)
    counts = np.zeros(g.m, dtype=np.int64)
    for t in range(steps.size - 1):
        counts[g.edge_id(int(steps[t]), int(steps[t + 1]))] += 1
    return counts


def local_times(g: Graph, a, traj) -> np.ndarray:
    """Final edge local times: initial weights plus crossings."""
    return as_weights(g, a) + edge_crossings(g, traj)


def transition_counts(g: Graph, traj):
    """Directed transition counts N_ij and departure counts N_i."""
    steps = validate_trajectory(g, traj)
    n_ij = np.zeros((g.n, g.n), dtype=np.int64)
    np.add.at(n_ij, (steps[:-1], steps[1:]), 1)
    return n_ij, n_ij.sum(axis=1)


def _edge_id_matrix(g: Graph) -> np.ndarray:
    mat = np.full((g.n, g.n), -1, dtype=np.int64)
    for k, (i, j) in enumerate(g.edges):
        mat[i, j] = k
        mat[j, i] = k
    return mat


def _batch_counts(g: Graph, steps_matrix: np.ndarray):
    """Per-row edge crossing counts and vertex departure counts."""
    eid_mat = _edge_id_matrix(g)
    ids = eid_mat[steps_matrix[:, :-1], steps_matrix[:, 1:]]
    if np.any(ids < 0):
        row, col = np.argwhere(ids < 0)[0]
        raise NonAdjacentStepError(
            f"trajectory {row}, step {col}: no edge between "
            f"{steps_matrix[row, col]} and {steps_matrix[row, col + 1]}"
        )
    rows = steps_matrix.shape[0]
    offsets = np.arange(rows, dtype=np.int64)[:, None]
    crossings = np.bincount(
        (ids + offsets * g.m).ravel(), minlength=rows * g.m
    ).reshape(rows, g.m)
    departures = np.bincount(
        (steps_matrix[:, :-1] + offsets * g.n).ravel(), minlength=rows * g.n
    ).reshape(rows, g.n)
    return crossings, departures


def trajectory_log_likelihoods(g: Graph, a, v0: int, steps_matrix) -> np.ndarray:
    """Log-likelihood of each row of an equal-length trajectory batch.

    The likelihood is a ratio of rising factorials in the final counts;
    each rising factorial is evaluated as a difference of log-gamma
    values, i.e. as the sum of its ln(a + i) terms, so arbitrarily long
    trajectories stay in a numerically safe range.
    """
    a = as_weights(g, a)
    steps_matrix = np.asarray(steps_matrix, dtype=np.int64)
    if steps_matrix.ndim != 2:
        raise TrajectoryError("expected a 2-d batch of equal-length trajectories")
    if np.any(steps_matrix[:, 0] != v0):
        raise MismatchedStartError("all trajectories must start at v0")
    if steps_matrix.shape[1] == 1:
        return np.zeros(steps_matrix.shape[0])

    crossings, departures = _batch_counts(g, steps_matrix)
    a_vertex = vertex_weights(g, a)

    numer = (log_gamma(a[None, :] + crossings) - log_gamma(a)[None, :]).sum(axis=1)

    half = np.where(np.arange(g.n) == v0, a_vertex / 2.0, (a_vertex + 1.0) / 2.0)
    denom = (
        departures * _LN2
        + log_gamma(half[None, :] + departures)
        - log_gamma(half)[None, :]
    ).sum(axis=1)
    return numer - denom


def log_likelihood(g: Graph, a, v0: int, trajectories) -> float:
    """Joint log-likelihood of one or more i.i.d. trajectories from v0."""
    if isinstance(trajectories, Trajectory) or (
        isinstance(trajectories, np.ndarray) and trajectories.ndim == 1
    ):
        trajectories = [trajectories]
    total = 0.0
    for traj in trajectories:
        steps = validate_trajectory(g, traj)
        total += float(trajectory_log_likelihoods(g, a, v0, steps[None, :])[0])
    return total


def enumerate_trajectories(g: Graph, v0: int, T: int) -> np.ndarray:
    """All length-T trajectories from v0 as a (count, T+1) matrix."""
    if not (0 <= v0 < g.n):
        raise TrajectoryError("start vertex out of range")
    if T < 0:
        raise TrajectoryError("T must be nonnegative")
    nbr_of = [np.array([u for u, _ in g.neighbors(v)], dtype=np.int64) for v in range(g.n)]
    deg = g.degrees
    cur = np.array([[v0]], dtype=np.int64)
    for _ in range(T):
        last = cur[:, -1]
        expanded = np.repeat(cur, deg[last], axis=0)
        nxt = np.concatenate([nbr_of[v] for v in last])
        cur = np.column_stack([expanded, nxt])
    return cur


@dataclass(frozen=True)
class CoverStatistics:
    """Cover time, m-cover time, and per-vertex visit counts."""

    tau_cov: int | None
    tau_cov_m: int | None
    visits: np.ndarray
    m: int


def cover_statistics(g: Graph, traj, m: int = 1) -> CoverStatistics:
    """First times the walk has visited every vertex (at least m times).

    The start vertex counts as visited at time 0; every later visit is
    an arrival. Times are step indices; None when the trajectory ends
    before reaching the target.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    steps = _steps_of(traj)
    visits = np.bincount(steps, minlength=g.n)

    tau_cov: int | None
    tau_cov_m: int | None
    if np.all(visits >= 1):
        tau_cov = int(max(int(np.argmax(steps == v)) for v in range(g.n)))
    else:
        tau_cov = None
    if np.all(visits >= m):
        tau_cov_m = int(max(int(np.flatnonzero(steps == v)[m - 1]) for v in range(g.n)))
    else:
        tau_cov_m = None
    return CoverStatistics(tau_cov=tau_cov, tau_cov_m=tau_cov_m, visits=visits, m=m)
