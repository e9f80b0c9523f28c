"""Random environments coupled to the reinforced walk.

An environment for initial edge weights a is a pair of random fields:
independent Gamma(a_e, 1) variables beta_e on edges and a real field
phi on vertices anchored to zero at the start vertex, with conditional
density proportional to

    exp(-sum_e beta_e (cosh(phi_i - phi_j) - 1) - sum_{v != v0} phi_v)
        * sqrt(sum over spanning trees of prod_e beta_e e^{phi_i+phi_j}).

The conductances q_e = beta_e e^{phi_i+phi_j} induce a random transition
matrix P, and averaging the walk law of P over environments reproduces
the reinforced walk exactly.  On trees the phi field factorizes into
independent per-edge gradients with an explicit density, which gives an
exact sampler; general graphs use coordinate Metropolis.  The closed
form of the mixing density normalizer lives in the moments module and
is re-exported here.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as streams
from ._kernels import _log_tree_sum_inplace, phi_metropolis_chain
from .graphs import (
    Graph,
    GraphError,
    NumericOverflowError,
    as_weights,
    diameter,
    is_tree,
    shortest_path_tree,
    spanning_tree_log_sum,
    vertex_weights,
)
from .moments import log_normalizer_closed
from .special import DomainError, log_gamma
from .walk import simulate_trajectory, transition_counts

__all__ = [
    "Environment",
    "MCMCConfig",
    "E0NotIncidentError",
    "FieldError",
    "NonPositiveWeightError",
    "NotATreeError",
    "edge_transition_products",
    "environment_from_fields",
    "gradient_log_density",
    "log_normalizer_closed",
    "mixing_log_density",
    "mixing_normalization_quadrature",
    "sample_beta",
    "sample_environment_longrun",
    "sample_environments",
    "sample_phi_mcmc",
    "sample_phi_tree",
    "sample_tree_gradient",
    "phi_log_density_unnormalized",
    "tail_diagnostics",
]

_LN2 = math.log(2.0)
_HALF_LN_2PI = 0.5 * math.log(2.0 * math.pi)


class FieldError(ValueError):
    """Base class for malformed environment fields."""


class E0NotIncidentError(FieldError):
    """The reference edge does not touch the start vertex."""


class NonPositiveWeightError(FieldError):
    """A weight vector has an entry that is zero, negative, or non-finite."""


class NotATreeError(FieldError):
    """The operation needs a tree but the graph has a cycle."""


def _positive_vector(values, m: int, name: str) -> np.ndarray:
    w = np.asarray(values, dtype=np.float64)
    if w.shape != (m,):
        raise FieldError(f"{name} must have shape ({m},), got {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise NonPositiveWeightError(f"{name} must be positive and finite")
    return w


@dataclass(frozen=True)
class MCMCConfig:
    """Knobs for the coordinate-Metropolis phi sampler.

    step_size is the proposal scale before burn-in adaptation; the total
    sweep count of one draw is burn_in + thinning.
    """

    burn_in: int = 500
    thinning: int = 10
    step_size: float = 0.5
    chains: int = 1

    def __post_init__(self):
        if self.burn_in < 0 or self.thinning < 0:
            raise ValueError("burn_in and thinning must be nonnegative")
        if not (self.step_size > 0.0 and np.isfinite(self.step_size)):
            raise ValueError("step_size must be positive")
        if self.chains < 1:
            raise ValueError("chains must be at least 1")

    @property
    def sweeps(self) -> int:
        return self.burn_in + self.thinning


@dataclass(frozen=True)
class Environment:
    """One sampled environment: beta and phi fields plus conductances."""

    v0: int
    beta: np.ndarray
    phi: np.ndarray
    q: np.ndarray

    def validate(self, g: Graph) -> None:
        """Check the anchor, positivity, and beta/phi/q consistency."""
        beta = _positive_vector(self.beta, g.m, "beta")
        q = _positive_vector(self.q, g.m, "q")
        phi = np.asarray(self.phi, dtype=np.float64)
        if phi.shape != (g.n,) or not np.all(np.isfinite(phi)):
            raise FieldError(f"phi must be a finite vector of length {g.n}")
        if phi[self.v0] != 0.0:
            raise FieldError("phi must vanish at the start vertex")
        ii, jj = g.edge_endpoints()
        expected = beta * np.exp(phi[ii] + phi[jj])
        if np.max(np.abs(q - expected) / expected) > 1e-12:
            raise FieldError("q is inconsistent with beta and phi")


def environment_from_fields(g: Graph, beta, phi, v0: int) -> Environment:
    """Assemble an Environment, deriving q_e = beta_e e^{phi_i + phi_j}."""
    beta = _positive_vector(beta, g.m, "beta")
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (g.n,) or not np.all(np.isfinite(phi)):
        raise FieldError(f"phi must be a finite vector of length {g.n}")
    if not (0 <= v0 < g.n):
        raise FieldError("start vertex out of range")
    if phi[v0] != 0.0:
        raise FieldError("phi must vanish at the start vertex")
    ii, jj = g.edge_endpoints()
    q = beta * np.exp(phi[ii] + phi[jj])
    env = Environment(v0=int(v0), beta=beta, phi=phi, q=q)
    env.validate(g)
    return env


def transition_matrix(g: Graph, env) -> np.ndarray:
    """Row-stochastic matrix of the conductances: P_ij = q_ij / sum_j q_ij."""
    q = env.q if isinstance(env, Environment) else _positive_vector(env, g.m, "conductances")
    P = np.zeros((g.n, g.n))
    ii, jj = g.edge_endpoints()
    P[ii, jj] = q
    P[jj, ii] = q
    P /= P.sum(axis=1, keepdims=True)
    return P


def sample_beta(a, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Independent beta_e ~ Gamma(shape a_e, rate 1) draws.

    With size=None returns one vector shaped like a; otherwise a
    (size, len(a)) matrix of independent rows.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.size == 0 or not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise NonPositiveWeightError("weights must be a positive finite vector")
    if size is None:
        return rng.gamma(shape=a, scale=1.0)
    return rng.gamma(shape=a, scale=1.0, size=(int(size), a.size))


def gradient_log_density(y, a):
    """Log-density of the phi increment across a tree edge of weight a.

    ln p(y) = lnGamma(a+1/2) - ln sqrt(2 pi) - lnGamma(a)
              - y/2 - (a+1/2) ln cosh(y).
    """
    a = np.asarray(a, dtype=np.float64)
    if np.any(a <= 0.0) or not np.all(np.isfinite(a)):
        raise DomainError("edge weight must be positive")
    y = np.asarray(y, dtype=np.float64)
    # ln cosh(y) = |y| + log1p(e^{-2|y|}) - ln 2, stable for large |y|
    lncosh = np.abs(y) + np.log1p(np.exp(-2.0 * np.abs(y))) - _LN2
    out = (
        log_gamma(a + 0.5)
        - log_gamma(a)
        - _HALF_LN_2PI
        - 0.5 * y
        - (a + 0.5) * lncosh
    )
    if np.ndim(y) == 0 and np.ndim(a) == 0:
        return float(out)
    return out


def _gradient_acceptance_rate(a: float) -> float:
    """Exact mean acceptance of the two-sided-exponential rejection step."""
    log_target_mass = _HALF_LN_2PI + log_gamma(a) - log_gamma(a + 0.5)
    log_envelope_mass = (a + 0.5) * _LN2 + math.log(2.0 * a + 1.0) - math.log(a * (a + 1.0))
    return math.exp(log_target_mass - log_envelope_mass)


def sample_tree_gradient(a, rng: np.random.Generator, size: int | None = None):
    """Draw phi increments from the per-edge tree density by rejection.

    Proposal: density proportional to e^{-y/2 - (a+1/2)|y|}, a two-sided
    exponential with rates a+1 (right) and a (left); the envelope comes
    from cosh(y) >= e^{|y|}/2, so a proposal y is accepted with
    probability (1 + e^{-2|y|})^{-(a+1/2)}.
    """
    a = float(a)
    if not (a > 0.0 and np.isfinite(a)):
        raise DomainError("edge weight must be positive")
    want = 1 if size is None else int(size)
    if want < 0:
        raise ValueError("size must be nonnegative")
    rate = _gradient_acceptance_rate(a)
    p_right = a / (2.0 * a + 1.0)
    out = np.empty(want)
    filled = 0
    while filled < want:
        chunk = max(64, min(10_000_000, int(1.2 * (want - filled) / rate) + 16))
        signs = rng.random(chunk) < p_right
        mags = rng.exponential(1.0, chunk) / np.where(signs, a + 1.0, a)
        y = np.where(signs, mags, -mags)
        accept = np.log(rng.random(chunk)) < -(a + 0.5) * np.log1p(np.exp(-2.0 * mags))
        got = y[accept]
        take = min(got.size, want - filled)
        out[filled : filled + take] = got[:take]
        filled += take
    return float(out[0]) if size is None else out


def sample_phi_tree(tree: Graph, a, v0: int, rng: np.random.Generator, size: int | None = None):
    """Exact phi field on a tree: telescoped independent edge gradients.

    phi[v0] = 0 and phi[child] = phi[parent] + y_e with y_e drawn from
    gradient_log_density for the connecting edge.  No MCMC error.
    """
    if not is_tree(tree):
        raise NotATreeError("exact phi sampling needs a tree")
    a = as_weights(tree, a)
    if not (0 <= v0 < tree.n):
        raise FieldError("start vertex out of range")
    spt = shortest_path_tree(tree, v0)
    k = 1 if size is None else int(size)
    phi = np.zeros((k, tree.n))
    for v in spt.order[1:]:
        p = spt.parent[v]
        e = tree.edge_id(int(v), int(p))
        phi[:, v] = phi[:, p] + sample_tree_gradient(a[e], rng, size=k)
    return phi[0] if size is None else phi


def phi_log_density_unnormalized(g: Graph, a, v0: int, beta, phi) -> float:
    """ln p_beta(phi) up to the constant (2 pi)^{-(n-1)/2}.

    Evaluates -sum_e beta_e (cosh(phi_i - phi_j) - 1) - sum_{v != v0} phi_v
    plus half the log spanning-tree sum with edge weights
    beta_e e^{phi_i + phi_j}, all in log space.
    """
    as_weights(g, a)
    beta = _positive_vector(beta, g.m, "beta")
    phi = np.asarray(phi, dtype=np.float64)
    if phi.shape != (g.n,) or not np.all(np.isfinite(phi)):
        raise FieldError(f"phi must be a finite vector of length {g.n}")
    if phi[v0] != 0.0:
        raise FieldError("phi must vanish at the start vertex")
    ii, jj = g.edge_endpoints()
    dphi = phi[ii] - phi[jj]
    value = -np.sum(beta * (np.cosh(dphi) - 1.0)) - (phi.sum() - phi[v0])
    scratch = np.zeros((g.n - 1, g.n - 1))
    tree_term = _log_tree_sum_inplace(
        g.n - 1, g.m, ii, jj, np.log(beta), phi, scratch
    )
    if not np.isfinite(tree_term):
        raise NumericOverflowError("tree-sum determinant degenerated")
    return float(value + 0.5 * tree_term)


def sample_phi_mcmc(
    g: Graph,
    a,
    v0: int,
    beta,
    cfg: MCMCConfig | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Approximate draw of phi given beta by coordinate Metropolis.

    Starts at phi = 0, runs burn_in + thinning sweeps with the proposal
    scale adapted toward 0.4 acceptance during burn-in, and returns the
    final state.  With cfg.chains > 1, independent chains run and one
    final state is chosen uniformly.
    """
    as_weights(g, a)
    beta = _positive_vector(beta, g.m, "beta")
    if not (0 <= v0 < g.n):
        raise FieldError("start vertex out of range")
    if cfg is None:
        cfg = MCMCConfig()
    if rng is None:
        raise ValueError("an explicit rng is required")
    ii, jj = g.edge_endpoints()
    indptr, nbr, eid = g.csr()
    logbeta = np.log(beta)
    tree = is_tree(g)
    count = cfg.sweeps * (g.n - 1)
    finals = np.zeros((cfg.chains, g.n))
    for c in range(cfg.chains):
        phi = np.zeros(g.n)
        phi_metropolis_chain(
            ii,
            jj,
            indptr,
            nbr,
            eid,
            beta,
            logbeta,
            v0,
            tree,
            cfg.sweeps,
            cfg.burn_in,
            cfg.step_size,
            rng.standard_normal(count),
            rng.random(count),
            phi,
        )
        finals[c] = phi
    if cfg.chains == 1:
        return finals[0]
    return finals[rng.integers(cfg.chains)]


def _tree_environment_batch(g: Graph, a: np.ndarray, v0: int, k: int, rng):
    spt = shortest_path_tree(g, v0)
    phi = np.zeros((k, g.n))
    y = np.zeros((k, g.m))
    for v in spt.order[1:]:
        p = spt.parent[v]
        e = g.edge_id(int(v), int(p))
        y[:, e] = sample_tree_gradient(a[e], rng, size=k)
        phi[:, v] = phi[:, p] + y[:, e]
    # Conditionally on the gradients, beta_e is Gamma(a_e + 1/2) with
    # rate cosh(y_e); drawing beta independently of y breaks the joint law.
    beta = rng.gamma(shape=a + 0.5, scale=1.0, size=(k, g.m)) / np.cosh(y)
    return beta, phi


def _mcmc_environment_batch(
    g: Graph,
    a: np.ndarray,
    v0: int,
    k: int,
    master_seed: int,
    cfg: MCMCConfig,
    threads: int,
):
    ii, jj = g.edge_endpoints()
    indptr, nbr, eid = g.csr()
    tree = is_tree(g)
    count = cfg.sweeps * (g.n - 1)
    betas = np.empty((k, g.m))
    phis = np.zeros((k, g.n))

    def one(i: int) -> None:
        rng = streams.stream(master_seed, i, streams.DOMAIN_ENV)
        beta = rng.gamma(shape=a, scale=1.0)
        logbeta = np.log(beta)
        finals = np.zeros((cfg.chains, g.n))
        for c in range(cfg.chains):
            phi = np.zeros(g.n)
            phi_metropolis_chain(
                ii,
                jj,
                indptr,
                nbr,
                eid,
                beta,
                logbeta,
                v0,
                tree,
                cfg.sweeps,
                cfg.burn_in,
                cfg.step_size,
                rng.standard_normal(count),
                rng.random(count),
                phi,
            )
            finals[c] = phi
        choice = 0 if cfg.chains == 1 else int(rng.integers(cfg.chains))
        betas[i] = beta
        phis[i] = finals[choice]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(k)))
    else:
        for i in range(k):
            one(i)
    return betas, phis


def sample_environments(
    g: Graph,
    a,
    v0: int,
    k: int,
    master_seed: int,
    method: str = "auto",
    cfg: MCMCConfig | None = None,
    threads: int = 1,
):
    """k independent environments as (beta, phi) matrices.

    method "tree" uses the exact per-edge gradient sampler (trees only);
    "mcmc" draws beta ~ Gamma and runs one Metropolis chain per draw
    with an independent seed; "auto" picks "tree" when possible.
    """
    a = as_weights(g, a)
    if not (0 <= v0 < g.n):
        raise FieldError("start vertex out of range")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if method == "auto":
        method = "tree" if is_tree(g) else "mcmc"
    if method == "tree":
        if not is_tree(g):
            raise NotATreeError("exact environment sampling needs a tree")
        rng = streams.stream(master_seed, 0, streams.DOMAIN_ENV)
        return _tree_environment_batch(g, a, v0, k, rng)
    if method == "mcmc":
        if cfg is None:
            cfg = MCMCConfig()
        return _mcmc_environment_batch(g, a, v0, k, master_seed, cfg, threads)
    raise ValueError(f"unknown sampling method {method!r}")


def edge_transition_products(g: Graph, beta, phi) -> np.ndarray:
    """U_e = P_ij P_ji per environment row, for (k, m) beta and (k, n) phi."""
    beta = np.atleast_2d(np.asarray(beta, dtype=np.float64))
    phi = np.atleast_2d(np.asarray(phi, dtype=np.float64))
    ii, jj = g.edge_endpoints()
    q = beta * np.exp(phi[:, ii] + phi[:, jj])
    strength = np.zeros((q.shape[0], g.n))
    np.add.at(strength, (slice(None), ii), q)
    np.add.at(strength, (slice(None), jj), q)
    return q * q / (strength[:, ii] * strength[:, jj])


def sample_environment_longrun(
    g: Graph, a, v0: int, t_long: int, rng: np.random.Generator
) -> np.ndarray:
    """Empirical transition matrix of one long reinforced trajectory.

    Rows of unvisited (or never-departed) vertices fall back to the
    uniform law over neighbors; non-neighbor entries are zero.
    """
    a = as_weights(g, a)
    traj = simulate_trajectory(g, a, v0, int(t_long), rng)
    nij, ni = transition_counts(g, traj)
    p = np.zeros((g.n, g.n))
    for i in range(g.n):
        if ni[i] > 0:
            p[i] = nij[i] / ni[i]
        else:
            for j, _ in g.neighbors(i):
                p[i, j] = 1.0 / g.degree(i)
    return p


def mixing_log_density(g: Graph, a, v0: int, e0, w) -> float:
    """ln of the normalized stationary-weight density at w, with w_{e0} = 1.

    The density in the edge weights w (one per edge, the reference edge
    pinned to 1) is

        Z^{-1} sqrt(w_{v0}) prod_e w_e^{a_e - 1} / prod_v w_v^{(a_v+1)/2}
            * sqrt(sum over spanning trees of prod_{e in T} w_e)

    with w_v the sum of incident w_e and Z from log_normalizer_closed.
    """
    a = _positive_vector(a, g.m, "weights")
    w = _positive_vector(w, g.m, "stationary weights")
    if isinstance(e0, (tuple, list)):
        e0 = g.edge_id(*e0)
    e0 = int(e0)
    if not (0 <= e0 < g.m):
        raise GraphError("reference edge id out of range")
    if v0 not in g.edges[e0]:
        raise E0NotIncidentError("reference edge must touch the start vertex")
    if abs(w[e0] - 1.0) > 1e-12:
        raise FieldError("the reference edge weight must be pinned to 1")

    wv = vertex_weights(g, w)
    av = vertex_weights(g, a)
    o = av + 1.0
    o[v0] -= 1.0
    logw = np.log(w)
    scale = float(logw.max())
    tree_sum = spanning_tree_log_sum(g, np.exp(logw - scale)) + (g.n - 1) * scale
    value = (
        np.sum((a - 1.0) * logw)
        - np.sum(o / 2.0 * np.log(wv))
        + 0.5 * tree_sum
        - log_normalizer_closed(g, a, v0)
    )
    return float(value)


def mixing_normalization_quadrature(g: Graph, a, v0: int, e0, tol: float = 1e-10) -> float:
    """Integral of exp(mixing_log_density) over the free edge weights.

    Quadrature on u = ln w truncated at |u| <= 40; supports at most two
    free edges.  Used as an oracle for the closed-form normalizer: the
    result should be 1.
    """
    from scipy import integrate

    a = _positive_vector(a, g.m, "weights")
    if isinstance(e0, (tuple, list)):
        e0 = g.edge_id(*e0)
    e0 = int(e0)
    free = [e for e in range(g.m) if e != e0]
    if len(free) > 2:
        raise ValueError("quadrature oracle supports at most two free edges")

    def density(us):
        w = np.ones(g.m)
        for e, u in zip(free, us):
            w[e] = math.exp(u)
        try:
            # d w = w d u per free edge
            return math.exp(mixing_log_density(g, a, v0, e0, w) + sum(us))
        except NumericOverflowError:
            # Extreme corners lose the tree determinant to rounding; the
            # density there is far below the quadrature tolerance.
            return 0.0

    if len(free) == 0:
        return density(())
    if len(free) == 1:
        value, _ = integrate.quad(
            lambda u: density((u,)), -40.0, 40.0, epsabs=tol, epsrel=tol, limit=400
        )
        return float(value)
    value, _ = integrate.dblquad(
        lambda u2, u1: density((u1, u2)),
        -40.0,
        40.0,
        lambda _: -40.0,
        lambda _: 40.0,
        epsabs=max(tol, 1e-9),
        epsrel=max(tol, 1e-9),
    )
    return float(value)


def _binomial_flag(freq: float, bound: float, k: int) -> bool:
    bound = min(bound, 1.0)
    sigma = math.sqrt(bound * (1.0 - bound) / k)
    return freq > bound + 3.0 * sigma


def tail_diagnostics(g: Graph, a, phi, delta: float, beta=None) -> dict:
    """Empirical exceedance frequencies of phi samples vs closed tail bounds.

    phi is a (k, n) matrix of independent field samples, k >= 1000.
    Reports, per bound, the theoretical threshold, the bound value, the
    empirical frequency, and a flag raised when the frequency exceeds
    the bound by more than three binomial standard deviations.
    """
    a = as_weights(g, a)
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 2 or phi.shape[1] != g.n:
        raise FieldError(f"phi samples must form a (k, {g.n}) matrix")
    k = phi.shape[0]
    if k < 1000:
        raise ValueError("tail diagnostics need at least 1000 samples")
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must lie in (0, 1]")

    a_min = float(a.min())
    a_max = float(a.max())
    n = g.n
    diam = diameter(g)
    ii, jj = g.edge_endpoints()
    grad = np.abs(phi[:, ii] - phi[:, jj])

    sup_threshold = diam * ((2.0 * a_max + 1.0) / a_min + math.log(n / delta) / a_min)
    sup_freq = float(np.mean(np.max(np.abs(phi), axis=1) > sup_threshold))
    report = {
        "n_samples": k,
        "delta": delta,
        "sup_phi": {
            "threshold": sup_threshold,
            "bound": delta,
            "frequency": sup_freq,
            "flag": _binomial_flag(sup_freq, delta, k),
        },
        "gradient_tail": [],
    }

    for e in range(g.m):
        for s in (2.0, 4.0, 6.0):
            bound = min(1.0, 2.0 ** (2.0 * a[e] + 1.0) * math.exp(-a[e] * s))
            freq = float(np.mean(grad[:, e] >= s))
            report["gradient_tail"].append(
                {
                    "edge": g.edges[e],
                    "s": s,
                    "bound": bound,
                    "frequency": freq,
                    "flag": _binomial_flag(freq, bound, k),
                }
            )

    if is_tree(g):
        c = math.log(1.0 / delta) / n if delta < 1.0 else 0.0
        threshold = 2.0 * (c + a_max + 3.0) * n / a_min
        freq = float(np.mean(grad.sum(axis=1) > threshold))
        report["gradient_sum"] = {
            "threshold": threshold,
            "bound": delta,
            "frequency": freq,
            "flag": _binomial_flag(freq, delta, k),
        }

    if beta is not None:
        beta = np.asarray(beta, dtype=np.float64)
        report["beta_range"] = {
            "min": float(beta.min()),
            "max": float(beta.max()),
            "mean": float(beta.mean()),
        }

    report["flagged"] = report["sup_phi"]["flag"] or any(
        item["flag"] for item in report["gradient_tail"]
    )
    if "gradient_sum" in report:
        report["flagged"] = report["flagged"] or report["gradient_sum"]["flag"]
    return report
