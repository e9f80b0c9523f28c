"""Closed-form moments of reinforced-walk transition products.

For an edge e = {i, j}, let U_e = P_ij P_ji be the product of the two
directed transition probabilities of the random environment coupled to
the walk.  These moments admit exact closed forms in the initial edge
weights through the per-vertex quantities

    a_v = sum of initial weights on edges at v,
    o_v = a_v + 1, minus 1 at the start vertex,

and they are the verification targets for every sampler in the package
as well as the algebraic backbone of the weight estimator.  This module
also evaluates the closed-form KL divergence between the environment
laws of two weight vectors, and the normalizing constant of the
environment density, all via the hand-written special functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph, as_weights, vertex_weights
from .special import DomainError, digamma, log_gamma

_LN2 = np.log(2.0)
_LN_PI = np.log(np.pi)


class MomentError(ValueError):
    """Base class for moment-formula misuse."""


class NotAdjacentError(MomentError):
    """The two edges do not share exactly one vertex."""


class SharedTwoVerticesError(MomentError):
    """The two edges coincide (parallel edges cannot occur)."""


def _o_values(g: Graph, a: np.ndarray, v0: int) -> np.ndarray:
    o = vertex_weights(g, a) + 1.0
    o[v0] -= 1.0
    return o


@dataclass(frozen=True)
class MomentOracle:
    """Closed-form moment evaluator for a weighted graph and start vertex.

    The start vertex must have degree at least 2; the estimator's
    degree-1 reduction is applied by callers before building an oracle.
    """

    g: Graph
    a: np.ndarray
    v0: int
    a_vertex: np.ndarray = field(init=False)
    o: np.ndarray = field(init=False)

    def __post_init__(self):
        a = as_weights(self.g, self.a)
        if not (0 <= self.v0 < self.g.n):
            raise MomentError("start vertex out of range")
        if self.g.degree(self.v0) < 2:
            raise MomentError("start vertex must have degree at least 2")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a_vertex", vertex_weights(self.g, a))
        object.__setattr__(self, "o", _o_values(self.g, a, self.v0))

    def _edge(self, e) -> int:
        if isinstance(e, (tuple, list)):
            return self.g.edge_id(*e)
        return int(e)


def expected_u(oracle: MomentOracle, e) -> float:
    """E[U_e] = a_e (a_e + 1) / (o_i o_j)."""
    k = oracle._edge(e)
    i, j = oracle.g.edges[k]
    ae = oracle.a[k]
    return float(ae * (ae + 1.0) / (oracle.o[i] * oracle.o[j]))


def expected_sqrt_u(oracle: MomentOracle, e) -> float:
    """E[sqrt(U_e)], a ratio of gamma values at the half-integers o_v/2."""
    k = oracle._edge(e)
    i, j = oracle.g.edges[k]
    ae = oracle.a[k]
    log_ratio = (
        log_gamma(oracle.o[i] / 2.0)
        - log_gamma((oracle.o[i] + 1.0) / 2.0)
        + log_gamma(oracle.o[j] / 2.0)
        - log_gamma((oracle.o[j] + 1.0) / 2.0)
    )
    return float(ae / 2.0 * np.exp(log_ratio))


def expected_u_sq(oracle: MomentOracle, e) -> float:
    """E[U_e^2] = a_e..(a_e+3) rising factorial over o_i(o_i+2) o_j(o_j+2)."""
    k = oracle._edge(e)
    i, j = oracle.g.edges[k]
    ae = oracle.a[k]
    numer = ae * (ae + 1.0) * (ae + 2.0) * (ae + 3.0)
    denom = oracle.o[i] * (oracle.o[i] + 2.0) * oracle.o[j] * (oracle.o[j] + 2.0)
    return float(numer / denom)


def _shared_vertex(g: Graph, k1: int, k2: int) -> int | None:
    e1, e2 = set(g.edges[k1]), set(g.edges[k2])
    common = e1 & e2
    if len(common) == 2:
        raise SharedTwoVerticesError("edges coincide")
    if len(common) == 1:
        return common.pop()
    return None


def expected_uu(oracle: MomentOracle, e, e2) -> float:
    """E[U_e U_e'] for distinct edges sharing zero or one vertex."""
    k1, k2 = oracle._edge(e), oracle._edge(e2)
    if k1 == k2:
        raise SharedTwoVerticesError("edges coincide")
    j = _shared_vertex(oracle.g, k1, k2)
    if j is None:
        return expected_u(oracle, k1) * expected_u(oracle, k2)
    i = next(v for v in oracle.g.edges[k1] if v != j)
    l = next(v for v in oracle.g.edges[k2] if v != j)
    a1, a2 = oracle.a[k1], oracle.a[k2]
    numer = a1 * (a1 + 1.0) * a2 * (a2 + 1.0)
    denom = oracle.o[i] * oracle.o[l] * oracle.o[j] * (oracle.o[j] + 2.0)
    return float(numer / denom)


def covariance_gap(oracle: MomentOracle, e, e2) -> float:
    """E[U_e] E[U_e'] − E[U_e U_e'] for edges sharing one vertex.

    Strictly positive: the two transition products are negatively
    correlated through their shared vertex.
    """
    k1, k2 = oracle._edge(e), oracle._edge(e2)
    if k1 == k2:
        raise SharedTwoVerticesError("edges coincide")
    if _shared_vertex(oracle.g, k1, k2) is None:
        raise NotAdjacentError("edges share no vertex")
    return expected_u(oracle, k1) * expected_u(oracle, k2) - expected_uu(oracle, k1, k2)


def log_normalizer_closed(g: Graph, a, v0: int) -> float:
    """ln of the environment-density normalizing constant.

    Closed form: (n−1)/2 · ln π − (1 − n + Σ_e a_e) · ln 2
    + Σ_e lnΓ(a_e) − Σ_v lnΓ(o_v / 2).
    """
    a = as_weights(g, a)
    if not (0 <= v0 < g.n):
        raise MomentError("start vertex out of range")
    o = _o_values(g, a, v0)
    return float(
        (g.n - 1) / 2.0 * _LN_PI
        - (1.0 - g.n + a.sum()) * _LN2
        + log_gamma(a).sum()
        - log_gamma(o / 2.0).sum()
    )


def log_normalizer_gradient(g: Graph, a, v0: int) -> np.ndarray:
    """Per-edge derivative of log_normalizer_closed in the edge weight."""
    a = as_weights(g, a)
    o = _o_values(g, a, v0)
    psi_half = digamma(o / 2.0)
    ii, jj = g.edge_endpoints()
    return -_LN2 + digamma(a) - 0.5 * (psi_half[ii] + psi_half[jj])


def kl_mixing(g: Graph, v0: int, a, a_tilde) -> float:
    """KL divergence between the environment laws of two weight vectors.

    Evaluated in the fully explicit gamma/digamma form; nonnegative up
    to rounding, and zero when the weights coincide.
    """
    a = as_weights(g, a, "weights")
    at = as_weights(g, a_tilde, "alternative weights")
    o = _o_values(g, a, v0)
    ot = _o_values(g, at, v0)

    term_vertices = (log_gamma(o / 2.0) - log_gamma(ot / 2.0)).sum()
    term_edges = (log_gamma(at) - log_gamma(a)).sum()
    term_linear = (a - at) * _LN2
    term_grad = (a - at) * log_normalizer_gradient(g, a, v0)
    return float(term_linear.sum() + term_vertices + term_edges + term_grad.sum())
