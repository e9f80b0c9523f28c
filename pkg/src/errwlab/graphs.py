"""Finite connected graphs with canonically ordered edges.

The graph model is deliberately small: undirected simple graphs on
vertices ``0..n-1``, kept immutable after validation.  Edges are stored
in canonical order (endpoints sorted within an edge, edge list sorted
lexicographically) and that order is the tie-break used everywhere an
edge-indexed vector appears: weight vectors, local times, conductances.

Numerical routines stay in log space where products over spanning trees
appear, because conductances arising from random environments span many
orders of magnitude.  Laplacian systems are solved with dense direct
factorizations, which caps the supported size at 512 vertices; larger
inputs fail loudly rather than silently degrade.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DENSE_VERTICES = 512


class GraphError(ValueError):
    """Base class for graph construction and solver failures."""


class EmptyGraphError(GraphError):
    """Fewer than two vertices, or no edges at all."""


class SelfLoopError(GraphError):
    """An edge joins a vertex to itself."""


class DuplicateEdgeError(GraphError):
    """The same undirected edge appears more than once."""


class DisconnectedError(GraphError):
    """The edge set does not connect all vertices."""


class NumericOverflowError(ArithmeticError):
    """A log-domain determinant degenerated beyond tolerance."""


class SingularSystemError(ArithmeticError):
    """A Laplacian linear system could not be solved."""


@dataclass(frozen=True)
class Graph:
    """Validated undirected connected graph with canonical edge order.

    Attributes
    ----------
    n : int
        Number of vertices, labeled 0..n-1.
    edges : tuple[tuple[int, int], ...]
        Canonical edge list: each pair has i < j, pairs sorted.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    _edge_ids: dict = field(init=False, repr=False, compare=False)
    _adjacency: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise EmptyGraphError("a graph needs at least two vertices")
        if len(self.edges) == 0:
            raise EmptyGraphError("a graph needs at least one edge")

        canon = []
        for edge in self.edges:
            if len(edge) != 2:
                raise GraphError(f"edge {edge!r} is not a pair")
            i, j = int(edge[0]), int(edge[1])
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphError(f"edge ({i},{j}) has a vertex outside 0..{self.n - 1}")
            if i == j:
                raise SelfLoopError(f"edge ({i},{j}) is a self-loop")
            canon.append((min(i, j), max(i, j)))
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise DuplicateEdgeError(f"edge {a} appears twice")
        object.__setattr__(self, "edges", tuple(canon))

        ids = {}
        adjacency = [[] for _ in range(self.n)]
        for k, (i, j) in enumerate(self.edges):
            ids[(i, j)] = k
            adjacency[i].append((j, k))
            adjacency[j].append((i, k))
        for lst in adjacency:
            lst.sort()
        object.__setattr__(self, "_edge_ids", ids)
        object.__setattr__(self, "_adjacency", tuple(tuple(lst) for lst in adjacency))

        seen = self._bfs_distances(0) >= 0
        if not seen.all():
            missing = int(np.flatnonzero(~seen)[0])
            raise DisconnectedError(f"vertex {missing} is not reachable from vertex 0")

    # -- basic accessors ------------------------------------------------

    @property
    def m(self) -> int:
        """Number of edges."""
        return len(self.edges)

    def edge_id(self, i: int, j: int) -> int:
        """Canonical index of the undirected edge {i, j}."""
        key = (min(i, j), max(i, j))
        try:
            return self._edge_ids[key]
        except KeyError:
            raise GraphError(f"no edge between {i} and {j}") from None

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._edge_ids

    def neighbors(self, v: int):
        """Neighbors of v in ascending order, paired with edge indices."""
        return self._adjacency[v]

    def degree(self, v: int) -> int:
        return len(self._adjacency[v])

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self._adjacency], dtype=np.int64)

    def incident_edges(self, v: int) -> list[int]:
        """Edge indices incident to v, ascending."""
        return sorted(k for _, k in self._adjacency[v])

    def csr(self):
        """(indptr, neighbor, edge_id) arrays for tight loops."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(self.n):
            indptr[v + 1] = indptr[v] + len(self._adjacency[v])
        nbr = np.empty(indptr[-1], dtype=np.int64)
        eid = np.empty(indptr[-1], dtype=np.int64)
        pos = 0
        for v in range(self.n):
            for j, k in self._adjacency[v]:
                nbr[pos] = j
                eid[pos] = k
                pos += 1
        return indptr, nbr, eid

    def edge_endpoints(self):
        """(m,) arrays of lower and upper endpoints in canonical order."""
        ii = np.array([e[0] for e in self.edges], dtype=np.int64)
        jj = np.array([e[1] for e in self.edges], dtype=np.int64)
        return ii, jj

    def _bfs_distances(self, root: int) -> np.ndarray:
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[root] = 0
        frontier = [root]
        while frontier:
            nxt = []
            for v in frontier:
                for u, _ in self._adjacency[v]:
                    if dist[u] < 0:
                        dist[u] = dist[v] + 1
                        nxt.append(u)
            frontier = nxt
        return dist


def as_weights(g: Graph, values, name: str = "weights") -> np.ndarray:
    """Validate an edge-indexed vector: length m, positive, finite."""
    w = np.asarray(values, dtype=np.float64)
    if w.shape != (g.m,):
        raise GraphError(f"{name} must have one entry per edge ({g.m}), got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise GraphError(f"{name} must be positive and finite")
    return w


def vertex_weights(g: Graph, a: np.ndarray) -> np.ndarray:
    """Per-vertex sums of incident edge weights."""
    a = as_weights(g, a, "edge weights")
    out = np.zeros(g.n)
    ii, jj = g.edge_endpoints()
    np.add.at(out, ii, a)
    np.add.at(out, jj, a)
    return out


def _check_dense_size(g: Graph):
    if g.n > MAX_DENSE_VERTICES:
        raise GraphError(
            f"dense Laplacian routines support at most {MAX_DENSE_VERTICES} vertices, got {g.n}"
        )


def _laplacian(g: Graph, w: np.ndarray) -> np.ndarray:
    lap = np.zeros((g.n, g.n))
    for k, (i, j) in enumerate(g.edges):
        lap[i, i] += w[k]
        lap[j, j] += w[k]
        lap[i, j] -= w[k]
        lap[j, i] -= w[k]
    return lap


def spanning_tree_log_sum(g: Graph, w) -> float:
    """ln of the weighted spanning-tree sum, via a reduced determinant.

    Each spanning tree contributes the product of its edge weights.  The
    computation factors out the largest log-weight so that weights with
    huge dynamic range neither overflow nor underflow: scaling every
    edge by c multiplies every tree by c^(n-1).
    """
    _check_dense_size(g)
    w = as_weights(g, w)
    logw = np.log(w)
    scale = float(logw.max())
    lap = _laplacian(g, np.exp(logw - scale))
    sign, logdet = np.linalg.slogdet(lap[1:, 1:])
    if sign <= 0 or not np.isfinite(logdet):
        raise NumericOverflowError("tree-sum determinant degenerated; weights too extreme")
    return float(logdet + (g.n - 1) * scale)


def effective_resistance(g: Graph, q, i: int, j: int) -> float:
    """Effective resistance between i and j for edge conductances q."""
    _check_dense_size(g)
    q = as_weights(g, q, "conductances")
    if i == j:
        raise GraphError("effective resistance needs two distinct vertices")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise GraphError("vertex out of range")

    # Ground a vertex chosen from the unordered pair so that swapping
    # (i, j) performs the identical computation.
    others = [v for v in range(g.n) if v != i and v != j]
    ground = others[0] if others else max(i, j)
    keep = [v for v in range(g.n) if v != ground]
    index = {v: p for p, v in enumerate(keep)}
    lap = _laplacian(g, q)[np.ix_(keep, keep)]
    current = np.zeros(len(keep))
    if i != ground:
        current[index[i]] += 1.0
    if j != ground:
        current[index[j]] -= 1.0
    try:
        potential = np.linalg.solve(lap, current)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Laplacian solve failed: {exc}") from exc
    value = float(current @ potential)
    if not np.isfinite(value) or value <= 0.0:
        raise SingularSystemError("resistance came out nonpositive or nonfinite")
    return value


def resistance_matrix(g: Graph, q) -> np.ndarray:
    """All-pairs effective resistances (one factorization, grounded at 0)."""
    _check_dense_size(g)
    q = as_weights(g, q, "conductances")
    lap = _laplacian(g, q)
    try:
        inv = np.linalg.inv(lap[1:, 1:])
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"Laplacian inverse failed: {exc}") from exc
    inv = 0.5 * (inv + inv.T)
    full = np.zeros((g.n, g.n))
    full[1:, 1:] = inv
    diag = np.diag(full)
    res = diag[:, None] + diag[None, :] - 2.0 * full
    np.fill_diagonal(res, 0.0)
    return res


def max_effective_resistance(g: Graph, q) -> float:
    return float(resistance_matrix(g, q).max())


def bfs_distances(g: Graph, root: int) -> np.ndarray:
    """Hop distances from root; the graph is connected so all are >= 0."""
    if not (0 <= root < g.n):
        raise GraphError("root out of range")
    return g._bfs_distances(root)


def diameter(g: Graph) -> int:
    return int(max(bfs_distances(g, v).max() for v in range(g.n)))


@dataclass(frozen=True)
class RootedTree:
    """A spanning tree with edges oriented toward the root.

    ``parent[v]`` is the next vertex on the unique path from v to the
    root (-1 at the root itself); ``order`` lists vertices so parents
    precede children; ``depth`` is the hop distance to the root.
    """

    tree: Graph
    root: int
    parent: np.ndarray
    depth: np.ndarray
    order: np.ndarray


def shortest_path_tree(g: Graph, root: int) -> RootedTree:
    """Breadth-first shortest-path tree, deterministic via neighbor order."""
    if not (0 <= root < g.n):
        raise GraphError("root out of range")
    parent = np.full(g.n, -1, dtype=np.int64)
    depth = np.full(g.n, -1, dtype=np.int64)
    depth[root] = 0
    order = [root]
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for u, _ in g.neighbors(v):
                if depth[u] < 0:
                    depth[u] = depth[v] + 1
                    parent[u] = v
                    order.append(u)
                    nxt.append(u)
        frontier = nxt
    edges = tuple((int(v), int(parent[v])) for v in range(g.n) if parent[v] >= 0)
    return RootedTree(
        tree=Graph(g.n, edges),
        root=root,
        parent=parent,
        depth=depth,
        order=np.array(order, dtype=np.int64),
    )


def is_tree(g: Graph) -> bool:
    return g.m == g.n - 1


# Convenience constructors used throughout the tests and demos.


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((v, v + 1) for v in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((v, (v + 1) % n) for v in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))
