"""Directed communication graphs: Laplacians, connectivity classification,
left null vectors, leader partitioning, and M-matrix diagonal scalings.

Edge (i, j) means node i is a neighbor of node j, i.e. information flows
from i to j.  Adjacency is unweighted.  In leader graphs node 0 is the
leader and the Laplacian is partitioned with the leader row/column first.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, GraphClassError, RankError, SchemaError, SynthesisError
from .linalg import DEFAULT_POLICY, eigenvalues, symmetrize


@dataclass(frozen=True)
class DirectedGraph:
    node_count: int
    edges: frozenset
    has_leader: bool = False

    def __post_init__(self):
        if self.node_count < 1:
            raise DimensionError("graph needs at least one node")
        object.__setattr__(self, "edges", frozenset((int(i), int(j)) for i, j in self.edges))
        for (i, j) in self.edges:
            if i == j:
                raise GraphClassError(f"self-loop at node {i} is not allowed")
            if not (0 <= i < self.node_count and 0 <= j < self.node_count):
                raise DimensionError(f"edge ({i}, {j}) out of range for {self.node_count} nodes")
        if self.has_leader and self.node_count < 2:
            raise GraphClassError("a leader graph needs at least one follower")

    @property
    def follower_count(self):
        return self.node_count - 1 if self.has_leader else self.node_count

    def sources_of(self, node):
        """Nodes whose state `node` can access (its neighbor set)."""
        return sorted(i for (i, j) in self.edges if j == node)

    def targets_of(self, node):
        return sorted(j for (i, j) in self.edges if i == node)


def adjacency(graph):
    """a[j, i] = 1 iff node j has access to node i (edge i -> j)."""
    a = np.zeros((graph.node_count, graph.node_count), dtype=int)
    for (i, j) in graph.edges:
        a[j, i] = 1
    return a


@dataclass(frozen=True)
class LaplacianBundle:
    laplacian: np.ndarray
    followers_block: np.ndarray = None  # N_f x N_f block over followers
    leader_column: np.ndarray = None    # N_f x 1 coupling to the leader

    @property
    def leader_links(self):
        """a_{i0} per follower: 1 where the follower hears the leader."""
        return -self.leader_column[:, 0]


def build_laplacian(graph):
    """Laplacian L with l_ii = sum_j a_ij and l_ij = -a_ij, built in integer
    arithmetic so row sums are exactly zero; leader graphs also carry the
    (followers_block, leader_column) partition."""
    a = adjacency(graph)
    lap = np.diag(a.sum(axis=1)) - a
    lap = lap.astype(float)
    if graph.has_leader:
        return LaplacianBundle(
            laplacian=lap,
            followers_block=lap[1:, 1:].copy(),
            leader_column=lap[1:, :1].copy(),
        )
    return LaplacianBundle(laplacian=lap)


def _reachable(graph, root, reverse=False):
    adj = [[] for _ in range(graph.node_count)]
    for (i, j) in graph.edges:
        if reverse:
            adj[j].append(i)
        else:
            adj[i].append(j)
    seen = [False] * graph.node_count
    seen[root] = True
    stack = [root]
    while stack:
        node = stack.pop()
        for nxt in adj[node]:
            if not seen[nxt]:
                seen[nxt] = True
                stack.append(nxt)
    return seen


def strongly_connected_components(graph):
    """Kosaraju decomposition; components are returned as sorted node lists."""
    n = graph.node_count
    adj = [[] for _ in range(n)]
    radj = [[] for _ in range(n)]
    for (i, j) in graph.edges:
        adj[i].append(j)
        radj[j].append(i)

    order = []
    seen = [False] * n
    for start in range(n):
        if seen[start]:
            continue
        stack = [(start, iter(adj[start]))]
        seen[start] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()

    comp = [-1] * n
    count = 0
    for start in reversed(order):
        if comp[start] != -1:
            continue
        stack = [start]
        comp[start] = count
        members = [start]
        while stack:
            node = stack.pop()
            for nxt in radj[node]:
                if comp[nxt] == -1:
                    comp[nxt] = count
                    stack.append(nxt)
                    members.append(nxt)
        count += 1
    groups = [[] for _ in range(count)]
    for node, c in enumerate(comp):
        groups[c].append(node)
    return [sorted(g) for g in groups]


def is_strongly_connected(graph):
    return len(strongly_connected_components(graph)) == 1


def has_spanning_tree_rooted_at(graph, root):
    if not (0 <= root < graph.node_count):
        raise DimensionError(f"root {root} out of range")
    return all(_reachable(graph, root))


def left_null_vector(laplacian, policy=DEFAULT_POLICY):
    """Positive left null vector r of the Laplacian, normalized to sum 1.

    Solves the bordered system [[L^T, 1], [1^T, 0]] [r; mu] = [0; 1] by LU
    with partial pivoting; for a strongly connected graph mu = 0 and r > 0.
    """
    lap = np.asarray(laplacian, dtype=float)
    n = lap.shape[0]
    bordered = np.zeros((n + 1, n + 1))
    bordered[:n, :n] = lap.T
    bordered[:n, n] = 1.0
    bordered[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    try:
        sol = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError as exc:
        raise GraphClassError(
            "zero is not a simple eigenvalue of the Laplacian; graph is not strongly connected"
        ) from exc
    r = sol[:n]
    if np.any(r <= 0.0):
        raise GraphClassError(
            "left null vector has non-positive entries; graph is not strongly connected"
        )
    residual = float(np.max(np.abs(r @ lap)))
    if residual > policy.null_residual:
        raise RankError(f"left null vector residual {residual:.3e} exceeds {policy.null_residual:.1e}")
    return r


def symmetrized_laplacian(laplacian, r, policy=DEFAULT_POLICY):
    """(Lhat, lambda2) with Lhat = R L + L^T R, R = diag(r).

    Lhat is the Laplacian of a connected undirected graph: symmetric PSD with
    a single zero eigenvalue; lambda2 is its smallest nonzero eigenvalue.
    """
    lap = np.asarray(laplacian, dtype=float)
    lhat = symmetrize(np.diag(r) @ lap + lap.T @ np.diag(r))
    vals = np.linalg.eigvalsh(lhat)
    if len(vals) < 2:
        raise GraphClassError("lambda2 needs at least two nodes")
    cluster = 1e-8 * max(vals[-1], 0.0)
    near_zero = int(np.sum(np.abs(vals) <= cluster))
    if near_zero != 1:
        raise GraphClassError(
            f"symmetrized Laplacian has {near_zero} near-zero eigenvalues; expected exactly 1"
        )
    return lhat, float(vals[1])


def is_nonsingular_m_matrix(m, policy=DEFAULT_POLICY):
    m = np.asarray(m, dtype=float)
    off = m - np.diag(np.diag(m))
    if np.any(off > 0.0):
        return False
    return bool(np.min(eigenvalues(m, policy).real) > 0.0)


def mmatrix_scaling(followers_block, policy=DEFAULT_POLICY, max_rebalance=60):
    """Positive diagonal scaling g with G M + M^T G > 0 for a nonsingular
    M-matrix M, plus lambda0 = lambda_min(G M + M^T G).

    Primary recipe: q = M^{-1} 1 (entrywise positive), g = 1/q.  If the
    definiteness check fails, rebalance up to max_rebalance times by doubling
    the g entry whose row contributes the most negative eigenvector weight to
    the quadratic form (doubling g_i adds 2 g_i v_i (M v)_i for the offending
    eigenvector v).  A two-sided scaling g = (M^{-T} 1) / (M^{-1} 1), which is
    definite for every nonsingular M-matrix, is the last resort.
    """
    m = np.asarray(followers_block, dtype=float)
    if not is_nonsingular_m_matrix(m, policy):
        raise GraphClassError("followers block is not a nonsingular M-matrix")
    q = np.linalg.solve(m, np.ones(m.shape[0]))
    if np.any(q <= 0.0):
        raise GraphClassError("M^{-1} 1 has non-positive entries; not an M-matrix")
    g = 1.0 / q
    for _ in range(max_rebalance + 1):
        gram = symmetrize(np.diag(g) @ m + m.T @ np.diag(g))
        vals, vecs = np.linalg.eigh(gram)
        if vals[0] > 0.0:
            return g, float(vals[0])
        vec = vecs[:, 0]
        g[int(np.argmax(g * vec * (m @ vec)))] *= 2.0
    g = np.linalg.solve(m.T, np.ones(m.shape[0])) / q
    gram = symmetrize(np.diag(g) @ m + m.T @ np.diag(g))
    smallest = float(np.linalg.eigvalsh(gram)[0])
    if np.all(g > 0.0) and smallest > 0.0:
        return g, smallest
    raise SynthesisError(
        f"diagonal rebalancing failed to certify G M + M^T G > 0 after {max_rebalance} doublings"
    )


@dataclass(frozen=True)
class LeaderlessCertificate:
    """Connectivity certificate of a strongly connected graph: positive left
    null vector r of L, the symmetrized Laplacian, and its smallest nonzero
    eigenvalue."""

    r: np.ndarray
    lhat: np.ndarray
    lambda2: float

    @property
    def weight_matrix(self):
        return np.diag(self.r)


@dataclass(frozen=True)
class LeaderCertificate:
    """Diagonal-scaling certificate of a leader graph: positive g with
    G L1 + L1' G > 0 over the followers block, and its smallest eigenvalue."""

    g: np.ndarray
    lambda0: float

    @property
    def scaling_matrix(self):
        return np.diag(self.g)


def spectral_certificate(graph, bundle=None, policy=DEFAULT_POLICY):
    """Build the graph-class certificate the protocol analysis relies on."""
    if bundle is None:
        bundle = build_laplacian(graph)
    if graph.has_leader:
        if not has_spanning_tree_rooted_at(graph, 0):
            raise GraphClassError("leader graph lacks a spanning tree rooted at the leader")
        g, lambda0 = mmatrix_scaling(bundle.followers_block, policy)
        return LeaderCertificate(g=g, lambda0=lambda0)
    if not is_strongly_connected(graph):
        raise GraphClassError("leaderless protocols require a strongly connected graph")
    r = left_null_vector(bundle.laplacian, policy)
    lhat, lambda2 = symmetrized_laplacian(bundle.laplacian, r, policy)
    return LeaderlessCertificate(r=r, lhat=lhat, lambda2=lambda2)


def write_graph_file(path, graph):
    lines = [f"N {graph.node_count} leader" if graph.has_leader else f"N {graph.node_count}"]
    lines += [f"{i} {j}" for (i, j) in sorted(graph.edges)]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph_file(path):
    """Edge-list format: first line "N <count> [leader]", then "i j" lines
    for directed edges i -> j (0-indexed; node 0 is the leader when flagged)."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = [ln.strip() for ln in fh.read().splitlines()]
    lines = [ln for ln in raw if ln and not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty graph file")
    head = lines[0].split()
    if len(head) < 2 or head[0] != "N":
        raise SchemaError(f"{path}: first line must be 'N <count> [leader]', got {lines[0]!r}")
    try:
        count = int(head[1])
    except ValueError as exc:
        raise SchemaError(f"{path}: bad node count {head[1]!r}") from exc
    has_leader = len(head) > 2 and head[2] == "leader"
    edges = set()
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise SchemaError(f"{path}: bad edge line {ln!r}")
        edges.add((int(parts[0]), int(parts[1])))
    return DirectedGraph(node_count=count, edges=frozenset(edges), has_leader=has_leader)
