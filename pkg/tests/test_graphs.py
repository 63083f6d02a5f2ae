import numpy as np
import pytest

from consensim.errors import GraphClassError, SchemaError
from consensim.graphs import (
    DirectedGraph,
    LeaderCertificate,
    LeaderlessCertificate,
    build_laplacian,
    has_spanning_tree_rooted_at,
    is_nonsingular_m_matrix,
    is_strongly_connected,
    left_null_vector,
    mmatrix_scaling,
    read_graph_file,
    spectral_certificate,
    symmetrized_laplacian,
    write_graph_file,
)

from oracles import floyd_warshall_reachability, random_digraph_edges


def cycle_graph(n):
    return DirectedGraph(n, frozenset((i, (i + 1) % n) for i in range(n)))


def random_graph(rng, n, p=0.35, leader=False):
    return DirectedGraph(n, frozenset(random_digraph_edges(rng, n, p)), has_leader=leader)


def random_strongly_connected(rng, n, p=0.4):
    while True:
        g = random_graph(rng, n, p)
        if is_strongly_connected(g):
            return g


class TestBuildLaplacian:
    def test_single_edge(self):
        g = DirectedGraph(2, frozenset({(0, 1)}))
        lap = build_laplacian(g).laplacian
        assert np.array_equal(lap, np.array([[0.0, 0.0], [-1.0, 1.0]]))

    def test_directed_cycle_is_circulant(self):
        lap = build_laplacian(cycle_graph(3)).laplacian
        expected = np.array([[1.0, 0.0, -1.0], [-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
        assert np.array_equal(lap, expected)

    def test_row_sums_exactly_zero(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            g = random_graph(rng, int(rng.integers(2, 9)))
            lap = build_laplacian(g).laplacian
            assert np.array_equal(lap @ np.ones(g.node_count), np.zeros(g.node_count))

    def test_sign_structure(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            g = random_graph(rng, 6)
            lap = build_laplacian(g).laplacian
            off = lap - np.diag(np.diag(lap))
            assert np.all(off <= 0.0)
            assert np.all(np.diag(lap) >= 0.0)

    def test_leader_partition(self):
        g = DirectedGraph(3, frozenset({(0, 1), (1, 2)}), has_leader=True)
        bundle = build_laplacian(g)
        assert np.array_equal(bundle.followers_block, np.array([[1.0, 0.0], [-1.0, 1.0]]))
        assert np.array_equal(bundle.leader_column, np.array([[-1.0], [0.0]]))
        assert np.array_equal(bundle.leader_links, np.array([1.0, 0.0]))

    def test_rejects_self_loop(self):
        with pytest.raises(GraphClassError):
            DirectedGraph(2, frozenset({(0, 0)}))


class TestConnectivity:
    def test_cycle_strongly_connected(self):
        assert is_strongly_connected(cycle_graph(3))

    def test_chain_not_strongly_connected(self):
        g = DirectedGraph(3, frozenset({(0, 1), (1, 2)}))
        assert not is_strongly_connected(g)

    def test_matches_reachability_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            g = random_graph(rng, n)
            reach = floyd_warshall_reachability(n, g.edges)
            assert is_strongly_connected(g) == bool(np.all(reach))

    def test_star_has_spanning_tree(self):
        g = DirectedGraph(4, frozenset({(0, 1), (0, 2), (0, 3)}))
        assert has_spanning_tree_rooted_at(g, 0)
        assert not has_spanning_tree_rooted_at(g, 1)

    def test_isolated_node_has_none(self):
        g = DirectedGraph(3, frozenset({(0, 1)}))
        assert not has_spanning_tree_rooted_at(g, 0)

    def test_spanning_tree_iff_simple_zero_eigenvalue(self):
        # cross-check against the zero-eigenvalue multiplicity of L
        rng = np.random.default_rng(8)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            g = random_graph(rng, n, p=0.3)
            lap = build_laplacian(g).laplacian
            vals = np.linalg.eigvals(lap)
            zero_multiplicity = int(np.sum(np.abs(vals) < 1e-7))
            has_tree = any(has_spanning_tree_rooted_at(g, r) for r in range(n))
            assert (zero_multiplicity == 1) == has_tree


class TestLeftNullVector:
    def test_cycle_uniform(self):
        lap = build_laplacian(cycle_graph(3)).laplacian
        assert np.allclose(left_null_vector(lap), np.full(3, 1.0 / 3.0), atol=1e-12)

    def test_balanced_graph_uniform(self):
        # bidirectional chain: in-degree equals out-degree at every node
        g = DirectedGraph(3, frozenset({(0, 1), (1, 0), (1, 2), (2, 1)}))
        lap = build_laplacian(g).laplacian
        assert np.allclose(left_null_vector(lap), np.full(3, 1.0 / 3.0), atol=1e-12)

    def test_random_residual(self):
        rng = np.random.default_rng(10)
        for _ in range(30):
            g = random_strongly_connected(rng, 6)
            lap = build_laplacian(g).laplacian
            r = left_null_vector(lap)
            assert np.max(np.abs(r @ lap)) <= 1e-10
            assert np.all(r > 0)
            assert abs(r.sum() - 1.0) < 1e-12

    def test_rejects_disconnected(self):
        g = DirectedGraph(4, frozenset({(0, 1), (1, 0), (2, 3), (3, 2)}))
        with pytest.raises(GraphClassError):
            left_null_vector(build_laplacian(g).laplacian)


class TestSymmetrizedLaplacian:
    def test_directed_cycle(self):
        # Lhat = (1/3)(3 I - J); J has spectrum {3, 0, 0}, so Lhat has {0, 1, 1}
        lap = build_laplacian(cycle_graph(3)).laplacian
        r = left_null_vector(lap)
        lhat, lambda2 = symmetrized_laplacian(lap, r)
        assert np.allclose(lhat, (np.eye(3) * 3 - np.ones((3, 3))) / 3.0, atol=1e-12)
        assert abs(lambda2 - 1.0) < 1e-12

    def test_complete_graph(self):
        # L = 3 I - J, r uniform: Lhat = (2/3) L with spectrum {0, 2, 2}
        g = DirectedGraph(3, frozenset((i, j) for i in range(3) for j in range(3) if i != j))
        lap = build_laplacian(g).laplacian
        r = left_null_vector(lap)
        _, lambda2 = symmetrized_laplacian(lap, r)
        assert abs(lambda2 - 2.0) < 1e-12

    def test_lambda2_positive_and_psd(self):
        rng = np.random.default_rng(12)
        for _ in range(40):
            g = random_strongly_connected(rng, int(rng.integers(2, 8)))
            lap = build_laplacian(g).laplacian
            r = left_null_vector(lap)
            lhat, lambda2 = symmetrized_laplacian(lap, r)
            assert lambda2 > 0
            vals = np.linalg.eigvalsh(lhat)
            assert vals[0] > -1e-10
            assert np.allclose(lhat @ np.ones(len(r)), 0.0, atol=1e-12)

    def test_rayleigh_quotient_bound(self):
        # for x orthogonal to the positive vector r: x^T Lhat x / x^T x > lambda2 / N
        rng = np.random.default_rng(14)
        for _ in range(10):
            n = int(rng.integers(3, 8))
            g = random_strongly_connected(rng, n)
            lap = build_laplacian(g).laplacian
            r = left_null_vector(lap)
            lhat, lambda2 = symmetrized_laplacian(lap, r)
            for _ in range(100):
                x = rng.normal(size=n)
                x = x - r * (r @ x) / (r @ r)
                if np.linalg.norm(x) < 1e-12:
                    continue
                quotient = (x @ lhat @ x) / (x @ x)
                assert quotient > lambda2 / n


class TestMmatrixScaling:
    def test_two_by_two(self):
        m = np.array([[1.0, 0.0], [-1.0, 2.0]])
        g, lambda0 = mmatrix_scaling(m)
        assert np.allclose(g, np.ones(2), atol=1e-12)
        gram = np.diag(g) @ m + m.T @ np.diag(g)
        assert np.allclose(gram, np.array([[2.0, -1.0], [-1.0, 4.0]]), atol=1e-12)
        # eigenvalues of [[2,-1],[-1,4]] by the quadratic formula: 3 +- sqrt(2)
        assert abs(lambda0 - (3.0 - np.sqrt(2.0))) < 1e-12

    def test_identity_block(self):
        g, lambda0 = mmatrix_scaling(np.eye(3))
        assert np.allclose(g, np.ones(3))
        assert abs(lambda0 - 2.0) < 1e-12

    def test_random_m_matrices(self):
        # 300 random nonsingular M-matrices built as (dominant D) - A
        rng = np.random.default_rng(16)
        for _ in range(300):
            n = int(rng.integers(1, 7))
            a = rng.random(size=(n, n)) * (rng.random(size=(n, n)) < 0.6)
            np.fill_diagonal(a, 0.0)
            d = a.sum(axis=1) + rng.random(size=n) + 0.05
            m = np.diag(d) - a
            assert is_nonsingular_m_matrix(m)
            g, lambda0 = mmatrix_scaling(m)
            assert np.all(g > 0)
            assert lambda0 > 0

    def test_rejects_non_m_matrix(self):
        with pytest.raises(GraphClassError):
            mmatrix_scaling(np.array([[1.0, 0.5], [0.0, 1.0]]))
        with pytest.raises(GraphClassError):
            mmatrix_scaling(np.array([[-1.0, 0.0], [0.0, 1.0]]))


class TestCertificates:
    def test_leaderless(self):
        cert = spectral_certificate(cycle_graph(4))
        assert isinstance(cert, LeaderlessCertificate)
        assert cert.lambda2 > 0

    def test_leader(self):
        g = DirectedGraph(3, frozenset({(0, 1), (1, 2)}), has_leader=True)
        cert = spectral_certificate(g)
        assert isinstance(cert, LeaderCertificate)
        assert cert.lambda0 > 0

    def test_leader_without_tree_rejected(self):
        g = DirectedGraph(3, frozenset({(1, 2)}), has_leader=True)
        with pytest.raises(GraphClassError):
            spectral_certificate(g)


class TestGraphFiles:
    def test_round_trip(self, tmp_path):
        g = DirectedGraph(4, frozenset({(0, 1), (1, 2), (2, 3), (3, 0)}), has_leader=True)
        path = tmp_path / "g.graph"
        write_graph_file(path, g)
        assert read_graph_file(path) == g

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.graph"
        path.write_text("nodes 4\n0 1\n")
        with pytest.raises(SchemaError):
            read_graph_file(path)
