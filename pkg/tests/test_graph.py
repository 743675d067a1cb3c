import numpy as np
import pytest

from permest.errors import CapacityError, DomainError
from permest.exact import identity_plus_offdiag
from permest.graphs import (
    NOT_REFUTED,
    REFUTED,
    VERIFIED,
    BipartiteGraph,
    ConnectivityParams,
    broad_neighbors,
    broad_threshold,
    check_broadly_connected,
    graph_from_dict,
    graph_from_matrix,
    graph_from_threshold,
    graph_to_dict,
    pruned_cardinality_bound,
)
from permest.matrices import SeedSpec


def random_graph(rng, m, n, p) -> BipartiteGraph:
    mask = rng.random((m, n)) < p
    return graph_from_matrix(mask.astype(float))


class TestConstruction:
    def test_zeros_no_edges(self):
        g = graph_from_matrix(np.zeros((3, 4)))
        assert g.edges() == []

    def test_identity_perfect_matching(self):
        g = graph_from_matrix(np.eye(5))
        assert g.neighbors == tuple((j,) for j in range(5))

    def test_dense_complete(self):
        g = graph_from_matrix(np.full((3, 5), 0.2))
        assert all(len(nbrs) == 5 for nbrs in g.neighbors)

    def test_duplicate_edges_rejected(self):
        with pytest.raises(DomainError):
            BipartiteGraph(1, 3, ((0, 0),))

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            BipartiteGraph(1, 3, ((3,),))


class TestThresholdGraph:
    def test_equality_counts(self):
        n = 4
        g = graph_from_threshold(np.full((n, n), 1.0 / n), r=1.0)
        assert all(len(nbrs) == n for nbrs in g.neighbors)

    def test_below_threshold_empty(self):
        n = 4
        g = graph_from_threshold(np.full((n, n), 1.0 / (2 * n)), r=1.0)
        assert g.edges() == []

    def test_unit_diagonal_family_complete(self):
        # off-diagonal 0.1/10 = 0.01 >= 0.05/10 = 0.005; diagonal 1 >= 0.005
        g = graph_from_threshold(identity_plus_offdiag(10, 0.1), r=0.05)
        assert all(len(nbrs) == 10 for nbrs in g.neighbors)

    def test_r_positive(self):
        with pytest.raises(DomainError):
            graph_from_threshold(np.ones((2, 2)), r=0.0)


class TestBroadNeighbors:
    def test_complete_all(self):
        g = BipartiteGraph.complete(6, 7)
        assert broad_neighbors(g, {0, 2, 4}, delta=0.9) == set(range(7))

    def test_matching_singleton_vacuous_threshold(self):
        g = BipartiteGraph.perfect_matching(8)
        # floor(1/2 * 1) = 0: every right vertex qualifies
        assert broad_threshold(1.0, 1) == 0
        assert broad_neighbors(g, {0}, delta=1.0) == set(range(8))

    def test_matching_pair(self):
        g = BipartiteGraph.perfect_matching(8)
        assert broad_threshold(1.0, 2) == 1
        assert broad_neighbors(g, {0, 1}, delta=1.0) == {0, 1}

    def test_empty_set_rejected(self):
        with pytest.raises(DomainError):
            broad_neighbors(BipartiteGraph.complete(2, 2), set(), delta=0.5)

    def test_threshold_float_robust(self):
        # 0.6/2 * 5 = 1.4999999... in floats must still floor to 1
        assert broad_threshold(0.6, 5) == 1
        # products that are mathematically integral stay integral
        assert broad_threshold(0.2, 10) == 1
        assert broad_threshold(0.3, 20) == 3


class TestParams:
    def test_constraint(self):
        ConnectivityParams(1.0, 0.4)
        with pytest.raises(DomainError):
            ConnectivityParams(0.4, 0.2)  # delta/2 == kappa not allowed
        with pytest.raises(DomainError):
            ConnectivityParams(1.5, 0.1)
        with pytest.raises(DomainError):
            ConnectivityParams(0.5, 0.0)


class TestChecker:
    def test_complete_verified(self):
        rep = check_broadly_connected(
            BipartiteGraph.complete(8, 8), ConnectivityParams(1.0, 0.4)
        )
        assert rep.verdict == VERIFIED
        assert rep.witness is None

    def test_matching_refuted_condition1(self):
        rep = check_broadly_connected(
            BipartiteGraph.perfect_matching(8), ConnectivityParams(0.5, 0.2)
        )
        assert rep.verdict == REFUTED
        assert rep.witness["condition"] == 1
        assert rep.witness["degree"] == 1
        assert rep.witness["required"] == pytest.approx(4.0)

    def test_empty_graph_refuted_condition1(self):
        g = BipartiteGraph(4, 4, ((), (), (), ()))
        rep = check_broadly_connected(g, ConnectivityParams(0.5, 0.2))
        assert rep.verdict == REFUTED and rep.witness["condition"] == 1

    def test_capacity_error_mentions_randomized(self):
        g = BipartiteGraph.complete(23, 4)
        with pytest.raises(CapacityError, match="randomized"):
            check_broadly_connected(g, ConnectivityParams(0.9, 0.3))

    def test_randomized_requires_seed_and_trials(self):
        g = BipartiteGraph.complete(4, 4)
        p = ConnectivityParams(0.9, 0.3)
        with pytest.raises(DomainError):
            check_broadly_connected(g, p, mode="randomized", trials=10)
        with pytest.raises(DomainError):
            check_broadly_connected(g, p, mode="randomized", seed=SeedSpec(1))

    def test_randomized_not_refuted_on_complete(self):
        rep = check_broadly_connected(
            BipartiteGraph.complete(8, 8),
            ConnectivityParams(1.0, 0.4),
            mode="randomized",
            trials=200,
            seed=SeedSpec(3),
        )
        assert rep.verdict == NOT_REFUTED

    def test_condition3_witness_found(self):
        # two disjoint 4x4 blocks: degrees meet delta=0.5 exactly, but
        # J = one block has I(J) = that block, 4 < min(1.2*4, 8) = 4.8
        block = tuple(range(4))
        other = tuple(range(4, 8))
        g = BipartiteGraph(8, 8, (block,) * 4 + (other,) * 4)
        p = ConnectivityParams(0.5, 0.2)
        rep = check_broadly_connected(g, p)
        assert rep.verdict == REFUTED
        assert rep.witness["condition"] == 3
        assert rep.witness["subset"] == [0, 1, 2, 3]
        assert rep.witness["broad_neighbor_count"] == 4

    def test_witness_replay(self):
        rng = np.random.default_rng(42)
        replayed = 0
        for _ in range(60):
            m = int(rng.integers(3, 9))
            n = int(rng.integers(3, 9))
            g = random_graph(rng, m, n, float(rng.uniform(0.2, 0.9)))
            p = ConnectivityParams(0.5, 0.2)
            rep = check_broadly_connected(g, p)
            if rep.verdict != REFUTED:
                continue
            w = rep.witness
            if w["condition"] == 1:
                assert g.right_degrees()[w["vertex"]] == w["degree"]
                assert w["degree"] < w["required"]
            elif w["condition"] == 2:
                assert g.left_degrees()[w["vertex"]] == w["degree"]
                assert w["degree"] < w["required"]
            else:
                got = broad_neighbors(g, w["subset"], p.delta)
                assert len(got) == w["broad_neighbor_count"]
                assert len(got) < w["required"]
            replayed += 1
        assert replayed >= 10  # the sample must actually exercise refutations

    def test_monotone_in_edges(self):
        # adding edges never flips verified -> refuted
        rng = np.random.default_rng(43)
        checked = 0
        for _ in range(40):
            m = n = int(rng.integers(4, 8))
            g = random_graph(rng, m, n, 0.85)
            p = ConnectivityParams(0.5, 0.2)
            if check_broadly_connected(g, p).verdict != VERIFIED:
                continue
            a = g.adjacency_matrix()
            zeros = np.argwhere(a == 0)
            if len(zeros):
                j, i = zeros[rng.integers(len(zeros))]
                a[j, i] = 1.0
            g2 = graph_from_matrix(a)
            assert check_broadly_connected(g2, p).verdict == VERIFIED
            checked += 1
        assert checked >= 5

    def test_pruned_vs_full_agree(self):
        rng = np.random.default_rng(44)
        for _ in range(30):
            m = int(rng.integers(3, 13))
            n = int(rng.integers(3, 13))
            g = random_graph(rng, m, n, float(rng.uniform(0.3, 0.95)))
            p = ConnectivityParams(0.5, 0.2)
            pruned = check_broadly_connected(g, p, prune=True)
            full = check_broadly_connected(g, p, prune=False)
            assert pruned.verdict == full.verdict
            assert full.subsets_examined >= pruned.subsets_examined

    def test_randomized_never_contradicts_exhaustive(self):
        rng = np.random.default_rng(45)
        for _ in range(25):
            m = n = int(rng.integers(4, 9))
            g = random_graph(rng, m, n, float(rng.uniform(0.4, 0.95)))
            p = ConnectivityParams(0.5, 0.2)
            exh = check_broadly_connected(g, p)
            rand = check_broadly_connected(
                g, p, mode="randomized", trials=300, seed=SeedSpec(int(rng.integers(1 << 30)))
            )
            assert rand.verdict in (REFUTED, NOT_REFUTED)
            if exh.verdict == VERIFIED:
                assert rand.verdict == NOT_REFUTED

    def test_pruning_bound_value(self):
        g = BipartiteGraph.complete(8, 8)
        assert pruned_cardinality_bound(g, ConnectivityParams(1.0, 0.4)) == 4
        assert pruned_cardinality_bound(g, ConnectivityParams(0.5, 0.2)) == 6


class TestGraphIO:
    def test_roundtrip(self):
        g = BipartiteGraph(3, 4, ((1, 3), (), (0, 2)))
        assert graph_from_dict(graph_to_dict(g)) == g

    def test_file_roundtrip(self, tmp_path):
        from permest.graphs import load_graph, save_graph

        g = BipartiteGraph.complete(3, 2)
        p = tmp_path / "g.json"
        save_graph(p, g)
        assert load_graph(p) == g

    def test_bad_edge_rejected(self):
        with pytest.raises(DomainError):
            graph_from_dict({"m": 2, "n": 2, "edges": [[2, 0]]})
        with pytest.raises(DomainError):
            graph_from_dict({"m": 2, "n": 2, "edges": [[0, 5]]})

    def test_malformed_object_rejected(self):
        with pytest.raises(DomainError):
            graph_from_dict({"m": 2, "edges": []})
