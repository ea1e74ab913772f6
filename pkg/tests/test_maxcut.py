"""Graph ingestion, cut arithmetic, brute-force oracle, hyperplane rounding."""

import math

import numpy as np
import pytest

from spherelangevin import (
    CutAssignment,
    GraphFormatError,
    GraphInstance,
    ManifoldShape,
    PointOnM,
    bm_cut_report,
    brute_force_maxcut,
    cut_value,
    gw_round,
    load_graph,
    parse_graph,
    random_point,
    serialize_graph,
)


class TestGraphInstance:
    def test_adjacency_and_cost_are_negatives(self, c5):
        A = c5.adjacency_matrix().toarray()
        C = c5.cost_matrix().toarray()
        np.testing.assert_array_equal(C, -A)
        assert A[0, 1] == 1.0 and A[1, 0] == 1.0

    def test_total_weight(self, c5):
        assert c5.total_weight() == 5.0

    @pytest.mark.parametrize(
        "n,edges",
        [
            (3, [(1, 1, 1.0)]),           # self loop
            (3, [(2, 1, 1.0)]),           # wrong orientation
            (3, [(1, 4, 1.0)]),           # endpoint out of range
            (3, [(1, 2, 1.0), (1, 2, 2.0)]),  # duplicate
            (3, [(1, 2, float("inf"))]),  # non-finite weight
        ],
    )
    def test_edge_validation(self, n, edges):
        with pytest.raises((ValueError, GraphFormatError)):
            GraphInstance(n, edges)


class TestCutValue:
    def test_triangle_by_hand(self, k3):
        # putting vertex 3 alone across the cut severs two of three edges
        assert cut_value(k3, CutAssignment([1, 1, -1])) == 2.0
        assert cut_value(k3, CutAssignment([1, 1, 1])) == 0.0

    def test_negative_weights_count(self):
        g = GraphInstance(3, [(1, 2, 3.0), (2, 3, -1.0)])
        assert cut_value(g, CutAssignment([1, -1, -1])) == 3.0
        assert cut_value(g, CutAssignment([1, -1, 1])) == 2.0

    def test_global_flip_invariance(self, c5, rng):
        for _ in range(10):
            signs = rng.choice([-1, 1], size=5)
            cut = CutAssignment(signs)
            assert cut_value(c5, cut) == cut_value(c5, -cut)

    def test_assignment_validation(self):
        with pytest.raises(ValueError, match="-1 or \\+1"):
            CutAssignment([1, 0, -1])


class TestParsing:
    def test_round_trip(self, c5):
        text = serialize_graph(c5)
        g2 = parse_graph(text)
        assert g2.n == c5.n
        assert serialize_graph(g2) == text

    def test_float_weights_survive(self):
        g = GraphInstance(3, [(1, 2, 0.125), (2, 3, -2.5)])
        g2 = parse_graph(serialize_graph(g))
        assert g2.edges == g.edges

    def test_load_from_file(self, c5_file, c5):
        g = load_graph(c5_file)
        assert g.n == 5 and len(g.edges) == 5
        assert serialize_graph(g) == serialize_graph(c5)

    def test_blank_lines_ignored(self):
        g = parse_graph("3 1\n\n   \n1 2 1.0\n")
        assert g.n == 3 and len(g.edges) == 1

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("x y\n", "line 1"),
            ("3 1\n1 2\n", "line 2"),
            ("3 1\n0 2 1.0\n", "out of range"),
            ("3 2\n1 2 1.0\n", "declared 2 edges, found 1"),
            ("3 1\n1 2 huh\n", "line 2"),
        ],
    )
    def test_errors_name_the_line(self, text, fragment):
        with pytest.raises(GraphFormatError, match=fragment):
            parse_graph(text)


class TestBruteForce:
    def test_c5_optimum(self, c5):
        cut, val = brute_force_maxcut(c5)
        assert val == 4.0
        assert cut_value(c5, cut) == 4.0

    def test_k3_optimum(self, k3):
        _, val = brute_force_maxcut(k3)
        assert val == 2.0

    def test_weighted_path(self):
        g = GraphInstance(3, [(1, 2, 3.0), (2, 3, -1.0)])
        cut, val = brute_force_maxcut(g)
        assert val == 3.0
        assert cut_value(g, cut) == 3.0

    def test_size_limit(self):
        g = GraphInstance(25, [(1, 2, 1.0)])
        with pytest.raises(ValueError, match="n <= 24"):
            brute_force_maxcut(g)

    def test_exhaustive_agreement_with_random_search(self, rng):
        # cross-check the bit-twiddled enumeration against a dumb maximum
        n = 8
        edges = []
        for i in range(1, n + 1):
            for j in range(i + 1, n + 1):
                if rng.random() < 0.5:
                    edges.append((i, j, float(rng.integers(-3, 4))))
        g = GraphInstance(n, edges or [(1, 2, 1.0)])
        _, val = brute_force_maxcut(g)
        best = -math.inf
        for code in range(2 ** (n - 1)):
            signs = [1] + [1 - 2 * ((code >> b) & 1) for b in range(n - 1)]
            best = max(best, cut_value(g, CutAssignment(signs)))
        assert val == best


class TestRounding:
    def test_planted_bipartition_is_recovered(self):
        # alternate poles of the sphere along an even cycle: every hyperplane
        # separates the two antipodal clusters, so any draw yields the full cut
        g = GraphInstance(4, [(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (1, 4, 1.0)])
        e = np.zeros(4)
        e[0] = 1.0
        x = PointOnM(np.array([e, -e, e, -e]))
        cut, val = gw_round(x, g, 1, rng=np.random.default_rng(123))
        assert val == 4.0
        assert cut_value(g, cut) == 4.0

    def test_rounding_never_beats_brute_force(self, c5, rng):
        for s in range(5):
            x = random_point(ManifoldShape(5, 3), np.random.default_rng(s))
            _, val = gw_round(x, c5, 16, rng=rng)
            assert val <= 4.0

    def test_more_samples_never_hurt(self, c5):
        x = random_point(ManifoldShape(5, 3), np.random.default_rng(77))
        _, v1 = gw_round(x, c5, 1, rng=np.random.default_rng(9))
        _, v64 = gw_round(x, c5, 64, rng=np.random.default_rng(9))
        assert v64 >= v1

    def test_sample_count_validation(self, c5, rng):
        x = random_point(ManifoldShape(5, 3), rng)
        with pytest.raises(ValueError, match="samples"):
            gw_round(x, c5, 0, rng=rng)

    def test_report_fields_and_oracle_switch(self, c5, rng):
        x = random_point(ManifoldShape(5, 3), rng)
        rep = bm_cut_report(c5, x, 16, rng=np.random.default_rng(2))
        assert rep.gw_samples == 16
        assert rep.brute_force_value == 4.0
        assert rep.ratio_to_optimum == rep.cut_weight / 4.0
        assert rep.quadratic_value == pytest.approx(
            -float(np.sum(x.factors * c5.adjacency_matrix().matmat(x.factors))),
            rel=1e-12,
        )
        d = rep.as_dict()
        assert set(d) == {
            "quadratic_value",
            "cut_signs",
            "cut_weight",
            "gw_samples",
            "brute_force_value",
            "ratio_to_optimum",
        }

    def test_oracle_skipped_for_large_graphs(self, rng):
        g = GraphInstance(17, [(1, 2, 1.0)])
        x = random_point(ManifoldShape(17, 3), rng)
        rep = bm_cut_report(g, x, 4, rng=np.random.default_rng(1))
        assert rep.brute_force_value is None and rep.ratio_to_optimum is None
        rep2 = bm_cut_report(g, x, 4, rng=np.random.default_rng(1), oracle=True)
        assert rep2.brute_force_value == 1.0
