"""Small worked examples checked against hand arithmetic."""

import math

import numpy as np
import pytest

from ambiguous_aep.graphs import (
    complement,
    complete_graph,
    costrong_product,
    cycle_graph,
    disjoint_union,
    edgeless_graph,
    induced_subgraph,
    is_isomorphic,
    maximal_cliques,
    strong_product,
)
from ambiguous_aep.markov import build_chain, entropy_rate, string_probability
from ambiguous_aep.probability import (
    conditional_kl,
    enumerate_second_order_classes,
    eta,
    mutual_information,
    second_order_type,
    type_class_size,
)
from ambiguous_aep.refinement import induced_subgraph_lower_bound, same_marginal_continuity_bound

H34 = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))


def test_graph_constructions(c5):
    assert complement(complete_graph(4)).n_edges == 0
    assert complement(complement(c5)) == c5
    assert is_isomorphic(strong_product(complete_graph(1), c5), c5)
    assert strong_product(complete_graph(2), complete_graph(2)).n_edges == 6
    assert costrong_product(complete_graph(2), complete_graph(2)).n_edges == 6
    assert costrong_product(edgeless_graph(2), edgeless_graph(3)).n_edges == 0
    c55 = strong_product(c5, c5)
    assert len(c55) == 25 and set(c55.adjacency.sum(axis=1).tolist()) == {8}
    u = disjoint_union(c5, complete_graph(3))
    assert (len(u), u.n_edges) == (8, 8)
    assert induced_subgraph(c5, [0, 1]).n_edges == 1
    assert induced_subgraph(c5, [0, 2]).n_edges == 0
    assert sorted(map(sorted, maximal_cliques(c5))) == [[0, 1], [0, 4], [1, 2], [2, 3], [3, 4]]


def test_probability_examples():
    assert mutual_information([[0.5, 0.0], [0.0, 0.5]]) == pytest.approx(1.0)
    assert conditional_kl([[0.5, 0.0], [0.0, 0.5]], [[0.5, 0.5], [0.5, 0.5]]) == pytest.approx(1.0)
    t = second_order_type([0, 1, 0, 1], 2)
    assert np.allclose(t.matrix, [[0, 2 / 3], [1 / 3, 0]])
    assert len(enumerate_second_order_classes(2, 3)) <= 81
    assert len(enumerate_second_order_classes(1, 4)) == 1
    assert type_class_size([1, 2]) == 3


def test_eta_and_bounds(c5):
    assert eta(1 / 3) == pytest.approx(4 / 3 * H34, abs=1e-12)
    assert eta(1 / 3) == pytest.approx(1.08170, abs=1e-5)
    assert same_marginal_continuity_bound(edgeless_graph(4), 1.0) == pytest.approx(6.0)
    assert same_marginal_continuity_bound(c5, 1 / 3) == pytest.approx(2.6040, abs=1e-4)
    low = induced_subgraph_lower_bound(math.log2(2.5), c5, np.full(5, 0.2), [0, 1, 2, 3])
    assert low == pytest.approx(-0.1424, abs=1e-4)


def test_markov_examples():
    src = build_chain([[0.9, 0.1], [0.2, 0.8]], "ab")
    assert np.allclose(src.pi, [2 / 3, 1 / 3], atol=1e-12)
    assert string_probability(src, "aab") == pytest.approx(0.06, abs=1e-15)
    cyc = build_chain([[0, 1], [1, 0]], "ab")
    assert cyc.period == 2
    assert string_probability(cyc, "abab") == pytest.approx(0.5)
    assert entropy_rate(cyc) == 0.0
