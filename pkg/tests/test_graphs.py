import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ambiguous_aep.exceptions import EmptySubset, InputError, SizeCapExceeded
from ambiguous_aep.graphs import (
    Graph,
    StrongPower,
    VertexWord,
    all_words,
    complement,
    complete_graph,
    costrong_product,
    cycle_graph,
    disjoint_union,
    edgeless_graph,
    find_isomorphism,
    index_to_word,
    induced_subgraph,
    is_cohomomorphism,
    is_isomorphic,
    load_graph,
    maximal_cliques,
    save_graph,
    strong_power,
    strong_product,
    word_to_index,
)
from tests.strategies import graphs


def brute_strong(g, h):
    """Adjacency of the strong product straight from the definition."""
    n, m = len(g), len(h)
    adj = np.zeros((n * m, n * m), dtype=bool)
    for (a, b), (c, d) in itertools.product(itertools.product(range(n), range(m)), repeat=2):
        if (a, b) != (c, d) and (a == c or g.confusable(a, c)) and (b == d or h.confusable(b, d)):
            adj[a * m + b, c * m + d] = True
    return adj


def test_from_edges_rejects_bad_input():
    with pytest.raises(InputError):
        Graph.from_edges(["a", "b"], [("a", "a")])
    with pytest.raises(InputError):
        Graph.from_edges(["a", "b"], [("a", "b"), ("b", "a")])
    with pytest.raises(InputError):
        Graph.from_edges(["a", "b"], [("a", "z")])
    with pytest.raises(InputError):
        Graph(["a", "a"], np.zeros((2, 2)))
    with pytest.raises(InputError):
        Graph(["a", "b"], [[0, 1], [0, 0]])


def test_graph_is_immutable(c5):
    with pytest.raises(ValueError):
        c5.adjacency[0, 2] = True


def test_round_trip(tmp_path, c5):
    path = tmp_path / "g.json"
    save_graph(c5, path)
    assert load_graph(path) == c5
    assert Graph.from_dict(c5.to_dict()) == c5


def test_load_graph_errors(tmp_path):
    with pytest.raises(InputError):
        load_graph(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError):
        load_graph(bad)


def test_confusability_is_adjacent_or_equal(c5):
    conf = c5.confusability()
    assert conf[0, 0] and conf[0, 1] and not conf[0, 2]


@given(graphs(max_vertices=4), graphs(max_vertices=4))
def test_strong_product_matches_definition(g, h):
    assert np.array_equal(strong_product(g, h).adjacency, brute_strong(g, h))


@given(graphs(max_vertices=4), graphs(max_vertices=4))
def test_costrong_is_complement_of_strong_of_complements(g, h):
    left = costrong_product(g, h)
    right = complement(strong_product(complement(g), complement(h)))
    assert np.array_equal(left.adjacency, right.adjacency)


@given(graphs(), graphs())
def test_disjoint_union_blocks(g, h):
    u = disjoint_union(g, h)
    assert len(u) == len(g) + len(h)
    assert u.n_edges == g.n_edges + h.n_edges
    assert not u.adjacency[: len(g), len(g):].any()


def test_induced_subgraph(c5):
    sub = induced_subgraph(c5, [0, 1, 2])
    assert sub.n_edges == 2
    with pytest.raises(EmptySubset):
        induced_subgraph(c5, [])


@given(graphs(max_vertices=3), st.integers(1, 3))
def test_lazy_power_agrees_with_materialized(g, n):
    full = strong_power(g, n)
    lazy = StrongPower(g, n)
    words = all_words(len(g), n)
    assert np.array_equal(lazy.induced(words).adjacency, full.adjacency)
    for i, j in [(0, len(words) - 1), (len(words) // 2, 0)]:
        if i != j:
            assert lazy.confusable(words[i], words[j]) == full.confusable(i, j)


def test_strong_power_cap(c5):
    with pytest.raises(SizeCapExceeded):
        strong_power(c5, 6, cap=1000)


@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_word_index_round_trip(d, n, data):
    idx = data.draw(st.integers(0, d**n - 1))
    word = index_to_word(idx, d, n)
    assert word_to_index(word, d) == idx
    assert tuple(all_words(d, n)[idx]) == word


def test_vertex_word(c5):
    w = VertexWord.from_labels(c5, ["0", "4", "2"])
    assert w.letters == (0, 4, 2) and len(w) == 3
    with pytest.raises(InputError):
        VertexWord(c5, (5,))


@given(graphs(max_vertices=8))
def test_maximal_cliques_against_networkx(g):
    ours = {frozenset(c) for c in maximal_cliques(g)}
    theirs = {frozenset(c) for c in nx.find_cliques(nx.from_numpy_array(g.adjacency.astype(int)))}
    assert ours == theirs


def test_cohomomorphism():
    c5 = cycle_graph(5)
    assert is_cohomomorphism(c5, c5, range(5))
    # 0 and 2 are distinguishable but land on the confusable pair 0, 1
    assert not is_cohomomorphism(c5, c5, [0, 0, 1, 2, 3])
    # everything maps into a single letter of K_1 only if nothing is distinguishable
    assert is_cohomomorphism(complete_graph(3), complete_graph(1), [0, 0, 0])
    assert not is_cohomomorphism(edgeless_graph(2), complete_graph(1), [0, 0])


def test_c5_is_self_complementary(c5):
    assert is_isomorphic(c5, complement(c5))
    perm = find_isomorphism(c5, complement(c5))
    comp = complement(c5)
    for i, j in c5.edges():
        assert comp.adjacency[perm[i], perm[j]]
