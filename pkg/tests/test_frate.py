import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ambiguous_aep.exceptions import InputError, SizeCapExceeded
from ambiguous_aep.frate import (
    SCAN_HEADER,
    SubsetKind,
    aep_scan,
    analytic_lower_bound,
    block_inequality_check,
    frate_lower_sequence,
    frate_upper_sequence,
    markov_aep_bracket,
    min_subset,
)
from ambiguous_aep.graphs import Graph, complete_graph, cycle_graph, edgeless_graph, induced_subgraph, strong_power
from ambiguous_aep.markov import build_chain, entropy_rate, iid_source, marginal
from ambiguous_aep.probability import entropy
from ambiguous_aep.refinement import graph_entropy_refinement
from ambiguous_aep.spectral import evaluate

W3 = [[0.9, 0.1, 0.0], [0.2, 0.8, 0.0], [0.5, 0.5, 0.0]]
PATH3 = Graph.from_edges("abc", [("a", "b"), ("b", "c")])


def brute_min(g, mu, c, point):
    n = round(math.log(len(mu)) / math.log(len(g)))
    power = strong_power(g, n)
    support = [i for i in range(len(mu)) if mu[i] > 0]
    best = math.inf
    for r in range(1, len(support) + 1):
        for s in itertools.combinations(support, r):
            if mu[list(s)].sum() >= c - 1e-12:
                best = min(best, math.log2(evaluate(point, induced_subgraph(power, s))))
    return best


@pytest.mark.parametrize("point", ["alpha", "fcc", "theta"])
@pytest.mark.parametrize("c", [0.3, 0.5, 0.8])
def test_exact_matches_brute_force(point, c, rng):
    for g, n in [(cycle_graph(5), 1), (PATH3, 2)]:
        mu = rng.dirichlet(np.ones(len(g) ** n))
        cert = min_subset(g, mu, c, point, mode="exact")
        assert cert.kind is SubsetKind.EXACT
        assert cert.mass >= c - 1e-12
        assert cert.f_value == pytest.approx(brute_min(g, mu, c, point), abs=1e-6)


def test_examples_from_definition():
    assert min_subset(complete_graph(3), np.full(9, 1 / 9), 0.5).f_value == 0.0
    cert = min_subset(edgeless_graph(2), np.full(4, 0.25), 0.5)
    assert len(cert.subset) == 2 and cert.f_value == pytest.approx(1.0)


@settings(max_examples=20)
@given(st.integers(1, 10), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
def test_edgeless_is_sorted_cardinality(n, p, c):
    mu = marginal(iid_source([p, 1 - p]), n)
    cert = min_subset(edgeless_graph(2), mu, c)
    k = int(np.searchsorted(np.cumsum(np.sort(mu)[::-1]), c - 1e-12)) + 1
    assert cert.f_value == pytest.approx(math.log2(k))


def test_exact_is_monotone_in_c(rng):
    mu = rng.dirichlet(np.ones(9))
    values = [min_subset(PATH3, mu, c, "fcc", mode="exact").f_value for c in (0.2, 0.4, 0.6, 0.8, 0.95)]
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_heuristic_is_sandwiched(rng):
    src = build_chain([[0.6, 0.3, 0.1], [0.2, 0.5, 0.3], [0.3, 0.3, 0.4]])
    mu = marginal(src, 2)
    for c in (0.3, 0.5, 0.8):
        heur = min_subset(PATH3, mu, c, "fcc", mode="heuristic")
        exact = min_subset(PATH3, mu, c, "fcc", mode="exact")
        low = analytic_lower_bound(PATH3, src, 2, c)
        assert heur.kind is SubsetKind.HEURISTIC and heur.mass >= c - 1e-12
        assert low.f_value <= exact.f_value + 1e-9 <= heur.f_value + 2e-9


def test_min_subset_errors(c5):
    with pytest.raises(InputError):
        min_subset(c5, np.full(5, 0.2), 1.0)
    with pytest.raises(InputError):
        min_subset(c5, np.full(7, 1 / 7), 0.5)
    with pytest.raises(SizeCapExceeded):
        min_subset(c5, np.full(25, 1 / 25), 0.5, mode="exact")


def test_bracket_width_is_mutual_information_over_k():
    g = Graph.from_edges("abc", [("a", "b")])
    src = build_chain(W3, "abc")
    info = src.mutual_information()
    for k in range(1, 5):
        b = markov_aep_bracket(g, src, k)
        assert b.gap == pytest.approx(info / k, abs=1e-12)
        assert b.lower <= b.upper


def test_iid_bracket_collapses(c5, rng):
    p = rng.dirichlet(np.ones(5))
    src = iid_source(p)
    f1 = graph_entropy_refinement(c5, p, tol=1e-8).value
    ups = frate_upper_sequence(c5, src, 3, tol=1e-8)
    lows = frate_lower_sequence(c5, src, 3, tol=1e-8)
    for k, (u, lo) in enumerate(zip(ups, lows), start=1):
        assert u == pytest.approx(f1, abs=1e-6)
        assert lo == pytest.approx(f1, abs=1e-6)
        b = markov_aep_bracket(c5, src, k, tol=1e-8)
        assert b.gap == pytest.approx(0.0, abs=1e-12)


def test_trivial_graphs():
    src = build_chain([[0.6, 0.4], [0.3, 0.7]])
    rate = entropy_rate(src)
    assert frate_upper_sequence(complete_graph(2), src, 3) == pytest.approx([0, 0, 0], abs=1e-9)
    ups = frate_upper_sequence(edgeless_graph(2), src, 4, tol=1e-9)
    for k, u in enumerate(ups, start=1):
        assert u == pytest.approx(entropy(marginal(src, k)) / k, abs=1e-6)
    assert frate_lower_sequence(edgeless_graph(2), src, 4, tol=1e-9) == pytest.approx([rate] * 4, abs=1e-6)
    lows = frate_lower_sequence(complete_graph(2), src, 4)
    assert all(a <= b + 1e-9 for a, b in zip(lows, lows[1:]))
    assert lows[-1] <= 0


def test_sequences_subadditive_and_sandwiched(c5):
    src = build_chain(np.full((5, 5), 0.1) + 0.5 * np.eye(5))
    a = [u * k for k, u in enumerate(frate_upper_sequence(c5, src, 3, tol=1e-8), start=1)]
    assert a[1] <= 2 * a[0] + 4e-8
    assert a[2] <= a[0] + a[1] + 4e-8
    brackets = [markov_aep_bracket(c5, src, k, tol=1e-8) for k in (1, 2, 3)]
    for b in brackets:
        for b2 in brackets:
            assert b.lower <= b2.upper + 3e-8


def test_scan_rows_and_formats():
    g = Graph.from_edges("abc", [("a", "b")])
    src = build_chain(W3, "abc")
    rep = aep_scan(g, src, "fcc", n_max=3, c_list=(0.8, 0.3, 0.5))
    assert [(r.n, r.c) for r in rep.rows] == [(n, c) for n in (1, 2, 3) for c in (0.3, 0.5, 0.8)]
    text = rep.to_csv()
    assert text.splitlines()[0] == ",".join(SCAN_HEADER)
    assert text == aep_scan(g, src, "fcc", n_max=3, c_list=(0.3, 0.5, 0.8)).to_csv()
    assert '"kind"' in rep.to_json()
    for r in rep.rows:
        assert r.heuristic_value >= r.lower_bound - 1e-12


def test_scan_on_complete_graph_is_zero():
    src = build_chain([[0.6, 0.4], [0.3, 0.7]])
    rep = aep_scan(complete_graph(2), src, "theta", n_max=3)
    assert all(r.heuristic_value == 0 and r.lower_bound == 0 and r.bracket_upper == 0 for r in rep.rows)


def test_block_inequality():
    src = iid_source([0.3, 0.7])
    for m in (1, 2, 3, 4):
        r = block_inequality_check(edgeless_graph(2), src, "fcc", 4, m)
        assert r.ok
    assert block_inequality_check(cycle_graph(5), iid_source(np.full(5, 0.2)), "alpha", 1, 1).margin == 0
    r = block_inequality_check(complete_graph(3), iid_source([0.2, 0.3, 0.5]), "fcc", 3, 1)
    assert r.a_n == r.a_m == r.log_f == 0
