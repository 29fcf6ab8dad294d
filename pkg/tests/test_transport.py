import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from ambiguous_aep.exceptions import InputError, LengthMismatch, SizeCapExceeded
from ambiguous_aep.graphs import all_words, cycle_graph, edgeless_graph
from ambiguous_aep.markov import build_chain, iid_source
from ambiguous_aep.transport import (
    continuity_check,
    dbar_sequence,
    hamming_distance,
    ornstein_distance,
    same_marginal_check,
    total_variation,
)
from tests.strategies import distributions


def test_hamming_examples():
    assert hamming_distance("abc", "abd") == pytest.approx(1 / 3)
    assert hamming_distance([0, 1, 1, 0], [0, 1, 1, 0]) == 0.0
    assert hamming_distance("ab", "ba") == 1.0
    with pytest.raises(LengthMismatch):
        hamming_distance("ab", "abc")
    with pytest.raises(InputError):
        hamming_distance("", "")


@given(distributions(3), distributions(3))
def test_single_letter_distance_is_total_variation(p, q):
    c = ornstein_distance(p, q, 3, 1)
    assert c.cost == pytest.approx(total_variation(p, q), abs=1e-9)
    assert c.certified_gap <= 1e-9


def test_point_masses_give_hamming():
    p = np.zeros(8)
    q = np.zeros(8)
    p[0b011] = 1
    q[0b110] = 1
    assert ornstein_distance(p, q, 2, 3).cost == pytest.approx(2 / 3)


@settings(max_examples=25)
@given(st.integers(1, 6), st.randoms(use_true_random=False))
def test_uniform_laws_match_assignment(k, rnd):
    # between uniform laws on k words each, an optimal coupling is a permutation
    n, d = 3, 2
    a = rnd.sample(range(d**n), k)
    b = rnd.sample(range(d**n), k)
    p = np.zeros(d**n)
    q = np.zeros(d**n)
    p[a] = 1 / k
    q[b] = 1 / k
    words = all_words(d, n)
    C = (words[a][:, None, :] != words[b][None, :, :]).mean(axis=2)
    r, c = linear_sum_assignment(C)
    assert ornstein_distance(p, q, d, n).cost == pytest.approx(C[r, c].mean(), abs=1e-9)


@settings(max_examples=20)
@given(distributions(9), distributions(9), distributions(9))
def test_metric_axioms(p, q, r):
    dpq = ornstein_distance(p, q, 3, 2).cost
    assert dpq == pytest.approx(ornstein_distance(q, p, 3, 2).cost, abs=1e-9)
    assert dpq <= ornstein_distance(p, r, 3, 2).cost + ornstein_distance(r, q, 3, 2).cost + 1e-9
    assert dpq <= total_variation(p, q) + 1e-9
    assert ornstein_distance(p, p, 3, 2).cost == pytest.approx(0.0, abs=1e-12)


def test_coupling_marginals_and_certificate(rng):
    p = rng.dirichlet(np.ones(27))
    q = rng.dirichlet(np.ones(27))
    c = ornstein_distance(p, q, 3, 3)
    assert np.allclose(c.mass.sum(axis=1), p[c.rows], atol=1e-9)
    assert np.allclose(c.mass.sum(axis=0), q[c.cols], atol=1e-9)
    assert c.certified_gap <= 1e-9
    lines = c.to_csv().splitlines()
    assert lines[0] == "x,y,mass"
    assert len(lines) - 1 == len(list(c.triples()))


def test_size_checks():
    with pytest.raises(InputError):
        ornstein_distance(np.full(4, 0.25), np.full(8, 0.125), 2, 2)
    with pytest.raises(SizeCapExceeded):
        ornstein_distance(np.full(8, 0.125), np.full(8, 0.125), 2, 3, cap=10)


def test_dbar_sequence():
    a = iid_source([0.3, 0.7])
    b = iid_source([0.6, 0.4])
    assert dbar_sequence(a, b, 4) == pytest.approx([0.3] * 4, abs=1e-8)
    w = build_chain([[0.9, 0.1], [0.4, 0.6]])
    assert dbar_sequence(w, w, 3) == pytest.approx([0, 0, 0], abs=1e-12)
    seq = dbar_sequence(w, build_chain([[0.5, 0.5], [0.5, 0.5]]), 4)
    assert all(0 <= s <= 1 for s in seq)
    with pytest.raises(InputError):
        dbar_sequence(w, iid_source([0.2, 0.3, 0.5]), 2)


@pytest.mark.parametrize("n", [1, 2])
def test_continuity_bound_holds(n, rng):
    g = cycle_graph(5)
    for _ in range(3):
        p = rng.dirichlet(np.ones(5**n))
        q = rng.dirichlet(np.ones(5**n))
        rep = continuity_check(g, p, q, n)
        assert rep.ok, rep.to_dict()


def test_continuity_on_edgeless_graph():
    p = np.array([0.3, 0.7])
    q = np.array([0.35, 0.65])
    rep = continuity_check(edgeless_graph(2), p, q, 1)
    assert rep.distance == pytest.approx(0.05)
    assert rep.ok


def test_same_marginal_check(rng):
    g, h = cycle_graph(5), edgeless_graph(2)
    for _ in range(3):
        base = rng.dirichlet(np.ones(10)).reshape(5, 2)
        col = base.sum(axis=0)
        other = rng.dirichlet(np.ones(5), size=2).T * col
        rep = same_marginal_check(g, h, base, other)
        assert rep.ok, rep.to_dict()
        assert rep.distance == pytest.approx(total_variation(base, other))
    with pytest.raises(InputError):
        same_marginal_check(g, h, np.full(10, 0.1), rng.dirichlet(np.ones(10)))
