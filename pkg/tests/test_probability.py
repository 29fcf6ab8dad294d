import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ambiguous_aep.exceptions import DomainError, InputError, SupportMismatch, WordTooShort
from ambiguous_aep.graphs import all_words
from ambiguous_aep.probability import (
    Dist,
    PairDist,
    binary_entropy,
    conditional_entropy,
    conditional_kl,
    entropy,
    enumerate_second_order_classes,
    eta,
    load_dist,
    mutual_information,
    round_to_type,
    second_order_type,
    type_class,
    type_class_size,
)
from tests.strategies import distributions


def test_entropy_values():
    assert entropy([0.5, 0.5]) == pytest.approx(1.0)
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy(np.full(8, 1 / 8)) == pytest.approx(3.0)
    h = -(0.3 * math.log2(0.3) + 0.7 * math.log2(0.7))
    assert binary_entropy(0.3) == pytest.approx(h, abs=1e-15)
    assert binary_entropy(0.3) == pytest.approx(0.8812908992306927, abs=1e-12)


def test_dist_validation(tmp_path):
    with pytest.raises(InputError):
        Dist(("a", "b"), [0.5, 0.6])
    with pytest.raises(InputError):
        Dist(("a", "b"), [1.2, -0.2])
    d = Dist.uniform("abc")
    path = tmp_path / "d.json"
    path.write_text('{"alphabet": ["a","b","c"], "probs": [0.2, 0.3, 0.5]}')
    assert load_dist(path) == Dist(("a", "b", "c"), [0.2, 0.3, 0.5])
    assert Dist.from_dict(d.to_dict()) == d


def test_pair_dist_marginals_and_conditional():
    p = PairDist(("a", "b"), [[0.4, 0.1], [0.2, 0.3]])
    assert np.allclose(p.first_marginal, [0.5, 0.5])
    assert np.allclose(p.second_marginal, [0.6, 0.4])
    assert np.allclose(p.conditional(), [[0.8, 0.2], [0.4, 0.6]])


@given(distributions(3), distributions(4))
def test_mutual_information_of_product_is_zero(p, q):
    assert mutual_information(np.outer(p, q)) == pytest.approx(0.0, abs=1e-12)


@given(distributions(9))
def test_mutual_information_identity(p):
    m = p.reshape(3, 3)
    mi = mutual_information(m)
    assert mi >= 0
    assert mi == pytest.approx(entropy(m.sum(1)) - conditional_entropy(m.T), abs=1e-9)


def test_conditional_kl():
    w = np.array([[0.5, 0.5], [1.0, 0.0]])
    q = np.array([[0.25, 0.25], [0.5, 0.0]])
    assert conditional_kl(q, w) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(SupportMismatch):
        conditional_kl([[0.5, 0.0], [0.0, 0.5]], w)


def test_eta():
    assert eta(0.0) == 0.0
    assert eta(1.0) == pytest.approx(2.0)
    t = 0.25
    assert eta(t) == pytest.approx((1 + t) * binary_entropy(1 / (1 + t)))
    with pytest.raises(DomainError):
        eta(1.5)
    with pytest.raises(DomainError):
        eta(-0.1)


@given(distributions(4), st.integers(1, 30))
def test_round_to_type(p, n):
    counts = round_to_type(p, n)
    assert counts.sum() == n
    assert np.all(np.abs(counts - n * p) < 1 + 1e-9)


def test_round_to_type_ties_go_low():
    assert round_to_type([0.5, 0.5], 3).tolist() == [2, 1]


@given(st.lists(st.integers(0, 3), min_size=1, max_size=4).filter(lambda c: 0 < sum(c) <= 8))
def test_type_class_size_and_members(counts):
    words = type_class(counts)
    assert len(words) == type_class_size(counts)
    for w in words:
        assert Counter(w.tolist()) == Counter({a: c for a, c in enumerate(counts) if c})
    assert [tuple(w) for w in words] == sorted(tuple(w) for w in words)


def test_second_order_type():
    t = second_order_type([0, 0, 1, 0, 1], 2)
    assert t.counts == ((1, 2), (1, 0))
    assert (t.first, t.last, t.length) == (0, 1, 5)
    assert t.first_order_counts().tolist() == [3, 2]
    assert np.allclose(t.matrix, [[0.25, 0.5], [0.25, 0.0]])
    with pytest.raises(WordTooShort):
        second_order_type([1], 2)


def test_second_order_flow_balance_rejected():
    from ambiguous_aep.probability import SecondOrderType

    with pytest.raises(InputError):
        SecondOrderType(((0, 2), (0, 0)), 0, 1, 3)


@pytest.mark.parametrize("d,n", [(2, 5), (3, 4)])
def test_second_order_classes_partition(d, n):
    classes = enumerate_second_order_classes(d, n)
    total = sum(len(v) for v in classes.values())
    assert total == d**n
    seen = {tuple(w) for v in classes.values() for w in v.tolist()}
    assert seen == {tuple(w) for w in all_words(d, n).tolist()}
    assert len(classes) <= n ** (d * d) * d * d
