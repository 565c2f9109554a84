import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enrich.errors import InputError
from enrich.reduce import (BoundPair, RangeSet, bounds_to_predicates,
                           filter_predicates, merge_ranges, reduce_tree,
                           select_boundary_paths, simplify, to_ranges)
from enrich.regtree import (GT, LE, Node, Predicate, RegressionTree, build_tree,
                            enumerate_paths)

from fixtures import all_above_tree, straddle_tree


def _strs(preds):
    return [str(p) for p in preds]


def test_inner_means_are_weighted():
    t = straddle_tree()
    assert t.node(4).mean == pytest.approx(3.14)
    assert t.node(2).mean == pytest.approx(2.148)
    assert t.node(6).mean == pytest.approx(2.2 * 4 / 6 + 2.9 * 2 / 6)
    assert [n.id for n in t.leaves()] == [5, 7, 8, 9, 10, 11]


def test_selects_straddling_paths():
    paths = select_boundary_paths(straddle_tree(), 2.1)
    assert [p.node_ids for p in paths] == [(1, 3, 6, 10), (1, 2, 5)]


def test_filter_drops_one_sided_split():
    t = straddle_tree()
    p1, p2 = select_boundary_paths(t, 2.1)
    assert _strs(filter_predicates(t, p1, 2.1)) == ["tr_1 > 126", "tr_3 <= 6"]
    assert _strs(filter_predicates(t, p2, 2.1)) == ["tr_1 <= 126", "tr_2 > 79"]


def test_reduce_bounds_on_straddle_tree():
    t = straddle_tree()
    preds = []
    for p in select_boundary_paths(t, 2.1):
        preds += filter_predicates(t, p, 2.1)
    bounds, warnings = simplify(preds)
    assert bounds == {0: BoundPair(126, 126), 1: BoundPair(79, None),
                      2: BoundPair(None, 6)}
    assert warnings == []
    rs = reduce_tree(t, 2.1, 0.05, (400, 400, 400))
    assert rs.anchors == [126, 79, 6]
    assert rs.bounds()[0] == pytest.approx((106, 146))


def test_single_leaf_and_all_above():
    leaf = RegressionTree(Node(mean=3.0, count=5), 2)
    assert [p.node_ids for p in select_boundary_paths(leaf, 2.1)] == [(1,)]
    assert reduce_tree(leaf, 2.1, 0.05, (10, 10)).is_empty()
    paths = select_boundary_paths(all_above_tree(), 2.1)
    assert sorted(p.mean for p in paths) == [2.5, 3.0]


def test_filter_empty_when_no_straddle():
    t = all_above_tree()
    for p in enumerate_paths(t):
        assert filter_predicates(t, p, 2.1) == []


def test_simplify_examples():
    b, _ = simplify([Predicate(0, LE, 200), Predicate(0, LE, 126)])
    assert b == {0: BoundPair(None, 126)}
    b, _ = simplify([Predicate(1, GT, 79)])
    assert b == {1: BoundPair(79, None)}
    b, w = simplify([Predicate(0, GT, 130), Predicate(0, LE, 120)])
    assert b == {} and len(w) == 1


def test_to_ranges_clamps():
    bw = (400.0, 400.0, 100.0)
    rs = to_ranges({0: BoundPair(126, None), 1: BoundPair(None, 5),
                    2: BoundPair(100, None)}, 0.05, bw)
    lo_hi = rs.bounds()
    assert lo_hi[0] == pytest.approx((106, 146))
    assert rs.bounds(0.05)[1] == pytest.approx((0, 25))
    assert lo_hi[2][1] == 100
    with pytest.raises(InputError):
        to_ranges({}, 1.0, bw)


def test_midpoint_anchor():
    assert BoundPair(10, 30).anchor() == 20


def test_merge():
    bw = (400.0, 400.0, 400.0)
    prev = RangeSet([10.0, 20.0, None], bw)
    new = RangeSet([15.0, None, 30.0], bw)
    assert merge_ranges(prev, new).anchors == [15.0, 20.0, 30.0]
    assert merge_ranges(RangeSet.empty(bw), RangeSet.empty(bw)).is_empty()
    with pytest.raises(InputError):
        merge_ranges(prev, RangeSet.empty((1.0, 2.0)))


def test_rangeset_round_trip():
    rs = RangeSet([None, 12.5, 300.0], (400.0, 350.0, 300.0), 0.25)
    assert RangeSet.from_dict(rs.to_dict()) == rs


predicates = st.lists(st.builds(Predicate, st.integers(0, 3), st.sampled_from([LE, GT]),
                                st.integers(0, 400).map(float)), max_size=12)


@settings(max_examples=300, deadline=None)
@given(predicates)
def test_simplify_idempotent(preds):
    b, _ = simplify(preds)
    again, warnings = simplify(bounds_to_predicates(b))
    assert again == b and warnings == []


@settings(max_examples=300, deadline=None)
@given(st.lists(st.one_of(st.none(), st.floats(0, 400)), min_size=3, max_size=3),
       st.floats(0.01, 0.99))
def test_materialized_ranges_inside_default(anchors, eps):
    bw = (400.0, 250.0, 100.0)
    anchors = [None if a is None else min(a, b) for a, b in zip(anchors, bw)]
    for b, hi in zip(RangeSet(anchors, bw).bounds(eps), bw):
        if b is not None:
            assert 0 <= b[0] <= b[1] <= hi


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.one_of(st.none(), st.floats(0, 100)), min_size=3, max_size=3),
                min_size=1, max_size=6))
def test_merge_never_drops_anchor(seq):
    bw = (100.0,) * 3
    acc = RangeSet.empty(bw)
    for anchors in seq:
        nxt = merge_ranges(acc, RangeSet(list(anchors), bw))
        assert set(acc.constrained) <= set(nxt.constrained)
        acc = nxt


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_filter_is_ordered_subset(seed):
    rng = np.random.default_rng(seed)
    t = build_tree(rng.random((30, 3)) * 100, rng.random(30) * 8, node_size=2)
    for p in enumerate_paths(t):
        kept = filter_predicates(t, p, 3.6)
        it = iter(p.predicates)
        assert all(any(k == q for q in it) for k in kept)
