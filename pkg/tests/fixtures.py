"""Hand-built trees shared by the reduce and acceptance tests."""

from enrich.regtree import Node, RegressionTree


def _leaf(mean, count):
    return Node(mean=mean, count=count)


def _split(var, thr, left, right):
    count = left.count + right.count
    mean = (left.mean * left.count + right.mean * right.count) / count
    return Node(mean=mean, count=count, var=var, threshold=thr, left=left, right=right)


def straddle_tree() -> RegressionTree:
    """Three-level tree over tr_1..tr_3 whose leaves straddle 2.1.

    BFS ids: 1 splits tr_1 <= 126; 2 splits tr_2 <= 79; 3 splits tr_3 <= 6;
    4 splits tr_2 <= 30 (leaves 8, 9); 5 is a leaf at 1.9; 6 splits
    tr_2 <= 150 (leaves 10 at 2.2 and 11 at 2.9); 7 is a leaf at 0.9.
    """
    n4 = _split(1, 30, _leaf(3.5, 3), _leaf(2.6, 2))
    n2 = _split(1, 79, n4, _leaf(1.9, 20))
    n6 = _split(1, 150, _leaf(2.2, 4), _leaf(2.9, 2))
    n3 = _split(2, 6, n6, _leaf(0.9, 20))
    return RegressionTree(_split(0, 126, n2, n3), 3)


def all_above_tree() -> RegressionTree:
    left = _split(1, 50, _leaf(3.0, 2), _leaf(4.0, 2))
    right = _split(1, 60, _leaf(5.0, 2), _leaf(2.5, 2))
    return RegressionTree(_split(0, 100, left, right), 2)
