from itertools import product

import pytest

from dzkdv.exact import Rational
from dzkdv.trees import enumerate_q, enumerate_trees, set_partitions, tree_coefficient


def test_set_partitions_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(range(n))) for n in range(6)] == [1, 1, 2, 5, 15, 52]


def brute_force_count(n):
    """Count trees by parent maps over up to n-1 extra vertices, up to relabeling of vertices."""
    seen = set()
    for k in range(0, n):
        verts = range(k + 1)
        for parents in product(verts, repeat=k):
            parent = (-1,) + parents
            # parents must precede children so the graph is a tree rooted at 0
            if any(parent[w] >= w for w in range(1, k + 1)):
                continue
            for legs in product(verts, repeat=n):
                def form(w):
                    kids = [f"s{i + 1}" for i in range(n) if legs[i] == w]
                    kids += [form(c) for c in range(1, k + 1) if parent[c] == w]
                    return "(" + " ".join(sorted(kids)) + ")"

                ok = True
                for w in range(1, k + 1):
                    deg = sum(1 for x in legs if x == w) + sum(1 for c in range(1, k + 1) if parent[c] == w) + 1
                    ok &= deg >= 3
                if ok:
                    seen.add(form(0))
    return len(seen)


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 8)])
def test_tree_counts(n, count):
    trees = enumerate_trees(n)
    assert len(trees) == count
    assert len({t.describe() for t in trees}) == count
    assert all(t.is_stable() for t in trees)
    assert brute_force_count(n) == count


def test_n4_matches_brute_force():
    assert len(enumerate_trees(4)) == brute_force_count(4)


def test_single_leg():
    (t,) = enumerate_trees(1)
    assert enumerate_q(t, 5) == [{("leg", 1): 5}]
    assert tree_coefficient(t, {("leg", 1): 5}, [5]) == 1


def test_two_leg_root_tree():
    root, edge = sorted(enumerate_trees(2), key=lambda t: len(t.edges))
    qs = enumerate_q(root, 4)
    assert len(qs) == 5
    survivors = [q for q in qs if tree_coefficient(root, q, [2, 2])]
    assert survivors == [{("leg", 1): 2, ("leg", 2): 2}]
    assert tree_coefficient(root, survivors[0], [2, 2]) == 1


def test_two_leg_edge_tree():
    root, edge = sorted(enumerate_trees(2), key=lambda t: len(t.edges))
    (q,) = enumerate_q(edge, 4)
    assert q == {("leg", 1): 0, ("leg", 2): 0, ("edge", 1): 3}
    # -(a1+a2)!/(a1! a2!) with a = (2, 2)
    assert tree_coefficient(edge, q, [2, 2]) == -6


@pytest.mark.parametrize("a1,a2", [(2, 3), (3, 3), (4, 2)])
def test_two_leg_coefficients_general(a1, a2):
    root, edge = sorted(enumerate_trees(2), key=lambda t: len(t.edges))
    (q,) = enumerate_q(edge, a1 + a2)
    expected = Rational(-1) * Rational(_fact(a1 + a2), _fact(a1) * _fact(a2))
    assert tree_coefficient(edge, q, [a1, a2]) == expected


def _fact(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def test_q_constraints():
    for t in enumerate_trees(3):
        for q in enumerate_q(t, 7):
            assert sum(q.values()) + len(t.edges) == 7
            for w in range(1, t.num_vertices):
                hs = t.h_plus_at(w)
                assert sum(q[h] for h in hs) <= len(hs) - 2


def test_descendant_sets():
    t = next(t for t in enumerate_trees(3) if t.describe() == "(s3 (s1 s2))")
    assert t.DL(("edge", 1)) == {1, 2}
    assert set(t.DH(("edge", 1))) == {("leg", 1), ("leg", 2)}
    assert t.DH(("leg", 3)) == ()


def test_coefficient_needs_one_a_per_leg():
    (t,) = enumerate_trees(1)
    with pytest.raises(ValueError):
        tree_coefficient(t, {("leg", 1): 1}, [1, 2])
