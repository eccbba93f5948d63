"""Stable rooted trees with labeled legs and their q-assignments.

A tree is stored by a parent array over vertices (vertex 0 is the root) and
the vertex each leg hangs from.  Positive half-edges are the legs plus, for
each non-root vertex, the half-edge at its parent pointing away from the root.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from math import factorial
from typing import Iterator, Sequence

from .exact import Rational, pochhammer

__all__ = [
    "RootedTree",
    "HalfEdge",
    "set_partitions",
    "enumerate_trees",
    "enumerate_q",
    "tree_coefficient",
]

# ("leg", i) for leg sigma_i (1-based), ("edge", w) for the edge into non-root vertex w
HalfEdge = tuple[str, int]


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All set partitions of ``items``; blocks keep input order."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


@dataclass(frozen=True)
class RootedTree:
    n: int
    parent: tuple[int, ...]  # parent[0] == -1
    leg_vertex: tuple[int, ...]  # leg_vertex[i-1] = vertex carrying sigma_i
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def num_vertices(self) -> int:
        return len(self.parent)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.parent]
        for w, p in enumerate(self.parent):
            if w:
                out[p].append(w)
        return tuple(tuple(c) for c in out)

    @property
    def edges(self) -> tuple[int, ...]:
        """Edges, identified by their child vertex."""
        return tuple(range(1, self.num_vertices))

    @cached_property
    def h_plus(self) -> tuple[HalfEdge, ...]:
        return tuple([("leg", i) for i in range(1, self.n + 1)] + [("edge", w) for w in self.edges])

    def h_plus_at(self, vertex: int) -> tuple[HalfEdge, ...]:
        legs = [("leg", i) for i in range(1, self.n + 1) if self.leg_vertex[i - 1] == vertex]
        return tuple(legs + [("edge", w) for w in self.children[vertex]])

    def index(self, vertex: int) -> int:
        """Number of half-edges at ``vertex`` (legs, child edges, and the parent edge)."""
        return len(self.h_plus_at(vertex)) + (1 if vertex else 0)

    def subtree_vertices(self, vertex: int) -> list[int]:
        out = [vertex]
        for c in self.children[vertex]:
            out.extend(self.subtree_vertices(c))
        return out

    def DL(self, h: HalfEdge) -> frozenset[int]:
        """Legs descending from ``h`` (``h`` itself if it is a leg)."""
        kind, x = h
        if kind == "leg":
            return frozenset({x})
        verts = set(self.subtree_vertices(x))
        return frozenset(i for i in range(1, self.n + 1) if self.leg_vertex[i - 1] in verts)

    def DH(self, h: HalfEdge) -> tuple[HalfEdge, ...]:
        """Positive half-edges strictly below ``h``."""
        kind, x = h
        if kind == "leg":
            return ()
        out: list[HalfEdge] = []
        for w in self.subtree_vertices(x):
            out.extend(self.h_plus_at(w))
        return tuple(out)

    def is_stable(self) -> bool:
        return all(self.index(w) >= 3 for w in range(1, self.num_vertices)) and bool(self.h_plus_at(0))

    def describe(self) -> str:
        def render(w: int) -> str:
            parts = [f"s{i}" for i in range(1, self.n + 1) if self.leg_vertex[i - 1] == w]
            parts += [render(c) for c in self.children[w]]
            return "(" + " ".join(parts) + ")"

        return render(0)

    def __str__(self) -> str:
        return self.describe()


def _subtrees(labels: tuple[int, ...]):
    """Nested forms hanging from a positive half-edge with these descendant legs."""
    if len(labels) == 1:
        return [labels[0]]
    out = []
    for part in set_partitions(labels):
        if len(part) < 2:
            continue
        for kids in _product([_subtrees(tuple(b)) for b in part]):
            out.append(tuple(sorted(kids, key=_min_leg)))
    return out


def _product(lists):
    if not lists:
        yield ()
        return
    for x in lists[0]:
        for rest in _product(lists[1:]):
            yield (x,) + rest


def _min_leg(form) -> int:
    return form if isinstance(form, int) else min(_min_leg(c) for c in form)


def _from_nested(n: int, root_children) -> RootedTree:
    parent = [-1]
    leg_vertex = [0] * n

    def place(form, at: int) -> None:
        if isinstance(form, int):
            leg_vertex[form - 1] = at
            return
        w = len(parent)
        parent.append(at)
        for kid in form:
            place(kid, w)

    # legs first so vertex numbering follows the sorted child order
    for kid in root_children:
        place(kid, 0)
    return RootedTree(n, tuple(parent), tuple(leg_vertex))


@lru_cache(maxsize=None)
def enumerate_trees(n: int) -> tuple[RootedTree, ...]:
    """All stable rooted trees with legs ``sigma_1..sigma_n`` (one per isomorphism class)."""
    if n < 1:
        raise ValueError("need at least one leg")
    out = []
    for part in set_partitions(list(range(1, n + 1))):
        for kids in _product([_subtrees(tuple(b)) for b in part]):
            out.append(_from_nested(n, tuple(sorted(kids, key=_min_leg))))
    return tuple(out)


def enumerate_q(tree: RootedTree, chi: int) -> list[dict[HalfEdge, int]]:
    """Every ``q: H_+(T) -> Z_{>=0}`` with ``sum q + |E| = chi`` and the vertex bounds."""
    target = chi - len(tree.edges)
    if target < 0:
        return []
    groups: list[tuple[tuple[HalfEdge, ...], int | None]] = []
    for w in range(1, tree.num_vertices):
        hs = tree.h_plus_at(w)
        groups.append((hs, len(hs) - 2))
    groups.append((tree.h_plus_at(0), None))

    out: list[dict[HalfEdge, int]] = []

    def compositions(total: int, k: int) -> Iterator[tuple[int, ...]]:
        if k == 0:
            if total == 0:
                yield ()
            return
        if k == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, k - 1):
                yield (first,) + rest

    def rec(i: int, remaining: int, acc: dict[HalfEdge, int]) -> None:
        hs, bound = groups[i]
        if bound is None:
            # root vertex absorbs whatever is left
            for vals in compositions(remaining, len(hs)):
                q = dict(acc)
                q.update(zip(hs, vals))
                out.append(q)
            return
        for s in range(min(bound, remaining) + 1):
            for vals in compositions(s, len(hs)):
                nxt = dict(acc)
                nxt.update(zip(hs, vals))
                rec(i + 1, remaining - s, nxt)

    rec(0, target, {})
    return out


def tree_coefficient(tree: RootedTree, q: dict[HalfEdge, int], a: Sequence[int]) -> Rational:
    """Rational prefactor ``(-1)^|E| prod (s_h)_{q(h)+1} / prod (a_i+1)!`` of ``O_{(T,q)}``."""
    if len(a) != tree.n:
        raise ValueError("one a_i per leg is required")
    num = (-1) ** len(tree.edges)
    for h in tree.h_plus:
        s = sum(a[i - 1] + 1 for i in tree.DL(h)) - sum(q[hp] + 1 for hp in tree.DH(h))
        num *= pochhammer(s, q[h] + 1)
        if not num:
            return Rational(0)
    den = 1
    for x in a:
        den *= factorial(x + 1)
    return Rational(num, den)
