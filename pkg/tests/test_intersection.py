import random
import threading

import pytest

from dzkdv.exact import Rational
from dzkdv.intersection import IntersectionTable, TauSpec, UnstableError, intersection_number


@pytest.mark.parametrize(
    "g,ks,value",
    [
        (0, [0, 0, 0], 1),
        (1, [1], Rational(1, 24)),
        (2, [4], Rational(1, 1152)),
        (3, [7], Rational(1, 82944)),
        (4, [10], Rational(1, 7962624)),
        (1, [1, 1], Rational(1, 24)),
        (2, [2, 3], Rational(29, 5760)),
        (0, [0, 0, 0, 1], 1),
        (0, [0, 0, 1, 1], 0),
        (2, [3], 0),
    ],
)
def test_known_values(g, ks, value):
    assert intersection_number(g, ks) == value


def test_unstable():
    with pytest.raises(UnstableError):
        intersection_number(0, [0, 0])
    with pytest.raises(UnstableError):
        intersection_number(1, [])


def test_spec_predicates():
    s = TauSpec.make(2, [3, 1])
    assert s.ks == (1, 3) and s.is_stable() and not s.dimension_ok()


def test_save_and_load(tmp_path):
    t = IntersectionTable()
    val = t(3, [2, 2, 3, 3])
    path = tmp_path / "cache" / "intersections.txt"
    t.save(path)
    fresh = IntersectionTable()
    assert fresh.load(path) == len(t)
    assert fresh._memo[TauSpec.make(3, [2, 2, 3, 3])] == val
    assert IntersectionTable().load(tmp_path / "absent.txt") == 0


def test_thread_safety():
    t = IntersectionTable()
    results = []

    def work():
        results.append(t(4, [2, 3, 4, 3]))

    threads = [threading.Thread(target=work) for _ in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert len(set(results)) == 1 and results[0] == intersection_number(4, [2, 3, 4, 3])


def random_specs(count, seed=0):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        g = rng.randint(0, 4)
        n = rng.randint(1, 6)
        if 2 * g - 2 + n <= 0:
            continue
        dim = 3 * g - 3 + n
        ks = [0] * n
        for _ in range(dim):
            ks[rng.randrange(n)] += 1
        out.append((g, ks))
    return out


def string_holds(g, ks):
    lhs = intersection_number(g, [0] + ks)
    rhs = sum(
        (intersection_number(g, ks[:j] + [ks[j] - 1] + ks[j + 1:]) for j in range(len(ks)) if ks[j]),
        Rational(0),
    )
    return lhs == rhs


def dilaton_holds(g, ks):
    return intersection_number(g, [1] + ks) == (2 * g - 2 + len(ks)) * intersection_number(g, ks)


@pytest.mark.parametrize("g,ks", random_specs(30, seed=11))
def test_string_and_dilaton(g, ks):
    assert string_holds(g, ks)
    assert dilaton_holds(g, ks)
