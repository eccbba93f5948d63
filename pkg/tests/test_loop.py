import random

import pytest

from dzkdv.diffpoly import DiffPoly, v
from dzkdv.exact import Rational
from dzkdv.intersection import intersection_number
from dzkdv.loop import (
    KdVFreeEnergy,
    LoopSeries,
    Partition,
    all_partitions,
    check_relation_av,
    enumerate_partitions,
    homogeneity_defect,
    kdv_free_energies,
    leading_constant,
    loop_dx,
    solve_kdv_loop,
)

MAX_G = 4


@pytest.fixture(scope="module")
def table():
    return kdv_free_energies(MAX_G)


def sqrt_jet(n):
    s = LoopSeries.power(1)
    for _ in range(n):
        s = loop_dx(s)
    return s


def test_loop_dx_of_square_root():
    assert loop_dx(LoopSeries.power(1)) == LoopSeries.power(3, v(1, 1).scale(Rational(-1, 2)))


def test_loop_dx_of_lambda_free_part():
    p = v(1, 2) * v(1, 0)
    assert loop_dx(LoopSeries.power(0, p)) == LoopSeries.power(0, p.dx())


@pytest.mark.parametrize("n1,n2", [(0, 0), (0, 1), (1, 1), (2, 3), (4, 0)])
def test_leading_term_of_products(n1, n2):
    top = n1 + n2
    prod = sqrt_jet(n1) * sqrt_jet(n2)
    # (lambda - v)^-(top+1) = (-1)^(top+1) (v - lambda)^-(top+1)
    expected = v(1, 1, top) if top else DiffPoly.const(1)
    assert prod.coefficient(2 * top + 2) == expected.scale((-1) ** (top + 1) * leading_constant(n1, n2))
    assert max(prod.terms) == 2 * top + 2


def test_leading_constant_values():
    assert leading_constant(0, 0) == -1
    assert leading_constant(0, 1) == Rational(-1, 2)
    assert leading_constant(1, 1) == Rational(-1, 4)


def test_partitions():
    assert enumerate_partitions(2, 1) == [(4,)]
    assert enumerate_partitions(2, 2) == [(3, 2)]
    assert enumerate_partitions(2, 3) == [(2, 2, 2)]
    assert enumerate_partitions(2, 4) == []
    assert all_partitions(1) == [(1,)]
    assert len(all_partitions(3)) == len(set(all_partitions(3)))
    assert Partition((2, 3, 2)).aut_order() == 2
    with pytest.raises(ValueError):
        Partition((3, 1))


def test_genus_one():
    f1 = solve_kdv_loop(1)
    assert f1 == KdVFreeEnergy.genus_one()
    assert f1.gradient(1) == v(1, 1, -1).scale(Rational(1, 24))


def test_genus_two_exact():
    f2 = solve_kdv_loop(2, [solve_kdv_loop(1)])
    assert f2.coeffs == {
        (4,): Rational(1, 1152),
        (3, 2): Rational(-7, 1920),
        (2, 2, 2): Rational(1, 360),
    }


def test_lower_accepts_mapping(table):
    assert solve_kdv_loop(3, {1: table[1], 2: table[2]}) == table[3]


@pytest.mark.parametrize("g", range(1, MAX_G + 1))
def test_leading_coefficient_is_intersection_number(table, g):
    assert table[g].coefficient((3 * g - 2,) if g > 1 else (1,)) == intersection_number(g, [3 * g - 2])


@pytest.mark.parametrize("g", range(2, MAX_G + 1))
def test_structure(table, g):
    f = table[g].as_diffpoly()
    assert f.dx_degrees() == {2 * g - 2}
    assert f.partial((1, 0)).is_zero()
    assert homogeneity_defect(f).is_zero()
    assert set(table[g].coeffs) <= set(all_partitions(g))


@pytest.mark.parametrize("g", range(2, MAX_G + 1))
def test_relation_av(table, g):
    assert check_relation_av(g, table)


def test_relation_av_needs_lower_genera(table):
    with pytest.raises(ValueError):
        check_relation_av(3, {3: table[3], 1: table[1]})


def restrict_to_first_jets(f: DiffPoly, top: int) -> DiffPoly:
    return f.substitute_orders({(1, s): 0 for s in range(2, top + 1)})


@pytest.mark.parametrize("g", range(2, MAX_G + 1))
def test_3g_minus_2_property(table, g):
    rng = random.Random(g)
    f = table[g].as_diffpoly()
    top = 3 * g
    for _ in range(60):
        ks = [rng.randint(1, top) for _ in range(rng.randint(1, 3))]
        d = f
        for k in ks:
            d = d.partial((1, k))
        val = restrict_to_first_jets(d, top)
        if sum(ks) != 3 * g - 3 + len(ks):
            assert val.is_zero(), ks


def test_unstable_genus_rejected():
    with pytest.raises(ValueError):
        KdVFreeEnergy(0, {})
    with pytest.raises(ValueError):
        KdVFreeEnergy(2, {(5,): 1})
