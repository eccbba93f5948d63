import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dzkdv.diffpoly import DiffPoly, v
from dzkdv.exact import Rational, det_adjugate, double_factorial, pochhammer, solve_linear_exact, to_rational


def test_rational_is_canonical():
    q = Rational(6, -4)
    assert (q.numerator, q.denominator) == (-3, 2)
    assert Rational(0, 5).denominator == 1


def test_to_rational_rejects_floats():
    assert to_rational("3/9") == Rational(1, 3)
    with pytest.raises(TypeError):
        to_rational(0.5)


@pytest.mark.parametrize("s,t,expected", [(5, 0, 1), (3, 4, 0), (4, 4, 24), (-2, 3, -24)])
def test_pochhammer(s, t, expected):
    assert pochhammer(s, t) == expected


def test_double_factorial():
    assert [double_factorial(n) for n in (-1, 0, 1, 5, 6)] == [1, 1, 1, 15, 48]


def test_solve_identity():
    sol = solve_linear_exact([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [Rational(1, 2), 3, -7])
    assert sol.status == "unique"
    assert sol.solution == (Rational(1, 2), 3, -7)


def test_solve_two_by_two():
    sol = solve_linear_exact([[1, 1], [1, -1]], [2, 0])
    assert sol.status == "unique" and sol.solution == (1, 1)


def test_solve_inconsistent():
    assert solve_linear_exact([[1, 1], [2, 2]], [1, 3]).status == "inconsistent"


def test_solve_underdetermined():
    sol = solve_linear_exact([[1, 1, 0], [0, 0, 1]], [2, 5])
    assert sol.status == "underdetermined"
    assert len(sol.nullspace) == 1
    n = sol.nullspace[0]
    assert n[0] + n[1] == 0 and n[2] == 0 and any(n)


def test_solve_dimension_mismatch():
    with pytest.raises(ValueError):
        solve_linear_exact([[1, 2]], [1, 2])


small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n),
    st.lists(small, min_size=n, max_size=n))))
def test_solution_reproduces_rhs(data):
    a, b = data
    sol = solve_linear_exact(a, b)
    if sol.status == "inconsistent":
        return
    x = sol.solution
    for row, rhs in zip(a, b):
        assert sum(Rational(c) * xi for c, xi in zip(row, x)) == Rational(rhs)
    for n in sol.nullspace:
        for row in a:
            assert sum(Rational(c) * ni for c, ni in zip(row, n)) == 0


def test_det_adjugate_small():
    p = v(1, 1) * v(2, 0) + 3
    det, adj = det_adjugate([[p]])
    assert det == p and adj == [[1]]
    det, _ = det_adjugate([[0, 1], [1, 0]])
    assert det == -1


def _matmul(a, b):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n)), DiffPoly()) for j in range(n)] for i in range(n)]


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3), st.randoms(use_true_random=False))
def test_matrix_times_adjugate(n, rng):
    def entry():
        out = DiffPoly()
        for _ in range(rng.randint(0, 2)):
            out = out + v(rng.randint(1, 2), rng.randint(0, 2)).scale(rng.randint(-3, 3))
        return out + rng.randint(-2, 2)

    m = [[entry() for _ in range(n)] for _ in range(n)]
    det, adj = det_adjugate(m)
    prod = _matmul(m, adj)
    for i in range(n):
        for j in range(n):
            assert prod[i][j] == (det if i == j else DiffPoly())
