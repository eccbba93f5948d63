"""Exact rational arithmetic and small exact linear algebra.

Rationals are ``gmpy2.mpq`` values: always reduced, positive denominator,
and equal (with equal hashes) to the corresponding ``fractions.Fraction``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from math import lcm
from typing import Any, Sequence

import gmpy2

Rational = gmpy2.mpq

__all__ = [
    "Rational",
    "to_rational",
    "pochhammer",
    "double_factorial",
    "LinearSolution",
    "solve_linear_exact",
    "det_adjugate",
]


def to_rational(x: Any) -> Rational:
    """Coerce an int, Fraction, mpq or ``"p/q"`` string to a canonical rational."""
    if isinstance(x, str):
        return Rational(x.strip())
    if isinstance(x, Fraction):
        return Rational(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted")
    return Rational(x)


def pochhammer(s: int, t: int) -> int:
    """Falling factorial ``s (s-1) ... (s-t+1)``; equals 1 for ``t == 0``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    out = 1
    for i in range(t):
        out *= s - i
    return out


def double_factorial(n: int) -> int:
    """``n!!`` with the convention ``(-1)!! = 0!! = 1``."""
    if n < -1:
        raise ValueError("double factorial undefined below -1")
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


@dataclass(frozen=True)
class LinearSolution:
    """Outcome of :func:`solve_linear_exact`.

    ``status`` is one of ``"unique"``, ``"inconsistent"`` or
    ``"underdetermined"``.  For consistent systems ``solution`` is a
    particular solution (free variables set to zero) and ``nullspace`` a basis
    of the kernel.
    """

    status: str
    solution: tuple[Rational, ...] | None = None
    nullspace: tuple[tuple[Rational, ...], ...] = field(default_factory=tuple)
    rank: int = 0


def _integer_row(row: Sequence[Any]) -> list[int]:
    vals = [to_rational(x) for x in row]
    den = lcm(*(int(v.denominator) for v in vals)) if vals else 1
    return [int(v * den) for v in vals]


def solve_linear_exact(matrix: Sequence[Sequence[Any]], rhs: Sequence[Any]) -> LinearSolution:
    """Solve ``matrix @ x = rhs`` exactly.

    Rows are scaled to integers and reduced with Bareiss fraction-free
    elimination under full pivoting (smallest nonzero pivot).  Back
    substitution is done over the rationals.
    """
    m = len(matrix)
    if len(rhs) != m:
        raise ValueError(f"dimension mismatch: {m} rows but rhs of length {len(rhs)}")
    n = len(matrix[0]) if m else 0
    if any(len(r) != n for r in matrix):
        raise ValueError("dimension mismatch: ragged matrix")

    rows = [_integer_row(list(r) + [b]) for r, b in zip(matrix, rhs)]
    # drop zero rows up front, they carry no information unless rhs != 0
    for r in rows:
        if not any(r[:n]) and r[n]:
            return LinearSolution("inconsistent")
    rows = [r for r in rows if any(r[:n])]
    # dedupe identical rows (common for loop-equation systems)
    seen: set[tuple[int, ...]] = set()
    uniq = []
    for r in rows:
        g = int(gmpy2.gcd(*r))
        key = tuple(x // g for x in r)
        if key[next(i for i, x in enumerate(key) if x)] < 0:
            key = tuple(-x for x in key)
        if key not in seen:
            seen.add(key)
            uniq.append(list(key))
    rows = uniq

    cols = list(range(n))  # cols[j] = original column at position j
    prev = 1
    rank = 0
    nrows = len(rows)
    while rank < min(nrows, n):
        best = None
        for i in range(rank, nrows):
            ri = rows[i]
            for j in range(rank, n):
                v = ri[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        rows[rank], rows[pi] = rows[pi], rows[rank]
        if pj != rank:
            for r in rows:
                r[rank], r[pj] = r[pj], r[rank]
            cols[rank], cols[pj] = cols[pj], cols[rank]
        piv_row = rows[rank]
        p = piv_row[rank]
        for i in range(rank + 1, nrows):
            r = rows[i]
            f = r[rank]
            if f:
                rows[i] = [(p * r[j] - f * piv_row[j]) // prev for j in range(n + 1)]
            else:
                rows[i] = [(p * r[j]) // prev for j in range(n + 1)]
        prev = p
        rank += 1

    for i in range(rank, nrows):
        if rows[i][n]:
            return LinearSolution("inconsistent", rank=rank)

    # back substitution on the permuted system, free variables = 0
    def back_substitute(rhs_col: list[Rational], free_vals: dict[int, Rational]) -> list[Rational]:
        x = [Rational(0)] * n
        for j, val in free_vals.items():
            x[j] = val
        for i in reversed(range(rank)):
            r = rows[i]
            acc = rhs_col[i]
            for j in range(i + 1, n):
                if r[j]:
                    acc -= r[j] * x[j]
            x[i] = acc / r[i]
        return x

    rhs_col = [Rational(rows[i][n]) for i in range(rank)]
    xp = back_substitute(rhs_col, {})
    solution = [Rational(0)] * n
    for pos, orig in enumerate(cols):
        solution[orig] = xp[pos]

    if rank == n:
        return LinearSolution("unique", tuple(solution), rank=rank)

    basis = []
    zero_rhs = [Rational(0)] * rank
    for free in range(rank, n):
        xv = back_substitute(zero_rhs, {free: Rational(1)})
        vec = [Rational(0)] * n
        for pos, orig in enumerate(cols):
            vec[orig] = xv[pos]
        basis.append(tuple(vec))
    return LinearSolution("underdetermined", tuple(solution), tuple(basis), rank=rank)


def _perm_sign(p: Sequence[int]) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _det(matrix: Sequence[Sequence[Any]]) -> Any:
    n = len(matrix)
    if n == 0:
        return 1
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = 0
    for p in permutations(range(n)):
        term = matrix[0][p[0]]
        for i in range(1, n):
            term = term * matrix[i][p[i]]
        total = total + _perm_sign(p) * term
    return total


def det_adjugate(matrix: Sequence[Sequence[Any]]) -> tuple[Any, list[list[Any]]]:
    """Determinant and adjugate of a small square matrix over any commutative ring.

    Entries only need ``+``, ``-``, ``*`` and ``** 0``.  The adjugate satisfies
    ``matrix @ adj == det * Id``.
    """
    n = len(matrix)
    if any(len(r) != n for r in matrix):
        raise ValueError("det_adjugate needs a square matrix")
    one = matrix[0][0] ** 0
    det = _det(matrix)
    if n == 1:
        return det, [[one]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[matrix[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = _det(minor)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return det, adj
