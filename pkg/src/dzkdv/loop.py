"""The KdV loop equation and the Witten-Kontsevich free energies it determines.

Everything lives in the single-field ring: jets ``v^{1,s}`` with ``v^{1,1}``
invertible.  The spectral parameter only ever enters through powers of
``(v^1 - lambda)``, so a :class:`LoopSeries` just records the exponents.
"""
from __future__ import annotations

from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Mapping, Sequence

from .diffpoly import DiffPoly, v
from .exact import Rational, double_factorial, solve_linear_exact, to_rational

__all__ = [
    "Partition",
    "enumerate_partitions",
    "all_partitions",
    "leading_constant",
    "LoopSeries",
    "loop_dx",
    "KdVFreeEnergy",
    "LoopSystemError",
    "solve_kdv_loop",
    "kdv_free_energies",
    "check_relation_av",
    "homogeneity_defect",
]

X0 = (1, 0)
X1 = (1, 1)


class LoopSystemError(RuntimeError):
    """The linear system extracted from the loop equation is not uniquely solvable."""


class Partition(tuple):
    """Weakly decreasing tuple of parts (each >= 2, or the genus-1 marker ``(1,)``)."""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if parts != (1,) and any(p < 2 for p in parts):
            raise ValueError(f"partition parts must be >= 2, got {parts}")
        return super().__new__(cls, parts)

    @property
    def size(self) -> int:
        return sum(self)

    def aut_order(self) -> int:
        out = 1
        for p in set(self):
            out *= factorial(self.count(p))
        return out

    def __repr__(self) -> str:
        return f"Partition{tuple(self)!r}"


def _partitions_into(total: int, parts: int, largest: int) -> Iterable[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(largest, total - 2 * (parts - 1)), 1, -1):
        for rest in _partitions_into(total - first, parts - 1, first):
            yield (first,) + rest


def enumerate_partitions(g: int, n: int) -> list[Partition]:
    """``P(g, n)``: partitions of ``3g-3+n`` into exactly ``n`` parts, each >= 2."""
    total = 3 * g - 3 + n
    if n < 1 or 2 * n > total:
        return []
    return [Partition(p) for p in _partitions_into(total, n, total)]


def all_partitions(g: int) -> list[Partition]:
    """Union of ``P(g, n)`` over ``n``; for ``g == 1`` just the marker ``(1,)``."""
    if g == 1:
        return [Partition((1,))]
    out = []
    for n in range(1, 3 * g - 2):
        out.extend(enumerate_partitions(g, n))
    return out


def leading_constant(n1: int, n2: int) -> Rational:
    """``A_{n1,n2} = -(2n1-1)!!(2n2-1)!!/2^(n1+n2)``."""
    if n1 < 0 or n2 < 0:
        raise ValueError("leading_constant needs nonnegative orders")
    return Rational(-double_factorial(2 * n1 - 1) * double_factorial(2 * n2 - 1), 2 ** (n1 + n2))


class LoopSeries:
    """``sum_k c_k (v^1 - lambda)^(-k/2)`` with DiffPoly coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[int, DiffPoly] | None = None):
        self.terms: dict[int, DiffPoly] = {k: c for k, c in (terms or {}).items() if not c.is_zero()}

    @classmethod
    def power(cls, k: int, coeff: DiffPoly | int = 1) -> LoopSeries:
        """``coeff * (v^1 - lambda)^(-k/2)``."""
        return cls({k: DiffPoly._coerce(coeff)})

    def __add__(self, other: LoopSeries) -> LoopSeries:
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out[k] + c if k in out else c
        return LoopSeries(out)

    def __sub__(self, other: LoopSeries) -> LoopSeries:
        return self + other.scale(-1)

    def scale(self, c) -> LoopSeries:
        if isinstance(c, DiffPoly):
            return LoopSeries({k: x * c for k, x in self.terms.items()})
        return LoopSeries({k: x.scale(c) for k, x in self.terms.items()})

    def __mul__(self, other: LoopSeries) -> LoopSeries:
        out: dict[int, DiffPoly] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + k2
                p = c1 * c2
                out[k] = out[k] + p if k in out else p
        return LoopSeries(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LoopSeries):
            return NotImplemented
        return self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, k: int) -> DiffPoly:
        return self.terms.get(k, DiffPoly())

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*(v1-l)^(-{k}/2)" for k, c in sorted(self.terms.items()))
        return f"LoopSeries({body or '0'})"


def loop_dx(s: LoopSeries) -> LoopSeries:
    """``d/dx`` with ``d/dx (v^1-lambda)^(-k/2) = -(k/2) v^{1,1} (v^1-lambda)^(-k/2-1)``."""
    out: dict[int, DiffPoly] = {}
    vx = v(1, 1)
    for k, c in s.terms.items():
        d = c.dx()
        if d:
            out[k] = out[k] + d if k in out else d
        if k:
            t = (c * vx).scale(Rational(-k, 2))
            out[k + 2] = out[k + 2] + t if k + 2 in out else t
    return LoopSeries(out)


@lru_cache(maxsize=None)
def _sqrt_jet(n: int) -> LoopSeries:
    """``d^n/dx^n (v^1 - lambda)^(-1/2)``."""
    if n == 0:
        return LoopSeries.power(1)
    return loop_dx(_sqrt_jet(n - 1))


@lru_cache(maxsize=None)
def _inv_jet(n: int) -> LoopSeries:
    """``d^n/dx^n (v^1 - lambda)^(-1)``."""
    if n == 0:
        return LoopSeries.power(2)
    return loop_dx(_inv_jet(n - 1))


@lru_cache(maxsize=None)
def _cubic_jet(n: int) -> LoopSeries:
    """``d^n/dx^n (v^{1,1} (v^1 - lambda)^(-3))``."""
    if n == 0:
        return LoopSeries.power(6, v(1, 1))
    return loop_dx(_cubic_jet(n - 1))


@lru_cache(maxsize=None)
def _lhs_kernel(r: int) -> LoopSeries:
    """Series multiplying ``dF/dv^{1,r}`` on the left-hand side of the loop equation."""
    out = _inv_jet(r)
    for k in range(1, r + 1):
        out = out + (_sqrt_jet(k - 1) * _sqrt_jet(r - k + 1)).scale(comb(r, k))
    return out


def _pair_series(k: int, l: int) -> LoopSeries:
    return _sqrt_jet(k + 1) * _sqrt_jet(l + 1)


class KdVFreeEnergy:
    """``F_g`` of the KdV hierarchy as a table ``{partition: C_{g;mu}}``.

    For ``g >= 2`` the function is ``sum C_{g;mu} v^{1,(mu)} / (v^{1,1})^(g+n-1)``.
    Genus one is ``(1/24) log v^{1,1}``, recorded as ``{(1,): 1/24}``.
    """

    def __init__(self, genus: int, coeffs: Mapping[Iterable[int], object]):
        if genus < 1:
            raise ValueError("genus must be >= 1")
        self.genus = genus
        self.coeffs: dict[Partition, Rational] = {}
        for mu, c in coeffs.items():
            mu = Partition(mu)
            c = to_rational(c)
            if genus == 1:
                if mu != (1,):
                    raise ValueError("genus one carries only the (1) partition")
            elif mu.size != 3 * genus - 3 + len(mu) or len(mu) > 3 * genus - 3:
                raise ValueError(f"{tuple(mu)} is not in P({genus}, {len(mu)})")
            if c:
                self.coeffs[mu] = c
        self._poly: DiffPoly | None = None

    @classmethod
    def genus_one(cls) -> KdVFreeEnergy:
        return cls(1, {(1,): Rational(1, 24)})

    def coefficient(self, mu: Iterable[int]) -> Rational:
        return self.coeffs.get(Partition(mu), Rational(0))

    @staticmethod
    def basis(g: int, mu: Sequence[int]) -> DiffPoly:
        out = v(1, 1, -(g + len(mu) - 1))
        for k in mu:
            out = out * v(1, k)
        return out

    def as_diffpoly(self) -> DiffPoly:
        """Realized polynomial (``g >= 2`` only; genus one is a logarithm)."""
        if self.genus == 1:
            raise ValueError("F_1 is logarithmic; use gradient() or as_logdet()")
        if self._poly is None:
            out = DiffPoly()
            for mu, c in self.coeffs.items():
                out = out + self.basis(self.genus, mu).scale(c)
            self._poly = out
        return self._poly

    def as_logdet(self):
        from .diffpoly import LogDet

        if self.genus != 1:
            raise ValueError("only genus one is logarithmic")
        return LogDet(self.coeffs[Partition((1,))], [[v(1, 1)]])

    def as_function(self):
        return self.as_logdet() if self.genus == 1 else self.as_diffpoly()

    def gradient(self, k: int) -> DiffPoly:
        """``dF_g / dv^{1,k}``."""
        if self.genus == 1:
            return v(1, 1, -1).scale(self.coeffs[Partition((1,))]) if k == 1 else DiffPoly()
        return self.as_diffpoly().partial((1, k))

    def hessian(self, k: int, l: int) -> DiffPoly:
        if self.genus == 1:
            if k == l == 1:
                return v(1, 1, -2).scale(-self.coeffs[Partition((1,))])
            return DiffPoly()
        return self.as_diffpoly().partial((1, k)).partial((1, l))

    def max_order(self) -> int:
        return 1 if self.genus == 1 else max(max(mu) for mu in self.coeffs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KdVFreeEnergy):
            return NotImplemented
        return self.genus == other.genus and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"KdVFreeEnergy(genus={self.genus}, coeffs={ {tuple(k): str(c) for k, c in self.coeffs.items()} })"


def _rhs_series(g: int, lower: Mapping[int, KdVFreeEnergy]) -> LoopSeries:
    out = LoopSeries()
    if g == 1:
        return LoopSeries.power(4, DiffPoly.const(Rational(-1, 16)))
    half = Rational(1, 2)
    for m in range(1, g):
        a, b = lower[m], lower[g - m]
        for k in range(a.max_order() + 1):
            gk = a.gradient(k)
            if not gk:
                continue
            for l in range(b.max_order() + 1):
                gl = b.gradient(l)
                if gl:
                    out = out + _pair_series(k, l).scale((gk * gl).scale(half))
    prev = lower[g - 1]
    top = prev.max_order()
    for k in range(top + 1):
        for l in range(top + 1):
            h = prev.hessian(k, l)
            if h:
                out = out + _pair_series(k, l).scale(h.scale(half))
    for k in range(top + 1):
        gk = prev.gradient(k)
        if gk:
            out = out + _cubic_jet(k + 1).scale(gk.scale(Rational(1, 8)))
    return out


def _lhs_series(f: DiffPoly, max_order: int) -> LoopSeries:
    out = LoopSeries()
    for r in range(max_order + 1):
        d = f.partial((1, r))
        if d:
            out = out + _lhs_kernel(r).scale(d)
    return out


def solve_kdv_loop(g: int, lower: Sequence[KdVFreeEnergy] | Mapping[int, KdVFreeEnergy] = ()) -> KdVFreeEnergy:
    """Solve the genus-``g`` loop equation with the partition ansatz.

    Every ``(exponent, monomial)`` coefficient gives one linear equation in the
    unknowns ``C_{g;mu}``; the overdetermined system must have exactly one
    solution.
    """
    if g < 1:
        raise ValueError("genus must be >= 1")
    if g == 1:
        return KdVFreeEnergy.genus_one()
    if isinstance(lower, Mapping):
        table = dict(lower)
    else:
        table = {f.genus: f for f in lower}
    missing = [m for m in range(1, g) if m not in table]
    if missing:
        raise ValueError(f"lower genera missing: {missing}")

    unknowns = all_partitions(g)
    columns = [_lhs_series(KdVFreeEnergy.basis(g, mu), max(mu)) for mu in unknowns]
    rhs = _rhs_series(g, table)

    keys: dict[tuple, int] = {}
    for s in columns + [rhs]:
        for k, c in s.terms.items():
            for mono, _ in c.items():
                keys.setdefault((k, mono), len(keys))
    matrix = [[Rational(0)] * len(unknowns) for _ in keys]
    vec = [Rational(0)] * len(keys)
    for j, s in enumerate(columns):
        for k, c in s.terms.items():
            for mono, x in c.items():
                matrix[keys[(k, mono)]][j] = x
    for k, c in rhs.terms.items():
        for mono, x in c.items():
            vec[keys[(k, mono)]] = x

    sol = solve_linear_exact(matrix, vec)
    if sol.status == "inconsistent":
        raise LoopSystemError(f"inconsistent loop system at genus {g}")
    if sol.status == "underdetermined":
        raise LoopSystemError(f"underdetermined loop system at genus {g} (rank {sol.rank} < {len(unknowns)})")
    return KdVFreeEnergy(g, dict(zip(unknowns, sol.solution)))


@lru_cache(maxsize=None)
def _cached_free_energies(max_genus: int) -> tuple[KdVFreeEnergy, ...]:
    if max_genus == 1:
        return (KdVFreeEnergy.genus_one(),)
    lower = _cached_free_energies(max_genus - 1)
    return lower + (solve_kdv_loop(max_genus, lower),)


def kdv_free_energies(max_genus: int) -> dict[int, KdVFreeEnergy]:
    """``{g: F_g}`` for ``1 <= g <= max_genus`` (memoized within the process)."""
    if max_genus < 1:
        raise ValueError("max_genus must be >= 1")
    return {f.genus: f for f in _cached_free_energies(max_genus)}


def _av_prefactor(g: int) -> Rational:
    n = 3 * g - 2
    out = Rational(-factorial(n))
    for k in range(1, n + 1):
        out += comb(n, k) * leading_constant(k - 1, 3 * g - 1 - k)
    return out


def check_relation_av(g: int, table: Sequence[KdVFreeEnergy] | Mapping[int, KdVFreeEnergy]) -> bool:
    """Compare both sides of the leading-term relation for ``F_g``."""
    if g < 2:
        raise ValueError("relation holds for g >= 2")
    if not isinstance(table, Mapping):
        table = {f.genus: f for f in table}
    missing = [m for m in range(1, g + 1) if m not in table]
    if missing:
        raise ValueError(f"table is missing genera {missing}")
    lhs = table[g].gradient(3 * g - 2).scale(_av_prefactor(g))
    rhs = DiffPoly()
    for m in range(1, g):
        rhs = rhs + (table[m].gradient(3 * m - 2) * table[g - m].gradient(3 * g - 3 * m - 2)).scale(
            leading_constant(3 * m - 1, 3 * g - 3 * m - 1) / 2
        )
    for k in range(1, 3 * g - 4):
        l = 3 * g - 4 - k
        rhs = rhs + table[g - 1].hessian(k, l).scale(leading_constant(k + 1, l + 1) / 2)
    rhs = rhs - (table[g - 1].gradient(3 * g - 5) * v(1, 1, -1)).scale(Rational(factorial(3 * g - 2), 16))
    return lhs == rhs


def homogeneity_defect(f: DiffPoly) -> DiffPoly:
    """``sum_{k>=1} (k+2)/2 v^{1,k} dF/dv^{1,k}``; vanishes on ``F_g`` for ``g >= 2``."""
    out = DiffPoly()
    for k in range(1, f.max_order() + 1):
        out = out + (v(1, k) * f.partial((1, k))).scale(Rational(k + 2, 2))
    return out
