"""Differential polynomials in jet variables ``v^{alpha,s}``.

A :class:`DiffPoly` is a finite sum of rational multiples of monomials in the
jet variables, with negative exponents allowed only on invertible jets
(first jets by default).  :class:`DiffFrac` adds quotients, and
:class:`LogDet` represents ``c * log det(matrix)`` through its (rational)
partial derivatives.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Union

from .exact import Rational, det_adjugate, to_rational

__all__ = [
    "JetVar",
    "DiffPoly",
    "DiffFrac",
    "LogDet",
    "SingularEvaluation",
    "v",
    "dx",
    "partial",
    "eval_at",
    "dx_degrees",
]


class SingularEvaluation(ZeroDivisionError):
    """An inverted jet (or a denominator) evaluated to zero."""


class JetVar(NamedTuple):
    alpha: int
    order: int

    def __str__(self) -> str:
        return f"v[{self.alpha},{self.order}]"

    def latex(self) -> str:
        return f"v^{{{self.alpha},{self.order}}}"


Monomial = tuple  # tuple[tuple[tuple[int, int], int], ...], sorted by variable
Scalar = Union[int, Rational]

_ONE: Monomial = ()


@lru_cache(maxsize=1 << 20)
def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for var, e in b:
        n = d.get(var, 0) + e
        if n:
            d[var] = n
        else:
            del d[var]
    return tuple(sorted(d.items()))


@lru_cache(maxsize=1 << 20)
def _mono_dx(m: Monomial) -> tuple[tuple[int, Monomial], ...]:
    out = []
    for var, e in m:
        nxt = (var[0], var[1] + 1)
        d = dict(m)
        if e == 1:
            del d[var]
        else:
            d[var] = e - 1
        k = d.get(nxt, 0) + 1
        if k:
            d[nxt] = k
        else:
            del d[nxt]
        out.append((e, tuple(sorted(d.items()))))
    return tuple(out)


@lru_cache(maxsize=1 << 20)
def _mono_partial(m: Monomial, var: tuple[int, int]) -> tuple[int, Monomial] | None:
    for i, (w, e) in enumerate(m):
        if w == var:
            if e == 1:
                return e, m[:i] + m[i + 1:]
            return e, m[:i] + ((w, e - 1),) + m[i + 1:]
    return None


def _check_invertible(terms: Mapping[Monomial, Any], orders: frozenset[int]) -> None:
    for mono in terms:
        for var, e in mono:
            if e < 0 and var[1] not in orders:
                raise ValueError(f"jet {JetVar(*var)} is not invertible in this ring")


class DiffPoly:
    """Exact-rational differential polynomial.

    Values are immutable; every operation returns a new object.  ``terms``
    maps a monomial (sorted tuple of ``((alpha, order), exponent)``) to a
    nonzero rational coefficient.
    """

    __slots__ = ("_terms", "_hash")

    # jets that may carry negative exponents
    invertible_orders: frozenset[int] = frozenset({1})

    def __init__(self, terms: Mapping[Monomial, Any] | None = None, *, _trusted: bool = False):
        if terms is None:
            self._terms: dict[Monomial, Scalar] = {}
        elif _trusted:
            self._terms = terms  # type: ignore[assignment]
        else:
            clean: dict[Monomial, Scalar] = {}
            for mono, c in terms.items():
                c = to_rational(c)
                if c:
                    key = tuple(sorted((tuple(var), int(e)) for var, e in mono if e))
                    clean[key] = clean.get(key, 0) + c
                    if not clean[key]:
                        del clean[key]
            _check_invertible(clean, self.invertible_orders)
            self._terms = clean
        self._hash = None

    # construction ---------------------------------------------------------
    @classmethod
    def const(cls, c: Any) -> DiffPoly:
        c = to_rational(c)
        return cls({_ONE: c}, _trusted=True) if c else cls()

    @classmethod
    def var(cls, alpha: int, order: int = 0, power: int = 1) -> DiffPoly:
        if alpha < 1 or order < 0:
            raise ValueError("jet variables need alpha >= 1 and order >= 0")
        if power < 0 and order not in cls.invertible_orders:
            raise ValueError(f"jet {JetVar(alpha, order)} is not invertible in this ring")
        if power == 0:
            return cls.const(1)
        return cls({(((alpha, order), power),): Rational(1)}, _trusted=True)

    @classmethod
    def monomial(cls, exponents: Mapping[tuple[int, int], int], coeff: Any = 1) -> DiffPoly:
        mono = tuple(sorted((tuple(k), e) for k, e in exponents.items() if e))
        return cls({mono: coeff})

    @staticmethod
    def _coerce(x: Any) -> DiffPoly:
        if isinstance(x, DiffPoly):
            return x
        return DiffPoly.const(x)

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Scalar]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Scalar]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and _ONE in self._terms)

    def constant_value(self) -> Rational:
        return Rational(self._terms.get(_ONE, 0))

    def coefficient(self, exponents: Mapping[tuple[int, int], int] | Monomial) -> Rational:
        if isinstance(exponents, Mapping):
            mono = tuple(sorted((tuple(k), e) for k, e in exponents.items() if e))
        else:
            mono = exponents
        return Rational(self._terms.get(mono, 0))

    def variables(self) -> set[JetVar]:
        out = set()
        for mono in self._terms:
            for var, _ in mono:
                out.add(JetVar(*var))
        return out

    def max_order(self) -> int:
        return max((var[1] for mono in self._terms for var, _ in mono), default=-1)

    # arithmetic -----------------------------------------------------------
    def __add__(self, other: Any) -> DiffPoly:
        if isinstance(other, (DiffFrac, LogDet)):
            return NotImplemented
        other = self._coerce(other)
        if len(other._terms) > len(self._terms):
            a, b = other._terms, self._terms
        else:
            a, b = self._terms, other._terms
        out = dict(a)
        for m, c in b.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return DiffPoly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> DiffPoly:
        return DiffPoly({m: -c for m, c in self._terms.items()}, _trusted=True)

    def __sub__(self, other: Any) -> DiffPoly:
        if isinstance(other, (DiffFrac, LogDet)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> DiffPoly:
        return self._coerce(other) + (-self)

    def scale(self, c: Any) -> DiffPoly:
        c = to_rational(c)
        if not c:
            return DiffPoly()
        return DiffPoly({m: k * c for m, k in self._terms.items()}, _trusted=True)

    def __mul__(self, other: Any) -> DiffPoly:
        if isinstance(other, (DiffFrac, LogDet)):
            return NotImplemented
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        if len(other._terms) == 1 and _ONE in other._terms:
            return self.scale(other._terms[_ONE])
        if len(self._terms) == 1 and _ONE in self._terms:
            return other.scale(self._terms[_ONE])
        out: dict[Monomial, Scalar] = {}
        get = out.get
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        return DiffPoly(out, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> DiffPoly | DiffFrac:
        if isinstance(other, DiffPoly):
            if other.is_constant() and other:
                return self.scale(1 / other.constant_value())
            if len(other._terms) == 1:
                # division by a monomial stays polynomial when it only inverts allowed jets
                (mono, c), = other._terms.items()
                inv = tuple((var, -e) for var, e in mono)
                try:
                    _check_invertible({inv: 1}, self.invertible_orders)
                except ValueError:
                    return DiffFrac(self, other)
                return (self * DiffPoly({inv: Rational(1)}, _trusted=True)).scale(1 / Rational(c))
            return DiffFrac(self, other)
        if isinstance(other, (DiffFrac, LogDet)):
            return NotImplemented
        c = to_rational(other)
        if not c:
            raise ZeroDivisionError("division of a DiffPoly by zero")
        return self.scale(1 / c)

    def __rtruediv__(self, other: Any) -> DiffPoly | DiffFrac:
        return self._coerce(other) / self

    def __pow__(self, k: int) -> DiffPoly:
        if not isinstance(k, int):
            raise TypeError("DiffPoly powers must be integers")
        if k < 0:
            if len(self._terms) != 1:
                raise ValueError("only monomials in invertible jets can be inverted")
            (mono, c), = self._terms.items()
            inv = tuple((var, e * k) for var, e in mono)
            _check_invertible({inv: 1}, self.invertible_orders)
            return DiffPoly({inv: 1 / Rational(c) ** (-k)}, _trusted=True)
        out = DiffPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, DiffFrac):
            return other == self
        if isinstance(other, DiffPoly):
            return self._terms == other._terms
        try:
            c = to_rational(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self._terms == ({_ONE: c} if c else {})

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus -------------------------------------------------------------
    def dx(self) -> DiffPoly:
        """Total x-derivative: ``v^{a,s} -> v^{a,s+1}`` extended by Leibniz."""
        out: dict[Monomial, Scalar] = {}
        get = out.get
        for m, c in self._terms.items():
            for e, nm in _mono_dx(m):
                s = get(nm, 0) + e * c
                if s:
                    out[nm] = s
                else:
                    del out[nm]
        return DiffPoly(out, _trusted=True)

    def dx_n(self, n: int) -> DiffPoly:
        p = self
        for _ in range(n):
            p = p.dx()
        return p

    def partial(self, var: tuple[int, int]) -> DiffPoly:
        """Formal partial derivative in one jet variable."""
        var = (var[0], var[1])
        out: dict[Monomial, Scalar] = {}
        for m, c in self._terms.items():
            r = _mono_partial(m, var)
            if r is not None:
                e, nm = r
                s = out.get(nm, 0) + e * c
                if s:
                    out[nm] = s
                else:
                    del out[nm]
        return DiffPoly(out, _trusted=True)

    def depends_on(self, var: tuple[int, int]) -> bool:
        var = (var[0], var[1])
        return any(w == var for m in self._terms for w, _ in m)

    def eval_at(self, assignment: Mapping[tuple[int, int], Any]) -> Rational:
        vals = {(k[0], k[1]): to_rational(x) for k, x in assignment.items()}
        total = Rational(0)
        for m, c in self._terms.items():
            term = Rational(c)
            for var, e in m:
                if var not in vals:
                    raise KeyError(f"no value assigned to {JetVar(*var)}")
                x = vals[var]
                if e < 0 and not x:
                    raise SingularEvaluation(f"{JetVar(*var)} evaluates to zero but appears inverted")
                term *= x ** e
            total += term
        return total

    def substitute_orders(self, values: Mapping[tuple[int, int], Any]) -> DiffPoly:
        """Replace some variables by rational values, keeping the rest symbolic."""
        vals = {(k[0], k[1]): to_rational(x) for k, x in values.items()}
        out: dict[Monomial, Scalar] = {}
        for m, c in self._terms.items():
            coeff = Rational(c)
            rest = []
            for var, e in m:
                if var in vals:
                    if e < 0 and not vals[var]:
                        raise SingularEvaluation(f"{JetVar(*var)} evaluates to zero but appears inverted")
                    coeff *= vals[var] ** e
                else:
                    rest.append((var, e))
            if coeff:
                key = tuple(rest)
                s = out.get(key, 0) + coeff
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return DiffPoly(out, _trusted=True)

    def dx_degrees(self) -> set[int]:
        return {sum(var[1] * e for var, e in m) for m in self._terms}

    # rendering ------------------------------------------------------------
    def sorted_items(self) -> list[tuple[Monomial, Scalar]]:
        return sorted(self._terms.items(), key=lambda kv: kv[0])

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.sorted_items():
            c = Rational(c)
            factors = [f"{JetVar(*var)}" + (f"^{e}" if e != 1 else "") for var, e in mono]
            mag = abs(c)
            if factors:
                body = " * ".join(factors) if mag == 1 else " * ".join([str(mag)] + factors)
            else:
                body = str(mag)
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"DiffPoly({self})"

    def to_latex(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.sorted_items():
            c = Rational(c)
            num = [_latex_power(var, e) for var, e in mono if e > 0]
            den = [_latex_power(var, -e) for var, e in mono if e < 0]
            mag = abs(c)
            n_str = (str(mag.numerator) if mag.numerator != 1 or not num else "") + "".join(num)
            d_str = (str(mag.denominator) if mag.denominator != 1 else "") + "".join(den)
            body = f"\\frac{{{n_str or '1'}}}{{{d_str}}}" if d_str else (n_str or "1")
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def _latex_power(var, e: int) -> str:
    base = JetVar(*var).latex()
    return base if e == 1 else f"({base})^{{{e}}}"


def v(alpha: int, order: int = 0, power: int = 1) -> DiffPoly:
    """The jet variable ``v^{alpha,order}`` (optionally raised to a power)."""
    return DiffPoly.var(alpha, order, power)


class DiffFrac:
    """Quotient ``num / den`` of differential polynomials.

    Equality is decided by cross-multiplication; no cancellation is attempted.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Any, den: Any = 1):
        num = DiffPoly._coerce(num) if not isinstance(num, DiffFrac) else num
        den = DiffPoly._coerce(den) if not isinstance(den, DiffFrac) else den
        if isinstance(num, DiffFrac) or isinstance(den, DiffFrac):
            n1, d1 = (num.num, num.den) if isinstance(num, DiffFrac) else (num, DiffPoly.const(1))
            n2, d2 = (den.num, den.den) if isinstance(den, DiffFrac) else (den, DiffPoly.const(1))
            num, den = n1 * d2, d1 * n2
        if den.is_zero():
            raise ZeroDivisionError("DiffFrac with zero denominator")
        if den.is_constant():
            num, den = num.scale(1 / den.constant_value()), DiffPoly.const(1)
        self.num: DiffPoly = num
        self.den: DiffPoly = den

    @staticmethod
    def _coerce(x: Any) -> DiffFrac:
        if isinstance(x, DiffFrac):
            return x
        return DiffFrac(DiffPoly._coerce(x))

    def __add__(self, other: Any) -> DiffFrac:
        o = self._coerce(other)
        if o.den == self.den:
            return DiffFrac(self.num + o.num, self.den)
        return DiffFrac(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> DiffFrac:
        return DiffFrac(-self.num, self.den)

    def __sub__(self, other: Any) -> DiffFrac:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> DiffFrac:
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> DiffFrac:
        o = self._coerce(other)
        return DiffFrac(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> DiffFrac:
        o = self._coerce(other)
        return DiffFrac(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other: Any) -> DiffFrac:
        return self._coerce(other) / self

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, LogDet):
            return NotImplemented
        try:
            o = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def dx(self) -> DiffFrac:
        return DiffFrac(self.num.dx() * self.den - self.num * self.den.dx(), self.den * self.den)

    def partial(self, var: tuple[int, int]) -> DiffFrac:
        dn = self.num.partial(var)
        dd = self.den.partial(var)
        if dd.is_zero():
            return DiffFrac(dn, self.den)
        return DiffFrac(dn * self.den - self.num * dd, self.den * self.den)

    def variables(self) -> set[JetVar]:
        return self.num.variables() | self.den.variables()

    def max_order(self) -> int:
        return max(self.num.max_order(), self.den.max_order())

    def eval_at(self, assignment: Mapping[tuple[int, int], Any]) -> Rational:
        d = self.den.eval_at(assignment)
        if not d:
            raise SingularEvaluation("denominator evaluates to zero")
        return self.num.eval_at(assignment) / d

    def __str__(self) -> str:
        if self.den == 1:
            return str(self.num)
        return f"({self.num}) / ({self.den})"

    def __repr__(self) -> str:
        return f"DiffFrac({self})"


class LogDet:
    """``coeff * log det(matrix)`` for a square matrix of DiffPolys.

    Only derivatives are exposed; they are rational, so every operator that
    acts through derivatives can be applied without a logarithm generator.
    """

    def __init__(self, coeff: Any, matrix: list[list[DiffPoly]]):
        self.coeff = to_rational(coeff)
        self.matrix = [[DiffPoly._coerce(x) for x in row] for row in matrix]
        self.det, self.adj = det_adjugate(self.matrix)
        if self.det.is_zero():
            raise ValueError("log of a vanishing determinant")

    def partial(self, var: tuple[int, int]) -> DiffFrac | DiffPoly:
        n = len(self.matrix)
        num = DiffPoly()
        for i in range(n):
            for j in range(n):
                d = self.matrix[i][j].partial(var)
                if d:
                    num = num + self.adj[j][i] * d
        if num.is_zero():
            return DiffPoly()
        q = num.scale(self.coeff) / self.det
        return q

    def dx(self) -> DiffFrac | DiffPoly:
        total: Any = DiffPoly()
        for var in self.variables():
            total = total + self.partial(var) * v(var.alpha, var.order + 1)
        return total

    def variables(self) -> set[JetVar]:
        out: set[JetVar] = set()
        for row in self.matrix:
            for x in row:
                out |= x.variables()
        return out

    def max_order(self) -> int:
        return max((x.max_order() for row in self.matrix for x in row), default=-1)

    def __str__(self) -> str:
        if len(self.matrix) == 1:
            return f"{self.coeff} * log({self.matrix[0][0]})"
        return f"{self.coeff} * log(det[{'; '.join(', '.join(str(x) for x in r) for r in self.matrix)}])"


JetFunction = Union[DiffPoly, DiffFrac, LogDet]


def dx(p: Any) -> Any:
    return p.dx()


def partial(p: Any, var: tuple[int, int]) -> Any:
    return p.partial(var)


def eval_at(p: Any, assignment: Mapping[tuple[int, int], Any]) -> Rational:
    return p.eval_at(assignment)


def dx_degrees(p: DiffPoly) -> set[int]:
    return p.dx_degrees()


def iter_partials(f: Any, vars_: Iterable[tuple[int, int]]) -> Any:
    """Apply successive partial derivatives (innermost first)."""
    for var in vars_:
        if isinstance(f, DiffPoly) and f.is_zero():
            return f
        f = f.partial(var)
    return f
