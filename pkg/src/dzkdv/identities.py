"""Both sides of the universal identities for free energies, as exact reports.

Every check returns an :class:`IdentityReport`; ``equal`` is exact (fractions
are compared by cross-multiplication) and ``witness`` names the first
monomial of ``lhs - rhs`` when they differ.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from typing import Any, Sequence

from .diffpoly import DiffFrac, DiffPoly, JetVar, v
from .exact import Rational
from .frobenius import FrobeniusModel, add_jet_functions
from .intersection import intersection_number
from .loop import Partition, kdv_free_energies
from .operators import a_operator_action, tree_operator_action

__all__ = [
    "IdentityReport",
    "FreeEnergyUnavailable",
    "free_energy",
    "mg_matrix",
    "check_universal",
    "check_genus1",
    "check_aop_single",
    "check_a21",
    "kills_v_only",
]

Matrix = list[list[DiffPoly]]


class FreeEnergyUnavailable(ValueError):
    """Higher-genus free energies are only implemented for the KdV (point) model."""


def _render_monomial(mono) -> str:
    if not mono:
        return "1"
    return " * ".join(str(JetVar(*var)) + (f"^{e}" if e != 1 else "") for var, e in mono)


def _difference(lhs: Any, rhs: Any) -> DiffPoly:
    if isinstance(lhs, DiffFrac) or isinstance(rhs, DiffFrac):
        a, b = DiffFrac._coerce(lhs), DiffFrac._coerce(rhs)
        return a.num * b.den - b.num * a.den
    return lhs - rhs


@dataclass
class IdentityReport:
    name: str
    params: dict
    lhs: Any
    rhs: Any
    equal: bool = field(init=False)
    witness: str | None = field(init=False)

    def __post_init__(self) -> None:
        diff = _difference(self.lhs, self.rhs)
        self.equal = diff.is_zero()
        if self.equal:
            self.witness = None
        else:
            mono, c = diff.sorted_items()[0]
            self.witness = f"{Rational(c)} * {_render_monomial(mono)}"

    def __bool__(self) -> bool:
        return self.equal

    def to_dict(self) -> dict:
        return {"name": self.name, "params": self.params, "equal": self.equal, "witness": self.witness}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_text(self) -> str:
        args = ", ".join(f"{k}={val}" for k, val in self.params.items())
        head = f"{'PASS' if self.equal else 'FAIL'} {self.name}({args})"
        if self.equal:
            return head
        return f"{head}\n  lhs: {self.lhs}\n  rhs: {self.rhs}\n  witness: {self.witness}"


# M[g] ----------------------------------------------------------------------------
_MG_CACHE: dict[tuple[int, int], Matrix] = {}
_MG_LOCK = threading.Lock()


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = DiffPoly()
            for k in range(n):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def _m_matrix(model: FrobeniusModel) -> Matrix:
    """``M^a_b = <<tau^a_0 tau_{l,0} tau_{m,0}>> <<tau^l_0 tau^m_0 tau_{b,0}>>``."""
    idx = model.indices()
    n = model.N
    # <<tau^l_0 tau^m_0 tau_{b,0}>> = c^{lm}_b after raising with eta
    double_up = {}
    for lam, mu, b in product(idx, idx, idx):
        acc = DiffPoly()
        for x in idx:
            e = model.eta_inv[mu - 1][x - 1]
            if e:
                acc = acc + model.correlator_up(lam, [(x, 0), (b, 0)]).scale(e)
        double_up[lam, mu, b] = acc
    out = [[DiffPoly() for _ in range(n)] for _ in range(n)]
    for a, b in product(idx, idx):
        acc = DiffPoly()
        for lam, mu in product(idx, idx):
            left = model.correlator_up(a, [(lam, 0), (mu, 0)])
            if left.is_zero():
                continue
            acc = acc + left * double_up[lam, mu, b]
        out[a - 1][b - 1] = acc
    return out


def mg_matrix(model: FrobeniusModel, g: int) -> Matrix:
    """``M[g]``: the identity at ``g = 1``, else the ``(g-1)``-th power of ``M``."""
    if g < 1:
        raise ValueError("g must be >= 1")
    key = (id(model), g)
    with _MG_LOCK:
        hit = _MG_CACHE.get(key)
    if hit is not None:
        return hit
    if g == 1:
        out = [[DiffPoly.const(int(i == j)) for j in range(model.N)] for i in range(model.N)]
    else:
        out = _matmul(mg_matrix(model, g - 1), _m_matrix(model))
    with _MG_LOCK:
        _MG_CACHE[key] = out
    return out


# free energies ----------------------------------------------------------------
def _is_point(model: FrobeniusModel) -> bool:
    return model.N == 1 and model.c_lower(1, 1, 1) == DiffPoly.const(1)


def free_energy(model: FrobeniusModel, g: int) -> Any:
    """``F_g`` on the jet space, up to the ``G``-function at genus one."""
    if g < 1:
        raise ValueError("g must be >= 1")
    if g == 1:
        return model.genus_one_logdet()
    if not _is_point(model):
        raise FreeEnergyUnavailable("free energy unavailable for N>=2, g>=2")
    return kdv_free_energies(g)[g].as_diffpoly()


def kills_v_only(model: FrobeniusModel, pairs: Sequence[tuple[int, int]], max_degree: int | None = None) -> bool:
    """Does the operator annihilate every monomial in ``v^{a,0}`` up to ``max_degree``?

    A nonzero answer here would make results depend on the unknown ``G(v)``.
    """
    if max_degree is None:
        max_degree = len(pairs) + 1
    for d in range(1, max_degree + 1):
        for combo in combinations_with_replacement(model.indices(), d):
            mono = DiffPoly.const(1)
            for a in combo:
                mono = mono * v(a, 0)
            out = tree_operator_action(model, pairs, mono)
            if not (isinstance(out, DiffPoly) and out.is_zero()):
                return False
    return True


# identities ---------------------------------------------------------------------
def _sum(terms) -> Any:
    out: Any = DiffPoly()
    for t in terms:
        out = add_jet_functions(out, t)
    return out


def check_universal(model: FrobeniusModel, g: int, mu: Sequence[int], alphas: Sequence[int] | None = None) -> IdentityReport:
    """Order-``n`` tree operator on ``F_g`` against ``|Aut(mu)| C_{g;mu}`` times the correlator chain."""
    mu = Partition(mu)
    if alphas is None:
        alphas = [1] * len(mu)
    alphas = list(alphas)
    if len(alphas) != len(mu):
        raise ValueError("one alpha per part is required")
    if g == 1:
        if tuple(mu) != (1,):
            raise ValueError("genus one only has the partition (1)")
        const = Rational(1, 24)
    else:
        if mu == (1,) or mu.size != 3 * g - 3 + len(mu):
            raise ValueError(f"{tuple(mu)} is not in P({g}, {len(mu)})")
        target = free_energy(model, g)  # raises for N >= 2
        const = mu.aut_order() * kdv_free_energies(g)[g].coefficient(mu)
    pairs = list(zip(alphas, mu))
    if g == 1:
        if not kills_v_only(model, pairs):
            raise AssertionError("operator does not annihilate functions of v alone")
        target = free_energy(model, 1)
    lhs = tree_operator_action(model, pairs, target)

    mg = mg_matrix(model, g)
    idx = model.indices()
    # chain over gamma_0..gamma_n, closed by M[g]^{gamma_0}_{gamma_n}
    partial: dict[tuple[int, int], DiffPoly] = {(c, c): DiffPoly.const(1) for c in idx}
    for a in alphas:
        nxt: dict[tuple[int, int], DiffPoly] = {}
        for (g0, gi), val in partial.items():
            for gj in idx:
                link = model.correlator_up(gj, [(a, 0), (gi, 0)])
                if link.is_zero():
                    continue
                key = (g0, gj)
                nxt[key] = nxt[key] + val * link if key in nxt else val * link
        partial = nxt
    rhs = DiffPoly()
    for (g0, gn), val in partial.items():
        rhs = rhs + mg[g0 - 1][gn - 1] * val
    rhs = rhs.scale(const)
    params = {"model": model.name, "g": g, "mu": list(mu), "alphas": alphas}
    return IdentityReport("universal", params, lhs, rhs)


def check_genus1(model: FrobeniusModel, alpha: int, p: int) -> IdentityReport:
    """``A^0_{alpha,p}(F_1) = (1/24) <<tau_{alpha,p-1} tau^b_0 tau_{b,0}>>``."""
    if p < 1:
        raise ValueError("p must be >= 1")
    lhs = a_operator_action(model, [0], [(alpha, p)], model.genus_one_logdet())
    rhs = _sum(model.correlator_up(b, [(alpha, p - 1), (b, 0)]) for b in model.indices()).scale(Rational(1, 24))
    return IdentityReport("genus1", {"model": model.name, "alpha": alpha, "p": p}, lhs, rhs)


def check_aop_single(model: FrobeniusModel, g: int, alpha: int, p: int) -> IdentityReport:
    """``A^{3g-3}_{alpha,p}(F_g)`` against ``<<tau_{alpha,p-3g+2} tau^b_0 tau_{m,0}>> M[g]^m_b`` times ``<tau_{3g-2}>_g``."""
    if g < 1 or p < 3 * g - 2:
        raise ValueError("need g >= 1 and p >= 3g - 2")
    lhs = a_operator_action(model, [3 * g - 3], [(alpha, p)], free_energy(model, g))
    mg = mg_matrix(model, g)
    shift = p - (3 * g - 2)
    rhs = DiffPoly()
    for b, m in product(model.indices(), model.indices()):
        if mg[m - 1][b - 1].is_zero():
            continue
        rhs = rhs + model.correlator_up(b, [(alpha, shift), (m, 0)]) * mg[m - 1][b - 1]
    rhs = rhs.scale(intersection_number(g, [3 * g - 2]))
    return IdentityReport("aop_single", {"model": model.name, "g": g, "alpha": alpha, "p": p}, lhs, rhs)


def check_a21(model: FrobeniusModel, p1: int, p2: int, alpha1: int = 1, alpha2: int = 1) -> IdentityReport:
    """``A^2_{alpha2,p2} A^1_{alpha1,p1} (F_2)`` against the genus-two constant ``29/5760``."""
    if p1 < 2 or p2 < 3:
        raise ValueError("need p1 >= 2 and p2 >= 3")
    lhs = a_operator_action(model, [2, 1], [(alpha2, p2), (alpha1, p1)], free_energy(model, 2))
    mg = mg_matrix(model, 2)
    idx = model.indices()
    rhs = DiffPoly()
    for b, m, lam in product(idx, idx, idx):
        if mg[lam - 1][m - 1].is_zero():
            continue
        left = model.correlator_up(m, [(alpha1, p1 - 2), (b, 0)])
        if left.is_zero():
            continue
        right = model.correlator_up(b, [(alpha2, p2 - 3), (lam, 0)])
        rhs = rhs + left * right * mg[lam - 1][m - 1]
    rhs = rhs.scale(Rational(29, 5760))
    params = {"model": model.name, "p1": p1, "p2": p2, "alpha1": alpha1, "alpha2": alpha2}
    return IdentityReport("a21", params, lhs, rhs)
