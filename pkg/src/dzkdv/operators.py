"""Eguchi-Xiong operators, rooted-tree operators and the ``A^m`` vector fields.

All operators are first built as vector fields in the times ``t^{gamma,q}``
(``TField``: coefficients on ``d/dt^{gamma,q}``, functions of ``v``).  They
act on jet functions through the topological solution: a block ``B`` of
fields differentiates ``v^{gamma,s}`` into a genus-0 correlator,

    W_B^{gamma,s} = sum prod_{i in B} xi_i^{A_i} d_x^s <<tau^gamma_0 tau_{1,0} prod tau_{A_i}>>,

and a normal-ordered product of fields acts on ``f`` by summing over set
partitions of the fields (Faa di Bruno).  A single field then acts as the
ordinary jet vector field with coefficients ``W_{{X}}^{gamma,s}``.
"""
from __future__ import annotations

import threading
from collections import defaultdict
from itertools import product
from typing import Any, Iterable, Mapping, Sequence

from .diffpoly import DiffFrac, DiffPoly, LogDet
from .exact import Rational
from .frobenius import FrobeniusModel, add_jet_functions
from .trees import RootedTree, enumerate_q, enumerate_trees, set_partitions, tree_coefficient

__all__ = [
    "TField",
    "OperatorEngine",
    "engine_for",
    "ex_operator_action",
    "normal_ordered_apply",
    "tree_operator_action",
    "tree_operator_terms",
    "a_operator_action",
]

TimeIndex = tuple[int, int]
FieldKey = tuple[int, int]  # (gamma, q) names the Eguchi-Xiong field O_{gamma,q}


class TField:
    """Vector field ``sum c^{(gamma,q)} d/dt^{gamma,q}`` with DiffPoly coefficients in ``v``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[TimeIndex, DiffPoly] | None = None):
        self.coeffs = {k: c for k, c in (coeffs or {}).items() if not c.is_zero()}

    @classmethod
    def basis(cls, gamma: int, q: int) -> TField:
        return cls({(gamma, q): DiffPoly.const(1)})

    def __add__(self, other: TField) -> TField:
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return TField(out)

    def __sub__(self, other: TField) -> TField:
        return self + other.times(DiffPoly.const(-1))

    def times(self, f: DiffPoly) -> TField:
        if f.is_zero():
            return TField()
        return TField({k: c * f for k, c in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TField) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*d/dt[{a},{q}]" for (a, q), c in sorted(self.coeffs.items()))
        return f"TField({body or '0'})"


def _jet_vars(f: Any):
    return sorted(f.variables())


class OperatorEngine:
    """Per-model caches for fields, correlator blocks and vertex factors."""

    def __init__(self, model: FrobeniusModel):
        self.model = model
        self._ex: dict[FieldKey, TField] = {}
        self._a: dict[tuple[int, int, int], TField] = {}
        self._w: dict[tuple, DiffPoly] = {}
        self._vertex: dict[tuple, DiffPoly] = {}
        self._lock = threading.RLock()

    # fields -------------------------------------------------------------------
    def ex_field(self, beta: int, p: int) -> TField:
        """``O_{beta,p} = d/dt^{beta,p} - sum_k <<tau^g_0 tau_{beta,k}>> O_{g,p-k-1}``."""
        if p < 0:
            raise ValueError("p must be nonnegative")
        key = (beta, p)
        hit = self._ex.get(key)
        if hit is not None:
            return hit
        out = TField.basis(beta, p)
        for k in range(p):
            for g in self.model.indices():
                w = self.model.omega_up(g, beta, k)
                if w:
                    out = out - self.ex_field(g, p - k - 1).times(w)
        with self._lock:
            self._ex[key] = out
        return out

    def a_field(self, m: int, alpha: int, p: int) -> TField:
        """``A^m_{alpha,p}`` for ``p >= m + 1``."""
        if m < 0 or p < m + 1:
            raise ValueError(f"A^{m}_{{{alpha},{p}}} needs p >= m + 1")
        key = (m, alpha, p)
        hit = self._a.get(key)
        if hit is not None:
            return hit
        if m == 0:
            out = TField.basis(alpha, p)
            for b in self.model.indices():
                w = self.model.omega_up(b, alpha, p - 1)
                if w:
                    out = out - TField.basis(b, 0).times(w)
        else:
            out = self.a_field(m - 1, alpha, p)
            for g in self.model.indices():
                w = self.model.omega_up(g, alpha, p - m - 1)
                if w:
                    out = out - self.a_field(m - 1, g, m).times(w)
        with self._lock:
            self._a[key] = out
        return out

    # action on jets -------------------------------------------------------------
    def field_jet_coefficient(self, field: TField, gamma: int, s: int) -> DiffPoly:
        """``X(v^{gamma,s})`` for a single time vector field."""
        out = DiffPoly()
        for (b, q), c in field.coeffs.items():
            x = self.model.flow_field(b, q).coefficient(gamma, s)
            if x:
                out = out + c * x
        return out

    def apply_field(self, field: TField, f: Any) -> Any:
        """Genuine (chain-rule) action of one time vector field on a jet function."""
        out: Any = DiffPoly()
        for var in _jet_vars(f):
            c = self.field_jet_coefficient(field, var.alpha, var.order)
            if c:
                out = add_jet_functions(out, f.partial(tuple(var)) * c)
        return out

    def block_coefficient(self, block: tuple[FieldKey, ...], gamma: int, s: int) -> DiffPoly:
        """``W_B^{gamma,s}`` for a block of Eguchi-Xiong fields.

        Fields are applied one after another in increasing ``q``.  A field with
        ``q >= 1`` kills every function of ``v`` alone, and fields with ``q = 0``
        have constant coefficients, so no field ever differentiates the
        coefficients of an earlier one and the result is the normal-ordered value.
        """
        block = tuple(sorted(block, key=lambda k: (k[1], k[0])))
        key = (block, gamma, s)
        hit = self._w.get(key)
        if hit is not None:
            return hit
        if len(block) == 1:
            out = self.field_jet_coefficient(self.ex_field(*block[0]), gamma, s)
        else:
            out = self.apply_field(self.ex_field(*block[-1]), self.block_coefficient(block[:-1], gamma, s))
        with self._lock:
            self._w[key] = out
        return out

    def block_coefficient_expanded(self, block: tuple[FieldKey, ...], gamma: int, s: int) -> DiffPoly:
        """Reference value of ``W_B^{gamma,s}`` summed over time-basis components (slow)."""
        fields = [self.ex_field(*k) for k in block]
        out = DiffPoly()
        for combo in product(*(list(fl.coeffs.items()) for fl in fields)):
            coeff = DiffPoly.const(1)
            ins = [(1, 0)] * (s + 1)
            for t, c in combo:
                coeff = coeff * c
                ins.append(t)
            corr = self.model.correlator_up(gamma, ins)
            if corr:
                out = out + coeff * corr
        return out

    def _two_point(self, key: FieldKey, delta: int) -> DiffPoly:
        """``O_{key} <<tau_{delta,0}>>``: a function of ``v`` only."""
        out = DiffPoly()
        for (b, q), c in self.ex_field(*key).coeffs.items():
            out = out + c * self.model.omega(delta, 0, b, q)
        return out

    def vertex_factor(self, keys: tuple[FieldKey, ...], delta: int) -> DiffPoly:
        """``:prod O_{key}: <<tau_{delta,0}>>``, a genus-0 correlator for two or more fields."""
        keys = tuple(sorted(keys, key=lambda k: (k[1], k[0])))
        if len(keys) < 2:
            raise ValueError("non-root vertices carry at least two positive half-edges")
        ck = (keys, delta)
        hit = self._vertex.get(ck)
        if hit is not None:
            return hit
        inner = self._two_point(keys[0], delta) if len(keys) == 2 else self.vertex_factor(keys[:-1], delta)
        out = self.apply_field(self.ex_field(*keys[-1]), inner)
        with self._lock:
            self._vertex[ck] = out
        return out

    def vertex_factor_expanded(self, keys: tuple[FieldKey, ...], delta: int) -> DiffPoly:
        """Reference value of :meth:`vertex_factor` via time-basis components (slow)."""
        fields = [self.ex_field(*k) for k in keys]
        out = DiffPoly()
        for combo in product(*(list(fl.coeffs.items()) for fl in fields)):
            coeff = DiffPoly.const(1)
            ins = [(delta, 0)]
            for t, c in combo:
                coeff = coeff * c
                ins.append(t)
            corr = self.model.correlator(ins)
            if corr:
                out = out + coeff * corr
        return out

    def normal_ordered(self, keys: Sequence[FieldKey], f: Any, _memo: dict | None = None) -> Any:
        """``:prod_i O_{keys_i}:(f)``, differentiating only ``f``."""
        keys = tuple(sorted(keys))
        if not keys:
            return f
        memo = {} if _memo is None else _memo
        mk = (keys, id(f))
        if mk in memo:
            return memo[mk][1]
        first, rest = keys[0], keys[1:]
        out: Any = DiffPoly()
        idx = list(range(len(rest)))
        seen_blocks: set[tuple[tuple[FieldKey, ...], tuple[FieldKey, ...]]] = set()
        for size in range(len(rest) + 1):
            for chosen in _combinations(idx, size):
                block = (first,) + tuple(rest[i] for i in chosen)
                remaining = tuple(rest[i] for i in idx if i not in chosen)
                # identical field labels give identical terms; count them once with multiplicity
                sig = (tuple(sorted(block)), remaining)
                if sig in seen_blocks:
                    continue
                seen_blocks.add(sig)
                mult = _multiplicity(rest, chosen)
                for var in _jet_vars(f):
                    w = self.block_coefficient(block, var.alpha, var.order)
                    if not w:
                        continue
                    d = f.partial(tuple(var))
                    if isinstance(d, DiffPoly) and d.is_zero():
                        continue
                    inner = self.normal_ordered(remaining, d, memo)
                    if isinstance(inner, DiffPoly) and inner.is_zero():
                        continue
                    out = add_jet_functions(out, inner * w.scale(mult))
        memo[mk] = (f, out)
        return out

    # tree operators ---------------------------------------------------------------
    def tree_terms(self, pairs: Sequence[tuple[int, int]]) -> dict[tuple[FieldKey, ...], DiffPoly]:
        """Expand ``O_{{alpha_1,a_1;...}}`` as ``sum_R K_R :prod_{k in R} O_k:``."""
        pairs = [(int(a), int(x)) for a, x in pairs]
        n = len(pairs)
        alphas = [a for a, _ in pairs]
        avals = [x for _, x in pairs]
        chi = sum(avals)
        acc: dict[tuple[FieldKey, ...], DiffPoly] = defaultdict(DiffPoly)
        for tree in enumerate_trees(n):
            for q in enumerate_q(tree, chi):
                c = tree_coefficient(tree, q, avals)
                if not c:
                    continue
                for keys, scal in self._expand_root(tree, q, alphas):
                    acc[keys] = acc[keys] + scal.scale(c)
        return {k: x for k, x in acc.items() if not x.is_zero()}

    def _expand_half_edge(self, tree: RootedTree, q, alphas, h) -> list[tuple[DiffPoly, FieldKey]]:
        kind, x = h
        if kind == "leg":
            return [(DiffPoly.const(1), (alphas[x - 1], q[h]))]
        # edge into vertex x: sum over the index on the edge with eta^{eps delta}
        child_choices = [self._expand_half_edge(tree, q, alphas, hh) for hh in tree.h_plus_at(x)]
        vec: dict[int, DiffPoly] = defaultdict(DiffPoly)
        for combo in product(*child_choices):
            scal = DiffPoly.const(1)
            for s, _ in combo:
                scal = scal * s
            keys = tuple(k for _, k in combo)
            for delta in self.model.indices():
                vf = self.vertex_factor(keys, delta)
                if not vf:
                    continue
                for eps in self.model.indices():
                    e = self.model.eta_inv[eps - 1][delta - 1]
                    if e:
                        vec[eps] = vec[eps] + (scal * vf).scale(e)
        return [(val, (eps, q[h])) for eps, val in sorted(vec.items()) if not val.is_zero()]

    def _expand_root(self, tree: RootedTree, q, alphas) -> list[tuple[tuple[FieldKey, ...], DiffPoly]]:
        choices = [self._expand_half_edge(tree, q, alphas, h) for h in tree.h_plus_at(0)]
        out = []
        for combo in product(*choices):
            scal = DiffPoly.const(1)
            for s, _ in combo:
                scal = scal * s
            out.append((tuple(sorted(k for _, k in combo)), scal))
        return out

    def tree_action(self, pairs: Sequence[tuple[int, int]], f: Any) -> Any:
        if not pairs:
            return f
        terms = self.tree_terms(tuple(pairs))
        memo: dict = {}
        out: Any = DiffPoly()
        for keys, k in sorted(terms.items()):
            val = self.normal_ordered(keys, f, memo)
            if isinstance(val, DiffPoly) and val.is_zero():
                continue
            out = add_jet_functions(out, val * k)
        return out


def _combinations(idx, size):
    from itertools import combinations

    return combinations(idx, size)


def _multiplicity(rest: tuple[FieldKey, ...], chosen: tuple[int, ...]) -> int:
    """How many index subsets of ``rest`` pick the same multiset as ``chosen``."""
    from collections import Counter
    from math import comb

    total = Counter(rest)
    pick = Counter(rest[i] for i in chosen)
    out = 1
    for k, m in pick.items():
        out *= comb(total[k], m)
    return out


_ENGINES: dict[int, OperatorEngine] = {}
_ENGINES_LOCK = threading.Lock()


def engine_for(model: FrobeniusModel) -> OperatorEngine:
    with _ENGINES_LOCK:
        eng = _ENGINES.get(id(model))
        if eng is None or eng.model is not model:
            eng = OperatorEngine(model)
            _ENGINES[id(model)] = eng
        return eng


def ex_operator_action(model: FrobeniusModel, alpha: int, p: int, target: Any) -> Any:
    """Eguchi-Xiong operator ``O_{alpha,p}`` applied to a jet function."""
    eng = engine_for(model)
    return eng.apply_field(eng.ex_field(alpha, p), target)


def normal_ordered_apply(fields: Sequence[Mapping[tuple[int, int], Any]], target: Any) -> Any:
    """Jet-space normal ordering: ``sum prod xi_i^{A_i} d^m target / dv^{A_1}...dv^{A_m}``.

    Each field is a mapping ``(gamma, s) -> coefficient``; coefficients are
    never differentiated.
    """
    if not fields:
        return target
    first, rest = fields[0], fields[1:]
    out: Any = DiffPoly()
    for var, coeff in sorted(first.items()):
        coeff = DiffPoly._coerce(coeff)
        if coeff.is_zero():
            continue
        d = target.partial(tuple(var))
        if isinstance(d, DiffPoly) and d.is_zero():
            continue
        inner = normal_ordered_apply(rest, d)
        out = add_jet_functions(out, inner * coeff)
    return out


def tree_operator_action(model: FrobeniusModel, pairs: Sequence[tuple[int, int]], target: Any) -> Any:
    """``O_{{alpha_1,a_1;...;alpha_n,a_n}}`` applied to a jet function."""
    return engine_for(model).tree_action(pairs, target)


def tree_operator_terms(model: FrobeniusModel, pairs: Sequence[tuple[int, int]]):
    return engine_for(model).tree_terms(pairs)


def a_operator_action(
    model: FrobeniusModel, ms: Sequence[int], ps: Sequence[tuple[int, int]], target: Any
) -> Any:
    """Composition ``A^{m_1}_{alpha_1,p_1} o ... o A^{m_l}_{alpha_l,p_l}`` applied to ``target``."""
    if len(ms) != len(ps):
        raise ValueError("one m per (alpha, p) pair is required")
    for m, (_, p) in zip(ms, ps):
        if m < 0 or p < m + 1:
            raise ValueError(f"A^{m} needs p >= m + 1, got p = {p}")
    eng = engine_for(model)
    out = target
    for m, (alpha, p) in reversed(list(zip(ms, ps))):
        out = eng.apply_field(eng.a_field(m, alpha, p), out)
    return out
