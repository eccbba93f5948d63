"""Frobenius manifolds with polynomial potential and their genus-0 data on jets.

The calibration is the one with no constant (and, beyond ``p = 0``, no
linear) terms in the deformed flat coordinates ``theta_{alpha,p}``.  From it
we get the two-point functions ``Omega``, the Principal Hierarchy flows, and
every genus-0 correlator as a differential polynomial.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .diffpoly import DiffFrac, DiffPoly, LogDet, v
from .exact import Rational, solve_linear_exact
from .potential import parse_potential_text

__all__ = [
    "ModelError",
    "WDVVResult",
    "FlowField",
    "FrobeniusModel",
    "parse_potential",
    "load_model",
    "bundled_model",
    "add_jet_functions",
]

Insertion = tuple[int, int]


class ModelError(ValueError):
    """The potential does not define a Frobenius manifold we can work with."""


@dataclass(frozen=True)
class WDVVResult:
    ok: bool
    witness: tuple[int, int, int, int] | None = None

    def __bool__(self) -> bool:
        return self.ok


def _degree(mono) -> int:
    return sum(e for _, e in mono)


def add_jet_functions(a: Any, b: Any) -> Any:
    """Sum that also works for DiffPoly + DiffFrac in either order."""
    if isinstance(a, DiffPoly) and a.is_zero():
        return b
    if isinstance(b, DiffPoly) and b.is_zero():
        return a
    if isinstance(a, DiffFrac) or isinstance(b, DiffFrac):
        return DiffFrac._coerce(a) + DiffFrac._coerce(b)
    return a + b


def jet_partial(f: Any, var: tuple[int, int]) -> Any:
    return f.partial(var)


class FlowField:
    """Principal Hierarchy flow ``D_{beta,q}`` as a jet vector field.

    ``coefficient(gamma, s) = dx^{s+1}(eta^{gamma mu} d_mu theta_{beta,q+1})``.
    """

    def __init__(self, model: FrobeniusModel, beta: int, q: int):
        self.model = model
        self.beta = beta
        self.q = q
        self._coeffs: dict[tuple[int, int], DiffPoly] = {}
        self._lock = threading.Lock()

    def coefficient(self, gamma: int, s: int) -> DiffPoly:
        key = (gamma, s)
        hit = self._coeffs.get(key)
        if hit is not None:
            return hit
        if s == 0:
            base = DiffPoly()
            th = self.model.theta(self.beta, self.q + 1)
            for mu in range(1, self.model.N + 1):
                e = self.model.eta_inv[gamma - 1][mu - 1]
                if e:
                    base = base + th.partial((mu, 0)).scale(e)
            out = base.dx()
        else:
            out = self.coefficient(gamma, s - 1).dx()
        with self._lock:
            self._coeffs[key] = out
        return out

    def __call__(self, f: Any) -> Any:
        return self.apply(f)

    def apply(self, f: Any) -> Any:
        out: Any = DiffPoly()
        for var in sorted(f.variables()):
            c = self.coefficient(var.alpha, var.order)
            if c:
                out = add_jet_functions(out, f.partial(tuple(var)) * c)
        return out


class FrobeniusModel:
    """Frobenius manifold given by a polynomial potential in ``v1..vN``.

    The unit vector field is ``d/dv^1``.  Caches (theta, Omega, flows,
    correlators) are per instance and guarded by a lock.
    """

    def __init__(self, N: int, potential: DiffPoly, *, validate: bool = True, name: str | None = None):
        if N < 1:
            raise ModelError("dimension must be positive")
        for var in potential.variables():
            if var.order != 0 or not 1 <= var.alpha <= N:
                raise ModelError(f"potential uses {var}, expected v1..v{N}")
        self.N = N
        self.name = name
        self.potential = potential
        self._lock = threading.RLock()
        self._third: dict[tuple[int, int, int], DiffPoly] = {}
        self._theta: dict[tuple[int, int], DiffPoly] = {}
        self._omega: dict[tuple[int, int, int, int], DiffPoly] = {}
        self._flows: dict[tuple[int, int], FlowField] = {}
        self._corr: dict[tuple[Insertion, ...], DiffPoly] = {}

        eta = [[self.c_lower(1, a, b) for b in range(1, N + 1)] for a in range(1, N + 1)]
        if validate:
            for row in eta:
                for x in row:
                    if not x.is_constant():
                        raise ModelError("eta not constant")
        # without validation only the constant part is kept
        self.eta = [[x.constant_value() for x in row] for row in eta]
        self.eta_inv = self._invert(self.eta)
        if validate:
            res = self.wdvv_check()
            if not res.ok:
                raise ModelError(f"WDVV violated at (alpha, beta, gamma, delta) = {res.witness}")

    @staticmethod
    def _invert(m: list[list[Rational]]) -> list[list[Rational]]:
        n = len(m)
        cols = []
        for j in range(n):
            e = [Rational(int(i == j)) for i in range(n)]
            sol = solve_linear_exact(m, e)
            if sol.status != "unique":
                raise ModelError("eta singular")
            cols.append(sol.solution)
        return [[cols[j][i] for j in range(n)] for i in range(n)]

    def __repr__(self) -> str:
        return f"FrobeniusModel(N={self.N}, F={self.potential})"

    # structure constants ------------------------------------------------------
    def c_lower(self, a: int, b: int, c: int) -> DiffPoly:
        key = tuple(sorted((a, b, c)))
        hit = self._third.get(key)
        if hit is None:
            hit = self.potential.partial((key[0], 0)).partial((key[1], 0)).partial((key[2], 0))
            self._third[key] = hit
        return hit

    def c_upper(self, g: int, a: int, b: int) -> DiffPoly:
        """``c^g_{ab} = eta^{g mu} c_{mu a b}``."""
        out = DiffPoly()
        for mu in range(1, self.N + 1):
            e = self.eta_inv[g - 1][mu - 1]
            if e:
                out = out + self.c_lower(mu, a, b).scale(e)
        return out

    def indices(self) -> range:
        return range(1, self.N + 1)

    def wdvv_check(self) -> WDVVResult:
        """``c_{ab mu} eta^{mu nu} c_{nu g d}`` must be symmetric under ``b <-> g``."""
        idx = self.indices()

        def assoc(a, b, g, d):
            out = DiffPoly()
            for mu in idx:
                for nu in idx:
                    e = self.eta_inv[mu - 1][nu - 1]
                    if e:
                        out = out + (self.c_lower(a, b, mu) * self.c_lower(nu, g, d)).scale(e)
            return out

        for a in idx:
            for b in idx:
                for g in idx:
                    if g <= b:
                        continue
                    for d in idx:
                        if assoc(a, b, g, d) != assoc(a, g, b, d):
                            return WDVVResult(False, (a, b, g, d))
        return WDVVResult(True)

    def genus_one_logdet(self) -> LogDet:
        """``(1/24) log det(c_{alpha beta gamma} v^{gamma,1})`` (G-function omitted)."""
        mat = []
        for a in self.indices():
            row = []
            for b in self.indices():
                entry = DiffPoly()
                for g in self.indices():
                    entry = entry + self.c_lower(a, b, g) * v(g, 1)
                row.append(entry)
            mat.append(row)
        return LogDet(Rational(1, 24), mat)

    # calibration ------------------------------------------------------------
    def theta(self, alpha: int, p: int) -> DiffPoly:
        """Deformed flat coordinate ``theta_{alpha,p}(v)``."""
        if p < 0:
            raise ValueError("p must be nonnegative")
        key = (alpha, p)
        hit = self._theta.get(key)
        if hit is not None:
            return hit
        with self._lock:
            if p == 0:
                out = DiffPoly()
                for mu in self.indices():
                    e = self.eta[alpha - 1][mu - 1]
                    if e:
                        out = out + v(mu, 0).scale(e)
            else:
                out = self._integrate_theta(alpha, p)
            self._theta[key] = out
            return out

    def _theta_hessian(self, alpha: int, p: int) -> dict[tuple[int, int], DiffPoly]:
        prev = self.theta(alpha, p - 1)
        grads = {g: prev.partial((g, 0)) for g in self.indices()}
        hess = {}
        for mu in self.indices():
            for nu in self.indices():
                if nu < mu:
                    hess[(mu, nu)] = hess[(nu, mu)]
                    continue
                out = DiffPoly()
                for g in self.indices():
                    if grads[g]:
                        out = out + self.c_upper(g, mu, nu) * grads[g]
                hess[(mu, nu)] = out
        return hess

    def _integrate_theta(self, alpha: int, p: int) -> DiffPoly:
        hess = self._theta_hessian(alpha, p)
        # Euler: the degree-d part P_d of theta has v^mu v^nu d_mu d_nu P_d = d(d-1) P_d
        q = DiffPoly()
        for (mu, nu), h in hess.items():
            q = q + v(mu, 0) * v(nu, 0) * h
        terms = {mono: c / ((_degree(mono)) * (_degree(mono) - 1)) for mono, c in q.items()}
        out = DiffPoly(terms)
        for (mu, nu), h in hess.items():
            if out.partial((mu, 0)).partial((nu, 0)) != h:
                raise ModelError(f"theta_{{{alpha},{p}}} Hessian not integrable at ({mu},{nu})")
        return out

    def omega(self, alpha: int, p: int, beta: int, q: int) -> DiffPoly:
        """Two-point function ``<<tau_{alpha,p} tau_{beta,q}>>`` as a polynomial in v."""
        if p < 0 or q < 0:
            raise ValueError("descendant indices must be nonnegative")
        if (alpha, p) > (beta, q):
            alpha, p, beta, q = beta, q, alpha, p
        key = (alpha, p, beta, q)
        hit = self._omega.get(key)
        if hit is not None:
            return hit
        with self._lock:
            if p == 0:
                out = self.theta(beta, q + 1).partial((alpha, 0))
            else:
                out = DiffPoly()
                ta = self.theta(alpha, p)
                tb = self.theta(beta, q + 1)
                for mu in self.indices():
                    for nu in self.indices():
                        e = self.eta_inv[mu - 1][nu - 1]
                        if e:
                            out = out + (ta.partial((mu, 0)) * tb.partial((nu, 0))).scale(e)
                out = out - self._omega_raw(alpha, p - 1, beta, q + 1)
            self._omega[key] = out
            return out

    def _omega_raw(self, alpha: int, p: int, beta: int, q: int) -> DiffPoly:
        # recursion must not reorder its own arguments
        key = (alpha, p, beta, q)
        hit = self._omega.get(key)
        if hit is not None and (alpha, p) <= (beta, q):
            return hit
        if p == 0:
            return self.theta(beta, q + 1).partial((alpha, 0))
        out = DiffPoly()
        ta = self.theta(alpha, p)
        tb = self.theta(beta, q + 1)
        for mu in self.indices():
            for nu in self.indices():
                e = self.eta_inv[mu - 1][nu - 1]
                if e:
                    out = out + (ta.partial((mu, 0)) * tb.partial((nu, 0))).scale(e)
        return out - self._omega_raw(alpha, p - 1, beta, q + 1)

    def omega_up(self, gamma: int, beta: int, q: int) -> DiffPoly:
        """``<<tau^gamma_0 tau_{beta,q}>> = eta^{gamma mu} Omega_{mu,0;beta,q}``."""
        out = DiffPoly()
        for mu in self.indices():
            e = self.eta_inv[gamma - 1][mu - 1]
            if e:
                out = out + self.omega(mu, 0, beta, q).scale(e)
        return out

    # flows and correlators ----------------------------------------------------
    def flow_field(self, beta: int, q: int) -> FlowField:
        key = (beta, q)
        with self._lock:
            f = self._flows.get(key)
            if f is None:
                f = FlowField(self, beta, q)
                self._flows[key] = f
            return f

    def correlator(self, insertions: Iterable[Sequence[int]]) -> DiffPoly:
        """Genus-0 correlator ``<<tau_{a1,p1} ... tau_{an,pn}>>`` on the jet space."""
        ins = tuple(sorted((int(a), int(p)) for a, p in insertions))
        if not ins:
            raise ValueError("at least one insertion is required")
        for a, p in ins:
            if not 1 <= a <= self.N or p < 0:
                raise ValueError(f"bad insertion ({a},{p})")
        return self._correlator(ins)

    def _correlator(self, ins: tuple[Insertion, ...]) -> DiffPoly:
        hit = self._corr.get(ins)
        if hit is not None:
            return hit
        if len(ins) == 1:
            (a, p), = ins
            out = self.theta(a, p + 1)
        elif len(ins) == 2:
            (a, p), (b, q) = ins
            out = self.omega(a, p, b, q)
        else:
            if (1, 0) in ins:
                i = ins.index((1, 0))
                out = self._correlator(ins[:i] + ins[i + 1:]).dx()
            else:
                last = ins[-1]
                out = self.flow_field(*last).apply(self._correlator(ins[:-1]))
        with self._lock:
            self._corr[ins] = out
        return out

    def correlator_up(self, gamma: int, insertions: Iterable[Sequence[int]]) -> DiffPoly:
        """Correlator with one raised insertion ``tau^gamma_0``."""
        ins = list(insertions)
        out = DiffPoly()
        for mu in self.indices():
            e = self.eta_inv[gamma - 1][mu - 1]
            if e:
                out = out + self.correlator(ins + [(mu, 0)]).scale(e)
        return out

    def three_point_up(self, a: Insertion, b: int, g_up: int) -> DiffPoly:
        """``<<tau_a tau_{b,0} tau^{g_up}_0>>``."""
        return self.correlator_up(g_up, [a, (b, 0)])


def parse_potential(text: str, *, validate: bool = True) -> FrobeniusModel:
    """Build a validated model from model-file text (see :mod:`dzkdv.potential`)."""
    parsed = parse_potential_text(text)
    return FrobeniusModel(parsed.N, parsed.F, validate=validate)


def load_model(path: str | Path, *, validate: bool = True) -> FrobeniusModel:
    p = Path(path)
    model = parse_potential(p.read_text(encoding="utf-8"), validate=validate)
    model.name = p.stem
    return model


_MODELS_DIR = Path(__file__).parent / "models"


def bundled_model(name: str) -> FrobeniusModel:
    """One of the shipped models: ``point``, ``a2`` or ``a3``."""
    return load_model(_MODELS_DIR / f"{name}.frob")


