"""psi-class intersection numbers on the moduli of stable curves.

Values come from the Dijkgraaf-Verlinde-Verlinde recursion, with the string
and dilaton equations used to strip ``tau_0`` and ``tau_1`` first.
"""
from __future__ import annotations

import os
import threading
from itertools import combinations
from pathlib import Path
from typing import Iterable, NamedTuple

from .exact import Rational, double_factorial

__all__ = ["TauSpec", "UnstableError", "IntersectionTable", "intersection_number", "default_table", "CACHE_ENV"]

CACHE_ENV = "DZKDV_CACHE_DIR"
CACHE_FILE = "intersections.txt"


class UnstableError(ValueError):
    """``2g - 2 + n <= 0``: the moduli space is not defined."""


class TauSpec(NamedTuple):
    genus: int
    ks: tuple[int, ...]

    @classmethod
    def make(cls, genus: int, ks: Iterable[int]) -> TauSpec:
        return cls(int(genus), tuple(sorted(int(k) for k in ks)))

    def is_stable(self) -> bool:
        return self.genus >= 0 and 2 * self.genus - 2 + len(self.ks) > 0

    def dimension_ok(self) -> bool:
        return sum(self.ks) == 3 * self.genus - 3 + len(self.ks)


class IntersectionTable:
    """Memo table for ``<tau_{k_1} ... tau_{k_n}>_g``; safe to share between threads."""

    def __init__(self) -> None:
        self._memo: dict[TauSpec, Rational] = {}
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._memo)

    def __call__(self, genus: int, ks: Iterable[int]) -> Rational:
        spec = TauSpec.make(genus, ks)
        if not spec.is_stable():
            raise UnstableError(f"unstable (g, n) = ({spec.genus}, {len(spec.ks)})")
        with self._lock:
            return self._value(spec)

    def _value(self, spec: TauSpec) -> Rational:
        g, ks = spec
        if g < 0 or not spec.is_stable() or any(k < 0 for k in ks) or not spec.dimension_ok():
            return Rational(0)
        hit = self._memo.get(spec)
        if hit is not None:
            return hit
        if spec == (0, (0, 0, 0)):
            out = Rational(1)
        elif spec == (1, (1,)):
            out = Rational(1, 24)
        elif ks[0] == 0:
            # string equation
            rest = ks[1:]
            out = Rational(0)
            for j in range(len(rest)):
                lowered = rest[:j] + (rest[j] - 1,) + rest[j + 1:]
                out += self._value(TauSpec.make(g, lowered))
        elif ks[0] == 1:
            # dilaton equation
            rest = ks[1:]
            out = (2 * g - 2 + len(rest)) * self._value(TauSpec.make(g, rest))
        else:
            out = self._dvv(g, ks[-1] - 1, ks[:-1])
        self._memo[spec] = out
        return out

    def _dvv(self, g: int, k: int, rest: tuple[int, ...]) -> Rational:
        total = Rational(0)
        for j, kj in enumerate(rest):
            others = rest[:j] + rest[j + 1:]
            total += Rational(double_factorial(2 * k + 2 * kj + 1), double_factorial(2 * kj - 1)) * self._value(
                TauSpec.make(g, (k + kj,) + others)
            )
        split = Rational(0)
        idx = range(len(rest))
        for r in range(k):
            s = k - 1 - r
            w = double_factorial(2 * r + 1) * double_factorial(2 * s + 1)
            acc = self._value(TauSpec.make(g - 1, (r, s) + rest))
            for size in range(len(rest) + 1):
                for chosen in combinations(idx, size):
                    left = tuple(rest[i] for i in chosen)
                    right = tuple(rest[i] for i in idx if i not in chosen)
                    for g1 in range(g + 1):
                        a = self._value(TauSpec.make(g1, (r,) + left))
                        if a:
                            acc += a * self._value(TauSpec.make(g - g1, (s,) + right))
            split += w * acc
        total += split / 2
        return total / double_factorial(2 * k + 3)

    # persistence ------------------------------------------------------------
    def load(self, path: str | os.PathLike) -> int:
        """Read ``g k1 ... kn value`` lines; returns the number of entries read."""
        p = Path(path)
        if not p.exists():
            return 0
        count = 0
        with self._lock:
            for line in p.read_text(encoding="utf-8").splitlines():
                fields = line.split()
                if len(fields) < 2 or line.lstrip().startswith("#"):
                    continue
                g, *ks, val = fields
                self._memo[TauSpec.make(int(g), map(int, ks))] = Rational(val)
                count += 1
        return count

    def save(self, path: str | os.PathLike) -> None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            rows = sorted(self._memo.items())
        lines = [" ".join([str(s.genus), *map(str, s.ks), str(val)]) for s, val in rows]
        tmp = p.with_suffix(".tmp")
        tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
        tmp.replace(p)


default_table = IntersectionTable()


def intersection_number(genus: int, ks: Iterable[int]) -> Rational:
    """``<tau_{k_1} ... tau_{k_n}>_g``; zero off the dimension constraint."""
    return default_table(genus, ks)


def cache_path() -> Path | None:
    root = os.environ.get(CACHE_ENV)
    return Path(root) / CACHE_FILE if root else None
