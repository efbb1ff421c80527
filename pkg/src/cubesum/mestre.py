"""Frobenius traces for the family and the Mestre product score.

For p = 1 (mod 3) the reduction of E_k only depends on the cubic residue
class of k mod p, so three point counts per prime cover every k.  For
p = 2 (mod 3) the curves are supersingular and a_p = 0.
"""

from __future__ import annotations

import math
import os
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .arith import ArithmeticDomainError, CubefreeK, cubic_residue_symbol, is_probable_prime, primes_up_to

CACHE_ENV = "CUBESUM_CACHE"
CACHE_NAME = "ap_table.txt"


@dataclass(frozen=True)
class ApTable:
    p: int
    reps: tuple[int, int, int]       # smallest positive c with symbol 0, 1, 2
    a_by_class: tuple[int, int, int]

    def line(self) -> str:
        parts = [str(self.p)]
        for e in range(3):
            parts += [str(e), str(self.a_by_class[e])]
        return " ".join(parts)


@dataclass(frozen=True)
class MestreScore:
    k: CubefreeK
    x_cut: int
    log_score: float

    @property
    def score(self) -> float:
        return math.exp(self.log_score)

    def to_json(self) -> dict:
        return {"k": str(self.k.k), "x_cut": self.x_cut, "log_score": self.log_score, "score": self.score}


def count_points(p: int, a6: int) -> int:
    """#E(F_p) for Y^2 = X^3 + a6, including the point at infinity (p odd)."""
    xs = np.arange(p, dtype=np.int64)
    squares = np.bincount(xs * xs % p, minlength=p)
    rhs = (xs * xs % p * xs + a6) % p
    return int(squares[rhs].sum()) + 1


def class_representatives(p: int) -> tuple[int, int, int]:
    reps = [0, 0, 0]
    found = 0
    c = 1
    while found < 3:
        e = cubic_residue_symbol(c, p)
        if not reps[e]:
            reps[e] = c
            found += 1
        c += 1
    return tuple(reps)


def build_ap_table(p: int) -> ApTable:
    if p % 3 != 1 or not is_probable_prime(p):
        raise ArithmeticDomainError(f"a_p tables need a prime p = 1 mod 3, got {p}")
    reps = class_representatives(p)
    aps = tuple(p + 1 - count_points(p, -432 * c * c % p) for c in reps)
    return ApTable(p, reps, aps)


class ApCache:
    """a_p tables in memory, mirrored to a plain-text file ``p e0 a0 e1 a1 e2 a2``."""

    def __init__(self, directory: str | os.PathLike | None = None):
        if directory is None:
            directory = os.environ.get(CACHE_ENV)
        self.path = Path(directory) / CACHE_NAME if directory else None
        self._tables: dict[int, tuple[int, int, int]] = {}
        self._lock = threading.Lock()
        self._dirty = False
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self):
        for line in self.path.read_text().splitlines():
            parts = line.split()
            if len(parts) != 7:
                continue
            p = int(parts[0])
            vals = {int(parts[i]): int(parts[i + 1]) for i in (1, 3, 5)}
            self._tables[p] = (vals[0], vals[1], vals[2])

    def get(self, p: int) -> tuple[int, int, int]:
        t = self._tables.get(p)
        if t is None:
            t = build_ap_table(p).a_by_class
            with self._lock:
                self._tables[p] = t
                self._dirty = True
        return t

    def ensure(self, x_cut: int) -> None:
        for p in primes_up_to(x_cut):
            if p % 3 == 1:
                self.get(p)
        self.flush()

    def flush(self) -> None:
        """Rewrite the cache file atomically (temp file + rename)."""
        if self.path is None or not self._dirty:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            lines = [
                f"{p} 0 {a[0]} 1 {a[1]} 2 {a[2]}" for p, a in sorted(self._tables.items())
            ]
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=".ap_", suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                fh.write("\n".join(lines) + "\n")
            os.replace(tmp, self.path)
            self._dirty = False


_default_cache: ApCache | None = None


def default_cache() -> ApCache:
    global _default_cache
    if _default_cache is None:
        _default_cache = ApCache()
    return _default_cache


def ap(k: int | CubefreeK, p: int, cache: ApCache | None = None) -> int:
    kk = int(k.k if isinstance(k, CubefreeK) else k)
    if (3 * kk) % p == 0:
        raise ArithmeticDomainError(f"E_{kk} has bad reduction at {p}")
    if p % 3 == 2:
        return 0
    table = (cache or default_cache()).get(p)
    return table[cubic_residue_symbol(kk, p)]


def mestre_score(k: int | CubefreeK, x_cut: int, cache: ApCache | None = None) -> MestreScore:
    """Sum of log((p + 1 - a_p)/(p + 1)) over good primes p = 1 (mod 3), p <= x_cut."""
    ck = k if isinstance(k, CubefreeK) else CubefreeK.of(int(k))
    cache = cache or default_cache()
    total = 0.0
    for p in primes_up_to(x_cut):
        if p % 3 != 1 or ck.k % p == 0:
            continue
        a = cache.get(p)[cubic_residue_symbol(ck.k, p)]
        total += math.log((p + 1 - a) / (p + 1))
    return MestreScore(ck, x_cut, total)


def score_curve(k: int | CubefreeK, x_cut: int, step: int = 100,
                cache: ApCache | None = None) -> list[tuple[int, float]]:
    """(x, log-score) samples for plotting score growth against x."""
    ck = k if isinstance(k, CubefreeK) else CubefreeK.of(int(k))
    cache = cache or default_cache()
    out = []
    total = 0.0
    mark = step
    for p in primes_up_to(x_cut):
        while p > mark:
            out.append((mark, total))
            mark += step
        if p % 3 == 1 and ck.k % p:
            a = cache.get(p)[cubic_residue_symbol(ck.k, p)]
            total += math.log((p + 1 - a) / (p + 1))
    while mark <= x_cut:
        out.append((mark, total))
        mark += step
    return out
