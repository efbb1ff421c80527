"""Point search on x^3 + y^3 = k d^3 and xy(x+y) = k d^3 by divisors of x + y.

For coprime x, y the sum a = x + y divides k d^3, and once a and d are fixed
the pair (x, y) is a root pair of t^2 - a t + P with P determined by k, a, d.
So a search over d <= d_max only has to walk divisors of 3 k d^3, which are
assembled from the known factorizations of 3, k and d.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .arith import CubefreeK, factor_product, factorize
from .curves import CurveModel, CurvePoint, Form, UndefinedAtPoint, convert, minimal_model, phi

DEFAULT_A_BUDGET = 10**12

# quadratic residues used as cheap perfect-square pretests
_SQ64 = frozenset(i * i % 64 for i in range(64))
_SQ63 = frozenset(i * i % 63 for i in range(63))


@dataclass(frozen=True)
class SearchTask:
    k: CubefreeK
    d_max: int = 1
    a_budget: int = DEFAULT_A_BUDGET
    local_filter_primes: tuple[int, ...] = (5, 7, 11, 13)
    curve: str = "ek"   # "ek", "ekprime" or "both"

    def __post_init__(self):
        if self.d_max < 1:
            raise ValueError("d_max must be at least 1")
        if self.curve not in ("ek", "ekprime", "both"):
            raise ValueError(f"unknown curve {self.curve!r}")


@dataclass(frozen=True)
class FoundPoint:
    k: int
    x: int
    y: int
    d: int
    curve: str

    def __post_init__(self):
        lhs = self.x**3 + self.y**3 if self.curve == "ek" else self.x * self.y * (self.x + self.y)
        if lhs != self.k * self.d**3:
            raise ValueError(f"({self.x}, {self.y}, {self.d}) is not a solution for k={self.k}")
        if math.gcd(self.x, self.y) != 1:
            raise ValueError("x and y must be coprime")

    @property
    def key(self) -> tuple:
        return (self.curve, self.d, min(self.x, self.y), max(self.x, self.y))

    def cubic_point(self) -> CurvePoint:
        form = Form.CUBIC_EK if self.curve == "ek" else Form.CUBIC_EKPRIME
        return CurveModel.make(self.k, form).point(Fraction(self.x, self.d), Fraction(self.y, self.d))

    def minimal_point(self) -> CurvePoint | None:
        """The point moved to the minimal model of E'_k (through phi for E_k points)."""
        p = self.cubic_point()
        try:
            if self.curve == "ek":
                p = phi(p)
            return convert(p, minimal_model(p.model.k).form)
        except UndefinedAtPoint:
            return None

    def to_json(self) -> dict:
        out = {"curve": self.curve, "x": str(self.x), "y": str(self.y), "d": str(self.d)}
        m = self.minimal_point()
        if m is not None:
            out["minimal"] = m.to_json()
        return out


@dataclass
class SearchReport:
    points: list[FoundPoint] = field(default_factory=list)
    cells: int = 0
    truncated: bool = False

    @property
    def exhaustive(self) -> bool:
        return not self.truncated


def _divisors_from(factors: Sequence[tuple[int, int]]) -> list[int]:
    divs = [1]
    for p, e in factors:
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def divisor_candidates(k: CubefreeK | int, d: int, budget: int | None = None) -> Iterator[int]:
    """Positive divisors of 3 k d^3 in increasing order, capped at ``budget``."""
    ck = k if isinstance(k, CubefreeK) else CubefreeK.of(int(k))
    dfac = factorize(d)
    fac = factor_product([((3, 1),), ck.factors, tuple((p, 3 * e) for p, e in dfac.factors)])
    for a in _divisors_from(fac.factors):
        if budget is not None and a > budget:
            return
        yield a


def _is_square(n: int) -> int | None:
    if n < 0 or n % 64 not in _SQ64 or n % 63 not in _SQ63:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None


def _roots(a: int, prod: int) -> tuple[int, int] | None:
    """Integer roots x <= y of t^2 - a t + prod, if any."""
    disc = a * a - 4 * prod
    s = _is_square(disc)
    if s is None or (a - s) % 2:
        return None
    return (a - s) // 2, (a + s) // 2


def solve_pair(k: int | CubefreeK, a: int, d: int) -> tuple[int, int] | None:
    """Coprime (x, y) with x + y = a and x^3 + y^3 = k d^3, or None.

    Uses x^3 + y^3 = a (a^2 - 3xy).
    """
    kk = int(k.k if isinstance(k, CubefreeK) else k)
    n = kk * d**3
    if a == 0 or n % a:
        return None
    quot = n // a
    if (a * a - quot) % 3:
        return None
    xy = (a * a - quot) // 3
    roots = _roots(a, xy)
    if roots is None or math.gcd(*roots) != 1:
        return None
    return roots


def solve_pair_prime(k: int | CubefreeK, a: int, d: int) -> tuple[int, int] | None:
    """Coprime (x, y) with x + y = a and xy(x + y) = k d^3, or None."""
    kk = int(k.k if isinstance(k, CubefreeK) else k)
    n = kk * d**3
    if a == 0 or n % a:
        return None
    roots = _roots(a, n // a)
    if roots is None or math.gcd(*roots) != 1:
        return None
    return roots


def _has_root_mod(a: int, prod: int, p: int) -> bool:
    a %= p
    prod %= p
    return any((t * t - a * t + prod) % p == 0 for t in range(p))


def local_filter(k: int | CubefreeK, a: int, d: int, primes: Sequence[int] = (),
                 curve: str = "ek") -> bool:
    """False only if the (a, d) cell provably has no solution.

    Checks are all necessary conditions: a | k d^3, integrality of xy (E_k),
    and solvability of t^2 - a t + xy modulo each filter prime.
    """
    if not primes:
        return True
    kk = int(k.k if isinstance(k, CubefreeK) else k)
    n = kk * d**3
    if a == 0 or n % a:
        return False
    if curve == "ek":
        num = a * a - n // a
        if num % 3:
            return False
        prod = num // 3
    else:
        prod = n // a
    return all(_has_root_mod(a, prod, p) for p in primes)


def _search_cell(args) -> tuple[list[FoundPoint], bool, int]:
    task, d = args
    kk = task.k.k
    found: list[FoundPoint] = []
    truncated = False
    cells = 0
    if task.curve in ("ek", "both"):
        for a in divisor_candidates(task.k, d):
            if a > task.a_budget:
                truncated = True
                break
            cells += 1
            if not local_filter(kk, a, d, (3,) + tuple(task.local_filter_primes), "ek"):
                continue
            sol = solve_pair(kk, a, d)
            if sol:
                found.append(FoundPoint(kk, sol[0], sol[1], d, "ek"))
    if task.curve in ("ekprime", "both"):
        for a in divisor_candidates(task.k, d):
            if a > task.a_budget:
                truncated = True
                break
            for signed in (a, -a):
                cells += 1
                if not local_filter(kk, signed, d, task.local_filter_primes, "ekprime"):
                    continue
                sol = solve_pair_prime(kk, signed, d)
                if sol:
                    found.append(FoundPoint(kk, sol[0], sol[1], d, "ekprime"))
    return found, truncated, cells


def search_report(task: SearchTask, jobs: int = 1) -> SearchReport:
    cells = [(task, d) for d in range(1, task.d_max + 1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_search_cell, cells, chunksize=8))
    else:
        results = [_search_cell(c) for c in cells]
    report = SearchReport()
    seen = set()
    for found, truncated, n in results:
        report.truncated |= truncated
        report.cells += n
        for fp in found:
            if fp.key not in seen:
                seen.add(fp.key)
                report.points.append(fp)
    report.points.sort(key=lambda fp: fp.key)
    return report


def search(task: SearchTask, jobs: int = 1) -> list[FoundPoint]:
    """All primitive solutions with d <= d_max and x + y within the budget."""
    return search_report(task, jobs).points
