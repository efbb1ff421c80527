"""Integer arithmetic: factorization, cubefree parts, cubic characters, F3 rank.

Everything here is a pure function of its arguments.  The only shared state is
a lazily built smallest-prime-factor table and a few ``lru_cache`` wrappers,
all of which are safe to race on (worst case they are computed twice).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

TRIAL_DIVISION_BOUND = 10**6
RHO_EFFORT = 200_000
SPF_LIMIT = 1 << 20

# Deterministic for n < 3.3e24 (Sorenson & Webster); above that it is a
# strong probable-prime test.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class ArithmeticDomainError(ValueError):
    """Argument outside the domain of an arithmetic function."""


class IncompleteFactorization(ArithmeticError):
    """A composite cofactor resisted splitting within the effort bound."""

    def __init__(self, n: int, cofactor: int, partial: list[tuple[int, int]]):
        super().__init__(f"could not split cofactor {cofactor} of {n}")
        self.n = n
        self.cofactor = cofactor
        self.partial = partial


@dataclass(frozen=True)
class FactoredInteger:
    value: int
    factors: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"bad factor list {self.factors}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors {self.factors} do not multiply to {self.value}")

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def __iter__(self):
        return iter(self.factors)


@dataclass(frozen=True)
class CubefreeK:
    """Positive cubefree integer with its factorization (exponents 1 or 2)."""

    k: int
    factors: tuple[tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        if self.k < 1:
            raise ArithmeticDomainError(f"k must be positive, got {self.k}")
        prod = 1
        last = 1
        for p, e in self.factors:
            if e not in (1, 2) or p <= last:
                raise ArithmeticDomainError(f"not a cubefree factorization: {self.factors}")
            last = p
            prod *= p**e
        if prod != self.k:
            raise ArithmeticDomainError(f"factors {self.factors} do not multiply to {self.k}")

    @classmethod
    def of(cls, k: int) -> "CubefreeK":
        fac = factorize(k)
        return cls(k, fac.factors)

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def __int__(self):
        return self.k


# ---------------------------------------------------------------------------
# primes and primality


@lru_cache(maxsize=None)
def _spf_table() -> np.ndarray:
    spf = np.zeros(SPF_LIMIT + 1, dtype=np.int32)
    for p in range(2, math.isqrt(SPF_LIMIT) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    return spf


@lru_cache(maxsize=None)
def primes_up_to(n: int) -> tuple[int, ...]:
    if n < 2:
        return ()
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(sieve)[0])


def is_probable_prime(n: int) -> bool:
    """Strong probable-prime test against a fixed witness set."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, seed: int, effort: int) -> int | None:
    """One Pollard-Brent run with c = seed; returns a nontrivial factor or None."""
    y, c, m = 2, seed, 128
    g = r = q = 1
    steps = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r *= 2
        steps += r
        if steps > effort:
            return None
    if g == n:
        while True:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
            if g > 1:
                break
    return g if g != n else None


def _split_large(n: int, effort: int) -> list[int] | None:
    """Prime factors (with repetition) of n with no factor below the trial bound."""
    if is_probable_prime(n):
        return [n]
    r = math.isqrt(n)
    if r * r == n:
        sub = _split_large(r, effort)
        return None if sub is None else sub + sub
    for seed in range(1, 21):
        d = _brent_rho(n, seed, effort)
        if d is not None:
            a = _split_large(d, effort)
            b = _split_large(n // d, effort)
            if a is None or b is None:
                return None
            return a + b
    return None


def _collect(primes: Iterable[int]) -> tuple[tuple[int, int], ...]:
    counts: dict[int, int] = {}
    for p in primes:
        counts[p] = counts.get(p, 0) + 1
    return tuple(sorted(counts.items()))


@lru_cache(maxsize=1 << 16)
def factorize(n: int, effort: int = RHO_EFFORT) -> FactoredInteger:
    """Exact factorization of a positive integer.

    Small n go through a smallest-prime-factor table; larger n are trial
    divided up to ``TRIAL_DIVISION_BOUND`` (stopping early once the cofactor is
    a probable prime) and finished with Pollard-Brent rho.  Raises
    ``IncompleteFactorization`` when a composite survives ``effort`` rho steps.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise ArithmeticDomainError(f"factorize expects an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise ArithmeticDomainError(f"factorize expects n >= 1, got {n}")
    out: list[int] = []
    m = n
    if m <= SPF_LIMIT:
        spf = _spf_table()
        while m > 1:
            p = int(spf[m])
            out.append(p)
            m //= p
        return FactoredInteger(n, _collect(out))

    checked_prime = False
    for p in primes_up_to(TRIAL_DIVISION_BOUND):
        if p * p > m:
            break
        if m % p == 0:
            while m % p == 0:
                out.append(p)
                m //= p
            checked_prime = False
        if p == 997 and not checked_prime:
            # cheap early exit for a large prime cofactor
            if is_probable_prime(m):
                break
            checked_prime = True
    if m > 1:
        if m < TRIAL_DIVISION_BOUND**2 or is_probable_prime(m):
            out.append(m)
        else:
            rest = _split_large(m, effort)
            if rest is None:
                raise IncompleteFactorization(n, m, list(_collect(out)))
            out.extend(rest)
    return FactoredInteger(n, _collect(out))


def factor_product(parts: Sequence[FactoredInteger | tuple]) -> FactoredInteger:
    """Combine factorizations of the factors of a product."""
    counts: dict[int, int] = {}
    value = 1
    for part in parts:
        factors = part.factors if isinstance(part, FactoredInteger) else part
        for p, e in factors:
            counts[p] = counts.get(p, 0) + e
            value *= p**e
    return FactoredInteger(value, tuple(sorted(counts.items())))


def cubefree_from_factors(factors: Iterable[tuple[int, int]]) -> tuple[CubefreeK, int]:
    """Split a factored positive integer as k * d^3 with k cubefree."""
    kf = []
    k = d = 1
    for p, e in factors:
        q, r = divmod(e, 3)
        d *= p**q
        if r:
            kf.append((p, r))
            k *= p**r
    return CubefreeK(k, tuple(kf)), d


def cubefree_part(n: int) -> tuple[CubefreeK, int, int]:
    """Return (k, d, sign) with |n| = k * d^3 and k cubefree."""
    if n == 0:
        raise ArithmeticDomainError("cubefree part of 0 is undefined")
    k, d = cubefree_from_factors(factorize(abs(n)).factors)
    return k, d, 1 if n > 0 else -1


def integer_cube_root(n: int) -> int | None:
    """Exact integer cube root, or None."""
    if n < 0:
        r = integer_cube_root(-n)
        return None if r is None else -r
    if n < 2:
        return n
    r = int(round(n ** (1.0 / 3))) if n < 1 << 60 else _icbrt(n)
    for c in (r - 1, r, r + 1):
        if c**3 == n:
            return c
    return None


def _icbrt(n: int) -> int:
    x = 1 << ((n.bit_length() + 2) // 3)
    while True:
        y = (2 * x + n // (x * x)) // 3
        if y >= x:
            return x
        x = y


# ---------------------------------------------------------------------------
# cubic characters


@lru_cache(maxsize=None)
def primitive_root(q: int) -> int:
    """Smallest primitive root modulo a prime q."""
    if q == 2:
        return 1
    fac = factorize(q - 1).primes
    for g in range(2, q):
        if all(pow(g, (q - 1) // f, q) != 1 for f in fac):
            return g
    raise ArithmeticDomainError(f"{q} has no primitive root")


@lru_cache(maxsize=None)
def cube_root_of_unity(q: int) -> int:
    """The fixed primitive cube root of unity g^((q-1)/3) mod q."""
    if q % 3 != 1 or not is_probable_prime(q):
        raise ArithmeticDomainError(f"need a prime q = 1 mod 3, got {q}")
    return pow(primitive_root(q), (q - 1) // 3, q)


def cubic_residue_symbol(a: int, q: int) -> int:
    """Exponent e in F3 with a^((q-1)/3) = rho^e (mod q)."""
    rho = cube_root_of_unity(q)
    if a % q == 0:
        raise ArithmeticDomainError(f"{q} divides {a}")
    v = pow(a, (q - 1) // 3, q)
    if v == 1:
        return 0
    if v == rho:
        return 1
    if v == rho * rho % q:
        return 2
    raise AssertionError(f"{a}^((q-1)/3) mod {q} is not a cube root of unity")


# units mod 9 are cyclic of order 6 generated by 2; chi(2^j) = j mod 3
_CHI9 = {1: 0, 2: 1, 4: 2, 8: 0, 7: 1, 5: 2}


def cubic_character_mod9(a: int) -> int:
    """Cubic character on (Z/9)^*, normalized by chi(2) = 1."""
    if a % 3 == 0:
        raise ArithmeticDomainError(f"3 divides {a}")
    return _CHI9[a % 9]


# ---------------------------------------------------------------------------
# F3 linear algebra


@dataclass
class F3Matrix:
    entries: list[list[int]]
    ncols: int = -1
    row_labels: list = field(default_factory=list)
    col_labels: list = field(default_factory=list)

    def __post_init__(self):
        self.entries = [[int(v) % 3 for v in row] for row in self.entries]
        if self.ncols < 0:
            self.ncols = len(self.entries[0]) if self.entries else len(self.col_labels)
        if any(len(row) != self.ncols for row in self.entries):
            raise ValueError("ragged F3 matrix")

    @property
    def nrows(self) -> int:
        return len(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def rank(self) -> int:
        return f3_rank(self)


def f3_rank(m: F3Matrix | Sequence[Sequence[int]]) -> int:
    """Rank over F3 by Gauss-Jordan elimination; the input is left untouched."""
    rows = m.entries if isinstance(m, F3Matrix) else m
    work = [[v % 3 for v in row] for row in rows]
    if not work:
        return 0
    ncols = len(work[0])
    rank = 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        lead = work[rank][c]  # 1 and 2 are their own inverses mod 3
        pivot_row = [v * lead % 3 for v in work[rank]]
        work[rank] = pivot_row
        for i in range(len(work)):
            if i != rank and work[i][c]:
                f = work[i][c]
                work[i] = [(a - f * b) % 3 for a, b in zip(work[i], pivot_row)]
        rank += 1
        if rank == len(work):
            break
    return rank
