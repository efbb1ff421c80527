"""Selmer rank bound for E_k from descent via 3-isogeny.

The descent matrix has one row per prime q | k with q = 1 (mod 3), plus one
row for the cubic character mod 9 when k = +-1 or 0 (mod 9), and one column
per prime p | k.  Off-diagonal entries are cubic residue symbols of the exact
prime powers; the (q, q) entry is fixed by making each row sum to zero.  Then

    rank(E_k) <= #rows + #cols - 2 rank(A) - 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .arith import CubefreeK, F3Matrix, cubic_character_mod9, cubic_residue_symbol, f3_rank

MOD9 = "mod9"


@dataclass(frozen=True)
class DescentMatrix:
    k: CubefreeK
    matrix: F3Matrix

    @property
    def row_labels(self) -> list:
        return self.matrix.row_labels

    @property
    def col_labels(self) -> list:
        return self.matrix.col_labels


@dataclass(frozen=True)
class SelmerBound:
    k: CubefreeK
    rows: int
    cols: int
    matrix_rank: int
    bound: int

    def to_json(self) -> dict:
        return {
            "k": str(self.k.k),
            "rows": self.rows,
            "cols": self.cols,
            "rank": self.matrix_rank,
            "bound": self.bound,
        }


def has_mod9_row(k: int) -> bool:
    return k % 9 in (0, 1, 8)


def build_descent_matrix(
    k: int | CubefreeK,
    symbol: Callable[[int, int], int] = cubic_residue_symbol,
) -> DescentMatrix:
    """Descent matrix for k.  ``symbol`` may be swapped to test other root choices."""
    ck = k if isinstance(k, CubefreeK) else CubefreeK.of(int(k))
    cols = list(ck.factors)
    primes = [p for p, _ in cols]
    rows: list[list[int]] = []
    labels: list = []
    for q in primes:
        if q % 3 != 1:
            continue
        row = [0 if p == q else symbol(p**e, q) for p, e in cols]
        row[primes.index(q)] = -sum(row) % 3
        rows.append(row)
        labels.append(q)
    if has_mod9_row(ck.k):
        row = [0 if p == 3 else cubic_character_mod9(p**e) for p, e in cols]
        if 3 in primes:
            # only reached when 9 | k
            row[primes.index(3)] = -sum(row) % 3
        rows.append(row)
        labels.append(MOD9)
    m = F3Matrix(rows, ncols=len(cols), row_labels=labels, col_labels=cols)
    return DescentMatrix(ck, m)


def selmer_rank_bound(
    k: int | CubefreeK,
    symbol: Callable[[int, int], int] = cubic_residue_symbol,
) -> SelmerBound:
    dm = build_descent_matrix(k, symbol)
    r, c = dm.matrix.shape
    rk = f3_rank(dm.matrix)
    return SelmerBound(dm.k, r, c, rk, max(0, r + c - 2 * rk - 1))
