"""Enumerate cubefree k with a large Selmer bound by pruned depth-first search.

k is built up one prime at a time in increasing order.  At every node the
descent-matrix entries that can no longer change (off-diagonal symbols
between chosen primes) give a lower bound on rank(A); together with the most
rows and columns the remaining budget could still add, that caps the Selmer
bound of every k below the node, and the subtree is dropped when the cap
falls short of the target.

Paths (tuples of (p, e)) double as checkpoint tokens: the DFS visits nodes in
lexicographic path order, so "resume after path P" means "visit every node
whose path sorts after P".
"""

from __future__ import annotations

import bisect
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .arith import CubefreeK, cubic_residue_symbol, f3_rank, primes_up_to
from .curves import conductor
from .descent import selmer_rank_bound

MAX_K = "max_k"
MAX_CONDUCTOR = "max_conductor"

Path = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class EnumState:
    chosen: Path
    budget: int
    measure: str = MAX_K
    target: int = 0

    @property
    def product(self) -> int:
        k = 1
        for p, e in self.chosen:
            k *= p**e
        return k

    @property
    def last_prime(self) -> int:
        return self.chosen[-1][0] if self.chosen else 1

    def measure_value(self) -> int:
        """Current k, or a lower bound for the conductor of any completion."""
        if self.measure == MAX_K:
            return self.product
        n = 9
        for p, _ in self.chosen:
            n *= 27 if p == 3 else p * p
        return n


@lru_cache(maxsize=1 << 20)
def _symbol(pe: int, q: int) -> int:
    return cubic_residue_symbol(pe, q)


def _fixed_block(rows: list[int], cols: list[tuple[int, int]]) -> list[list[int]]:
    return [[_symbol(p**e, q) for p, e in cols] for q in rows]


def partial_rank_lower_bound(state: EnumState) -> int:
    return _plb(state.chosen)


@lru_cache(maxsize=1 << 16)
def _plb(chosen: Path) -> int:
    """Rank of a block of already-final descent-matrix entries.

    Rows are chosen primes q = 1 (mod 3); a row's own column holds the
    undetermined diagonal entry, so a block may only pair rows with columns
    of other primes.  Every such block is a submatrix of A for any
    completion, hence its rank bounds rank(A) from below.  The best of a few
    blocks is returned (all of them when there are at most four rows).
    """
    qs = [p for p, _ in chosen if p % 3 == 1]
    if not qs:
        return 0
    cols = list(chosen)
    best = 0
    if len(qs) <= 4:
        subsets = itertools.chain.from_iterable(
            itertools.combinations(qs, n) for n in range(1, len(qs) + 1)
        )
    else:
        subsets = [tuple(qs)] + [tuple(q for q in qs if q != drop) for drop in qs]
    for rows in subsets:
        rowset = set(rows)
        block_cols = [(p, e) for p, e in cols if p not in rowset]
        if not block_cols:
            continue
        r = f3_rank(_fixed_block(list(rows), block_cols))
        best = max(best, r)
        if best == min(len(qs), len(cols)):
            break
    return best


@lru_cache(maxsize=8)
def _prime_pools(limit: int) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    ps = primes_up_to(limit)
    return tuple(p for p in ps if p % 3 == 1), tuple(p for p in ps if p % 3 != 1), ps


def _pool_limit(budget: int, measure: str) -> int:
    if measure == MAX_K:
        return max(2, budget)
    from math import isqrt

    return max(2, isqrt(budget // 9) + 1)


def _cost(p: int, measure: str) -> int:
    if measure == MAX_K:
        return p
    return 27 if p == 3 else p * p


def _max_gain(state: EnumState, room: int | None = None) -> int:
    """Most rows + columns the remaining budget can still add."""
    if room is None:
        room = state.budget // state.measure_value()
    ones, others, _ = _prime_pools(_pool_limit(state.budget, state.measure))
    start = state.last_prime
    ones = ones[bisect.bisect_right(ones, start):]
    others = others[bisect.bisect_right(others, start):]
    best = 0
    spent = 1
    j = 0
    while True:
        left = room // spent
        b = 0
        used = 1
        for p in others:
            c = _cost(p, state.measure)
            if used * c > left:
                break
            used *= c
            b += 1
        best = max(best, 2 * j + b)
        if j >= len(ones):
            break
        spent *= _cost(ones[j], state.measure)
        if spent > room:
            break
        j += 1
    return best


def _mod9_possible(state: EnumState) -> bool:
    # 3 || k forces k = +-3 (mod 9) and kills the extra row
    return not any(p == 3 and e == 1 for p, e in state.chosen)


def best_case_bound(state: EnumState) -> int:
    """Largest Selmer bound any completion of ``state`` could reach."""
    if state.measure_value() > state.budget:
        return -1
    rows = sum(1 for p, _ in state.chosen if p % 3 == 1)
    cols = len(state.chosen)
    extra = _max_gain(state) + (1 if _mod9_possible(state) else 0)
    return rows + cols + extra - 2 * partial_rank_lower_bound(state) - 1


def _within(k: CubefreeK, budget: int, measure: str) -> bool:
    if measure == MAX_K:
        return k.k <= budget
    return conductor(k).value <= budget


def _children(state: EnumState, prune: bool = False) -> Iterator[tuple[int, int]]:
    """Extensions of ``state`` by one larger prime, in increasing order.

    With ``prune``, stop at the first prime whose child cannot reach the
    target even optimistically: the child's budget room and prime pool only
    shrink as p grows, so no later child can do better.
    """
    _, _, pool = _prime_pools(_pool_limit(state.budget, state.measure))
    room = state.budget // state.measure_value()
    if prune:
        base = (sum(1 for p, _ in state.chosen if p % 3 == 1) + len(state.chosen) + 2
                + (1 if _mod9_possible(state) else 0) - 2 * _plb(state.chosen) - 1)
    for p in pool[bisect.bisect_right(pool, state.last_prime):]:
        c = _cost(p, state.measure)
        if c > room:
            break
        if prune:
            child = EnumState(state.chosen + ((p, 1),), state.budget, state.measure, state.target)
            if base + _max_gain(child, room // c) < state.target:
                break
        for e in (1, 2):
            if state.measure == MAX_K and p**e > room:
                continue
            yield (p, e)


def iter_candidates(budget: int, measure: str = MAX_K, target: int = 0,
                    after: Path | None = None, root: Path = ()) -> Iterator[tuple[Path, CubefreeK]]:
    """Yield (path, k) for every qualifying k, in DFS (lexicographic path) order.

    ``after`` resumes strictly after a previously yielded path; ``root``
    restricts the walk to one subtree.
    """
    if budget < 1 or target < 0:
        raise ValueError("budget must be >= 1 and target >= 0")
    stack: list[Path] = [root]
    while stack:
        path = stack.pop()
        state = EnumState(path, budget, measure, target)
        if best_case_bound(state) < target:
            continue
        if after is None or path > after:
            ck = CubefreeK(state.product, tuple(path))
            if _within(ck, budget, measure) and selmer_rank_bound(ck).bound >= target:
                yield path, ck
        kids = []
        for pe in _children(state, prune=True):
            child = path + (pe,)
            if after is not None and child < after and after[: len(child)] != child:
                continue
            kids.append(child)
        stack.extend(reversed(kids))


def _branch(args) -> list[CubefreeK]:
    budget, measure, target, root = args
    return [ck for _, ck in iter_candidates(budget, measure, target, root=root)]


def enumerate_candidates(budget: int, measure: str = MAX_K, target: int = 0,
                         jobs: int = 1) -> list[CubefreeK]:
    """All cubefree k within budget with selmer_rank_bound(k) >= target, sorted."""
    if jobs <= 1:
        out = [ck for _, ck in iter_candidates(budget, measure, target)]
    else:
        root_state = EnumState((), budget, measure, target)
        out = []
        if best_case_bound(root_state) >= target and selmer_rank_bound(1).bound >= target:
            out.append(CubefreeK(1, ()))
        tasks = [(budget, measure, target, (pe,)) for pe in _children(root_state)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_branch, tasks):
                out.extend(part)
    return sorted(out, key=lambda ck: ck.k)


def brute_force_candidates(budget: int, measure: str = MAX_K, target: int = 0) -> list[CubefreeK]:
    """Reference filter: test every cubefree k directly."""
    out = []
    limit = budget if measure == MAX_K else budget // 9
    for k in range(1, limit + 1):
        try:
            ck = CubefreeK.of(k)
        except ValueError:
            continue
        if _within(ck, budget, measure) and selmer_rank_bound(ck).bound >= target:
            out.append(ck)
    return out


__all__ = [
    "EnumState", "MAX_CONDUCTOR", "MAX_K", "best_case_bound", "brute_force_candidates",
    "enumerate_candidates", "iter_candidates", "partial_rank_lower_bound",
]
