import random

import pytest

from cubesum.arith import CubefreeK
from cubesum.descent import selmer_rank_bound
from cubesum.enumeration import (
    MAX_CONDUCTOR, MAX_K, EnumState, best_case_bound, brute_force_candidates,
    enumerate_candidates, iter_candidates, partial_rank_lower_bound,
)


def _ks(cands):
    return [ck.k for ck in cands]


def test_examples():
    assert 19 in _ks(enumerate_candidates(19, MAX_K, 2))
    assert _ks(enumerate_candidates(657, MAX_K, 3)) == [330, 510, 657]
    assert 19 in _ks(enumerate_candidates(9747, MAX_CONDUCTOR, 2))
    assert partial_rank_lower_bound(EnumState((), 100)) == 0
    pair = EnumState(((7, 1), (13, 1)), 10**4)
    assert 0 <= partial_rank_lower_bound(pair) <= selmer_rank_bound(91).matrix_rank


def test_best_case_survives_on_record_prefix():
    assert best_case_bound(EnumState(((109, 1),), 21691, MAX_K, 4)) >= 4
    assert best_case_bound(EnumState(((7, 1),), 6, MAX_K, 0)) == -1


@pytest.mark.parametrize("budget,target", [(2000, 0), (2000, 2), (20000, 3), (100000, 4), (100000, 5)])
def test_matches_brute_force_max_k(budget, target):
    assert _ks(enumerate_candidates(budget, MAX_K, target)) == _ks(brute_force_candidates(budget, MAX_K, target))


@pytest.mark.parametrize("budget,target", [(10**5, 2), (10**6, 3)])
def test_matches_brute_force_conductor(budget, target):
    got = _ks(enumerate_candidates(budget, MAX_CONDUCTOR, target))
    assert got == _ks(brute_force_candidates(budget, MAX_CONDUCTOR, target))


def test_parallel_equals_serial():
    assert _ks(enumerate_candidates(50000, MAX_K, 3, jobs=2)) == _ks(enumerate_candidates(50000, MAX_K, 3))


def test_partial_bound_never_exceeds_full_rank():
    rng = random.Random(11)
    ks = [ck for ck in brute_force_candidates(200000, MAX_K, 0) if len(ck.factors) >= 2]
    for ck in rng.sample(ks, 400):
        full = selmer_rank_bound(ck)
        for cut in range(len(ck.factors) + 1):
            state = EnumState(tuple(ck.factors[:cut]), 200000)
            assert partial_rank_lower_bound(state) <= full.matrix_rank
            assert best_case_bound(state) >= full.bound


def test_resume_after_any_path():
    full = list(iter_candidates(30000, MAX_K, 3))
    assert full
    for i in range(0, len(full), max(1, len(full) // 15)):
        path = full[i][0]
        rest = list(iter_candidates(30000, MAX_K, 3, after=path))
        assert rest == full[i + 1:]


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        list(iter_candidates(0))
    with pytest.raises(ValueError):
        list(iter_candidates(10, target=-1))


def test_record_is_emitted_with_factors():
    cands = {ck.k: ck for ck in enumerate_candidates(21691, MAX_K, 4)}
    assert 21691 in cands
    assert isinstance(cands[21691], CubefreeK)
    assert selmer_rank_bound(cands[21691]).bound >= 4
