import math
import random

import pytest

from cubesum.arith import cubefree_part
from cubesum.descent import selmer_rank_bound
from cubesum.surfaces import (
    ScanFilters, ScanStats, SurfaceId, SurfaceTriple, canonical_triples, class_invariant, evaluate,
    factored_invariant, next_triple, sample, scan_box, scan_steps, self_test, surface_equation,
    _COORDS,
)

N_RANDOM = 10**5


def test_self_test_passes():
    self_test()


def test_evaluate_examples():
    assert evaluate(SurfaceTriple(SurfaceId.S3, (1, 2, 3))) == (-7, 35, -1, -19)
    assert evaluate(SurfaceTriple(SurfaceId.S2, (1, 2, 3))) == (10, -7, 15, -14)
    w, x, y, z = evaluate(SurfaceTriple(SurfaceId.S1, (1, 0, 0)))
    assert w**3 + x**3 == y**3 + z**3 == 0


def test_factored_invariant_examples():
    assert factored_invariant(SurfaceTriple(SurfaceId.S3, (1, 2, 3))) == [-1, 7, 5, 7, 4, 7]
    assert math.prod(factored_invariant(SurfaceTriple(SurfaceId.S3, (1, 2, 3)))) == -6860
    assert math.prod(factored_invariant(SurfaceTriple(SurfaceId.S2, (1, 2, 3)))) == -210
    assert 0 in factored_invariant(SurfaceTriple(SurfaceId.S3, (1, 1, 0)))


def test_sample_examples():
    smp = sample(SurfaceTriple(SurfaceId.S3, (1, 2, 3)))
    assert not smp.degenerate
    assert smp.k.k == 20 and smp.scale == 7
    u, e = smp.points
    assert u.x * u.y * (u.x + u.y) == 20
    assert e.x**3 + e.y**3 == 20
    assert sample(SurfaceTriple(SurfaceId.S1, (1, 0, 0))).degenerate
    assert sample(SurfaceTriple(SurfaceId.S3, (1, 1, 0))).degenerate
    assert sample(SurfaceTriple(SurfaceId.S2, (1, 2, 3))).k.k == 210


def test_triple_validation():
    with pytest.raises(ValueError):
        SurfaceTriple(SurfaceId.S3, (0, 0, 0))


@pytest.mark.parametrize("surface", list(SurfaceId))
def test_identities_on_random_triples(surface):
    rng = random.Random(surface.value)
    for _ in range(N_RANDOM):
        params = tuple(rng.randint(-10**6, 10**6) for _ in range(3))
        raw = _COORDS[surface](*params)
        assert surface_equation(surface, *raw) == 0
        assert math.prod(factored_invariant(SurfaceTriple(surface, params))) == class_invariant(surface, *raw)
        if surface is SurfaceId.S3:
            r, _, t = params
            assert raw[0] + raw[1] - (r**3 + t**3) == 0


@pytest.mark.parametrize("surface", ["s2", "s3"])
def test_scan_samples_are_on_curve_and_cubefree(surface):
    count = 0
    for smp in scan_box(surface, 4):
        k = smp.k.k
        assert abs(smp.invariant) % k == 0
        assert cubefree_part(smp.invariant)[0].k == k
        for p in smp.points:
            assert p.model.k.k == k and p.model.contains(p.x, p.y)
        count += 1
    assert count > 100


def test_s1_points_both_on_ek():
    forms = set()
    for smp in scan_box("s1", 3):
        forms.update(p.model.form.value for p in smp.points)
    assert forms == {"cubic_ek"}


def test_canonical_triples_are_primitive_and_unique():
    box = 4
    seen = set()
    for tr in canonical_triples(box):
        assert math.gcd(*tr) == 1
        first = next(v for v in tr if v)
        assert first > 0
        assert tuple(-v for v in tr) not in seen
        seen.add(tr)
    assert next(iter(canonical_triples(box))) == (0, 0, 1)


@pytest.mark.parametrize("surface", ["s2", "s3"])
def test_scan_is_monotone_in_box(surface):
    small = {smp.triple.params for smp in scan_box(surface, 3)}
    large = {smp.triple.params for smp in scan_box(surface, 5)}
    assert small <= large


def test_scan_resume_from_any_cursor():
    straight = [params for params, _ in scan_steps("s3", 3)]
    for i in range(0, len(straight) - 1, 17):
        nxt = next_triple(3, straight[i])
        assert nxt == straight[i + 1]
        resumed = [params for params, _ in scan_steps("s3", 3, start=nxt)]
        assert straight[: i + 1] + resumed == straight
    assert next_triple(3, straight[-1]) is None


def test_scan_filters():
    for smp in scan_box("s1", 6, ScanFilters(max_k=1, factor_cap=10**12)):
        assert smp.k.k == 1
    for smp in scan_box("s3", 5, ScanFilters(min_selmer=2)):
        assert selmer_rank_bound(smp.k).bound >= 2


def test_scan_stats_count_everything():
    stats = ScanStats()
    out = list(scan_box("s3", 3, stats=stats))
    assert stats.emitted == len(out)
    assert stats.triples == stats.emitted + stats.degenerate + stats.filtered + stats.failed


def test_factor_cap_failures_are_counted():
    stats = ScanStats()
    list(scan_box("s1", 3, ScanFilters(factor_cap=10), stats=stats))
    assert stats.failed > 0 and len(stats.failures) == stats.failed


def test_box_60_has_selmer_four_hit():
    gen = scan_box("s3", 60, ScanFilters(min_selmer=4))
    smp = next(gen)
    assert selmer_rank_bound(smp.k).bound >= 4
    for p in smp.points:
        assert p.model.contains(p.x, p.y)
