"""Rational cubic surfaces whose points give pairs of points on E_k / E'_k.

    S1: w^3 + x^3 = y^3 + z^3      (two points on E_k)
    S2: wx(w+x) = yz(y+z)          (two points on E'_k)
    S3: wx(w+x) = y^3 + z^3        (one point on E'_k, one on E_k)

Each surface comes with an integral parametrization by (r, s, t) and a
factorization of its class invariant into low-degree pieces, so k can be
recovered by factoring small numbers.  The parametrizations are written as
plain arithmetic so the same code runs on ints and on ``Poly`` objects; the
identities are expanded and checked once at import time.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .arith import (
    CubefreeK,
    IncompleteFactorization,
    cubefree_from_factors,
    factor_product,
    factorize,
)
from .curves import CurveModel, CurvePoint, Form

log = logging.getLogger(__name__)


class SurfaceId(enum.Enum):
    S1 = "s1"
    S2 = "s2"
    S3 = "s3"


# ---------------------------------------------------------------------------
# sparse polynomials in (r, s, t), only used by the self-test


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}

    @staticmethod
    def _lift(other):
        return other if isinstance(other, Poly) else Poly({(0, 0, 0): other})

    def __add__(self, other):
        other = self._lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Poly({(0, 0, 0): 1})
        for _ in range(n):
            out = out * self
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (self - other).is_zero()

    __hash__ = None


R_ = Poly({(1, 0, 0): 1})
S_ = Poly({(0, 1, 0): 1})
T_ = Poly({(0, 0, 1): 1})


# ---------------------------------------------------------------------------
# parametrizations and factored invariants


def _s1_coords(t, s, r):
    w = t**3 - 2 * t**2 * s - 2 * t * s * r + t * s**2 + r**2 * s - r**3 - r * s**2
    x = -t**3 - 2 * t**2 * s + t * s**2 - 2 * t * s * r + 2 * r * s**2 - s**3 + r**3 - 2 * r**2 * s
    y = (2 * t**3 + 3 * t**2 * r - 2 * t**2 * s - 2 * t * s * r + 3 * t * r**2 + t * s**2
         + 2 * r * s**2 - s**3 + r**3 - 2 * r**2 * s)
    z = (-2 * t**3 + t**2 * s - 3 * t**2 * r - 3 * t * r**2 + 4 * t * s * r - 2 * t * s**2
         - r**3 + r**2 * s - r * s**2)
    return w, x, y, z


def _s1_factors(t, s, r):
    # w + x = -s * q1,  w^2 - wx + x^2 = q2 * quartic
    q1 = r**2 - r * s + 4 * r * t + s**2 - 2 * s * t + 4 * t**2
    q2 = r**2 - r * s - 2 * r * t + s**2 + s * t + t**2
    quartic = (3 * r**4 - 6 * r**3 * s + 6 * r**3 * t + 7 * r**2 * s**2 - 9 * r**2 * s * t
               + 9 * r**2 * t**2 - 4 * r * s**3 + 7 * r * s**2 * t - 9 * r * s * t**2
               + 6 * r * t**3 + s**4 - 2 * s**3 * t + 4 * s**2 * t**2 - 3 * s * t**3 + 3 * t**4)
    return [-s, q1, q2, quartic]


def _s2_coords(r, s, t):
    return (-r**2 * s + s**2 * t, r**2 * s - r * t**2, -r**2 * t + s * t**2, r * s**2 - s * t**2)


def _s2_factors(r, s, t):
    # w = s(st - r^2), x = r(rs - t^2), w + x = t(s^2 - rt)
    return [s, s * t - r**2, r, r * s - t**2, t, s**2 - r * t]


def _s3_coords(r, s, t):
    return (r**3 - s**3, s**3 + t**3, r**2 * s - s**2 * t + t**2 * r, r**2 * t - s**2 * r - t**2 * s)


def _s3_factors(r, s, t):
    # w = r^3 - s^3, x = s^3 + t^3, w + x = r^3 + t^3
    return [r - s, r**2 + r * s + s**2, s + t, s**2 - s * t + t**2, r + t, r**2 - r * t + t**2]


_COORDS = {SurfaceId.S1: _s1_coords, SurfaceId.S2: _s2_coords, SurfaceId.S3: _s3_coords}
_FACTORS = {SurfaceId.S1: _s1_factors, SurfaceId.S2: _s2_factors, SurfaceId.S3: _s3_factors}


def surface_equation(surface: SurfaceId, w, x, y, z):
    """Left side minus right side of the surface equation."""
    if surface is SurfaceId.S1:
        return w**3 + x**3 - y**3 - z**3
    if surface is SurfaceId.S2:
        return w * x * (w + x) - y * z * (y + z)
    return w * x * (w + x) - y**3 - z**3


def class_invariant(surface: SurfaceId, w, x, y=None, z=None):
    if surface is SurfaceId.S1:
        return w**3 + x**3
    return w * x * (w + x)


def self_test() -> None:
    """Expand every hardcoded identity symbolically; raise on any mismatch."""
    for surface in SurfaceId:
        coords = _COORDS[surface](R_, S_, T_)
        if not surface_equation(surface, *coords).is_zero():
            raise AssertionError(f"{surface.value} parametrization does not satisfy the surface")
        prod = Poly({(0, 0, 0): 1})
        for f in _FACTORS[surface](R_, S_, T_):
            prod = prod * f
        if not (prod - class_invariant(surface, *coords)).is_zero():
            raise AssertionError(f"{surface.value} factorization does not match its invariant")


self_test()


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class SurfaceTriple:
    surface: SurfaceId
    params: tuple[int, int, int]   # (r, s, t); (t, s, r) for S1

    def __post_init__(self):
        if not any(self.params):
            raise ValueError("parameters must not all vanish")


@dataclass
class SurfaceSample:
    triple: SurfaceTriple
    coords: tuple[int, int, int, int]
    invariant: int
    k: CubefreeK | None = None
    scale: int = 0
    points: tuple[CurvePoint, CurvePoint] | None = None
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "surface": self.triple.surface.value,
            "params": list(self.triple.params),
            "coords": list(self.coords),
            "k": None if self.k is None else str(self.k.k),
            "points": [] if self.points is None else [p.to_json() for p in self.points],
            "degenerate": self.degenerate,
        }


def evaluate(triple: SurfaceTriple) -> tuple[int, int, int, int]:
    """Integer point (w:x:y:z) on the surface, with content divided out."""
    coords = _COORDS[triple.surface](*triple.params)
    g = math.gcd(*coords)
    if g > 1:
        coords = tuple(c // g for c in coords)
    return tuple(coords)


def factored_invariant(triple: SurfaceTriple) -> list[int]:
    """Values of the fixed factorization of the class invariant at the triple.

    The product equals the invariant of the un-reduced point; multiplicities
    are all one.
    """
    return list(_FACTORS[triple.surface](*triple.params))


def _trivial_pair(surface: SurfaceId, w: int, x: int, y: int, z: int) -> bool:
    if surface is SurfaceId.S1:
        return (w, x) in ((y, z), (z, y))
    if surface is SurfaceId.S2:
        # (u, v) and its images under the symmetries of uv(u+v)
        orbit = {(y, z), (z, y), (y, -y - z), (-y - z, y), (z, -y - z), (-y - z, z)}
        return (w, x) in orbit
    return False


def sample(triple: SurfaceTriple, factor_cap: int | None = None) -> SurfaceSample:
    """Recover k and the point pair carried by a surface point.

    Each small factor is factored on its own; the degree-9 (or 12) product is
    never factored.  Raises ``IncompleteFactorization`` with ``cofactor`` set
    when a factor value cannot be split.
    """
    surface = triple.surface
    raw = _COORDS[surface](*triple.params)
    coords = evaluate(triple)
    values = factored_invariant(triple)
    invariant = math.prod(values)
    out = SurfaceSample(triple, coords, invariant)
    if invariant == 0 or _trivial_pair(surface, *coords):
        out.degenerate = True
        return out
    if factor_cap is not None and max(abs(v) for v in values) > factor_cap:
        raise IncompleteFactorization(abs(invariant), max(abs(v) for v in values), [])
    fac = factor_product([factorize(abs(v)) for v in values])
    k, d = cubefree_from_factors(fac.factors)
    sign = 1 if invariant > 0 else -1
    w, x, y, z = (Fraction(sign * c, d) for c in raw)
    ek = CurveModel(k, Form.CUBIC_EK)
    ekp = CurveModel(k, Form.CUBIC_EKPRIME)
    if surface is SurfaceId.S1:
        pts = (ek.point(w, x), ek.point(y, z))
    elif surface is SurfaceId.S2:
        pts = (ekp.point(w, x), ekp.point(y, z))
    else:
        pts = (ekp.point(w, x), ek.point(y, z))
    out.k, out.scale, out.points = k, d, pts
    return out


# ---------------------------------------------------------------------------
# scanning


@dataclass
class ScanStats:
    triples: int = 0
    degenerate: int = 0
    failed: int = 0
    filtered: int = 0
    emitted: int = 0
    failures: list = field(default_factory=list)

    def merge(self, other: "ScanStats") -> None:
        self.triples += other.triples
        self.degenerate += other.degenerate
        self.failed += other.failed
        self.filtered += other.filtered
        self.emitted += other.emitted
        self.failures.extend(other.failures)


@dataclass(frozen=True)
class ScanFilters:
    min_selmer: int | None = None
    max_k: int | None = None
    factor_cap: int | None = None


DEFAULT_FACTOR_CAP = {SurfaceId.S1: 10**12, SurfaceId.S2: None, SurfaceId.S3: None}


def canonical_triples(box: int, start: tuple[int, int, int] | None = None,
                      first: int | None = None) -> Iterator[tuple[int, int, int]]:
    """Primitive triples in [-box, box]^3 whose first nonzero entry is positive.

    Lexicographic order.  ``start`` resumes at a given triple (inclusive);
    ``first`` restricts to the slice with that first coordinate.
    """
    slices = range(0, box + 1) if first is None else [first]
    for a in slices:
        if start is not None and a < start[0]:
            continue
        if a == 0:
            heads = [(0, 0, [1])] + [(0, b, None) for b in range(1, box + 1)]
        else:
            heads = [(a, b, None) for b in range(-box, box + 1)]
        for _, b, cs in heads:
            if start is not None and (a, b) < start[:2]:
                continue
            for c in cs or range(-box, box + 1):
                if start is not None and (a, b, c) < start:
                    continue
                if math.gcd(a, b, c) == 1:
                    yield (a, b, c)


def next_triple(box: int, current: tuple[int, int, int]) -> tuple[int, int, int] | None:
    """Successor of ``current`` in scan order, or None at the end of the box."""
    for tr in canonical_triples(box, current):
        if tr != current:
            return tr
    return None


def _passes(sample_: SurfaceSample, filters: ScanFilters) -> bool:
    if filters.max_k is not None and sample_.k.k > filters.max_k:
        return False
    if filters.min_selmer is not None:
        from .descent import selmer_rank_bound

        if selmer_rank_bound(sample_.k).bound < filters.min_selmer:
            return False
    return True


def scan_steps(
    surface: SurfaceId | str,
    box: int,
    filters: ScanFilters | None = None,
    start: tuple[int, int, int] | None = None,
    stats: ScanStats | None = None,
    first: int | None = None,
) -> Iterator[tuple[tuple[int, int, int], SurfaceSample | None]]:
    """One (triple, sample or None) pair per canonical triple, in scan order.

    None marks a triple that was degenerate, filtered out or unfactorable.
    The triple doubles as a checkpoint cursor.
    """
    surface = SurfaceId(surface) if isinstance(surface, str) else surface
    if box < 1:
        raise ValueError("box must be at least 1")
    filters = filters or ScanFilters(factor_cap=DEFAULT_FACTOR_CAP[surface])
    stats = stats if stats is not None else ScanStats()
    for params in canonical_triples(box, start, first):
        stats.triples += 1
        triple = SurfaceTriple(surface, params)
        try:
            smp = sample(triple, filters.factor_cap)
        except IncompleteFactorization as exc:
            stats.failed += 1
            stats.failures.append((params, exc.cofactor))
            log.warning("skipping %s %s: unfactored %s", surface.value, params, exc.cofactor)
            yield params, None
            continue
        if smp.degenerate:
            stats.degenerate += 1
            yield params, None
            continue
        if not _passes(smp, filters):
            stats.filtered += 1
            yield params, None
            continue
        stats.emitted += 1
        yield params, smp


def scan_box(
    surface: SurfaceId | str,
    box: int,
    filters: ScanFilters | None = None,
    start: tuple[int, int, int] | None = None,
    stats: ScanStats | None = None,
    first: int | None = None,
) -> Iterator[SurfaceSample]:
    """Stream non-degenerate samples from all canonical triples in the box.

    Deterministic for a fixed box; pass ``start`` (a triple) to resume.
    Factorization failures are logged, counted in ``stats`` and skipped.
    """
    for _, smp in scan_steps(surface, box, filters, start, stats, first):
        if smp is not None:
            yield smp


def _scan_slice(args):
    surface, box, filters, first = args
    stats = ScanStats()
    samples = list(scan_box(surface, box, filters, None, stats, first))
    return samples, stats


def scan_box_parallel(surface: SurfaceId | str, box: int, filters: ScanFilters | None = None,
                      jobs: int = 1) -> tuple[list[SurfaceSample], ScanStats]:
    """Scan slice-by-slice (fixed first coordinate) across worker processes."""
    surface = SurfaceId(surface) if isinstance(surface, str) else surface
    filters = filters or ScanFilters(factor_cap=DEFAULT_FACTOR_CAP[surface])
    tasks = [(surface, box, filters, a) for a in range(0, box + 1)]
    stats = ScanStats()
    out: list[SurfaceSample] = []
    if jobs <= 1:
        results = map(_scan_slice, tasks)
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_scan_slice, tasks)
    for samples, st in results:
        out.extend(samples)
        stats.merge(st)
    if jobs > 1:
        pool.shutdown()
    return out, stats
