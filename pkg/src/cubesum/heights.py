"""Canonical heights, the height pairing and independence certificates.

The Neron-Tate height is assembled from local pieces on a minimal model:
an archimedean term from the rapidly converging series of Silverman's
algorithm, log of the denominator of x, and a correction at each prime where
the point reduces to the singular point.  Heights use the normalization in
which h(P) is about log max(|num x|, den x).

Gram matrices are assembled from the pairing and certified positive definite
through their leading principal minors.  A "dependent" verdict is only given
together with an integer relation that has been checked in exact arithmetic.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath

from .arith import factorize
from .curves import CurvePoint, ModelMismatch, ec_add, ec_mul, is_torsion

WORKING_DPS = 50
TARGET_PRECISION = 1e-8
MAX_DPS = 400
DEFAULT_TOL = 1e-3
MAX_RELATION_DENOMINATOR = 64


class PrecisionError(ArithmeticError):
    """The requested precision could not be reached at the configured effort."""


def b_invariants(ainvs) -> tuple[int, int, int, int]:
    a1, a2, a3, a4, a6 = ainvs
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def discriminant(ainvs) -> int:
    b2, b4, b6, b8 = b_invariants(ainvs)
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def c4_invariant(ainvs) -> int:
    b2, b4, _, _ = b_invariants(ainvs)
    return b2 * b2 - 24 * b4


@lru_cache(maxsize=256)
def _bad_primes(ainvs) -> tuple[int, ...]:
    return tuple(p for p, _ in factorize(abs(discriminant(ainvs))).factors)


def _val(n: int | Fraction, p: int) -> int:
    """p-adic valuation; a large sentinel for 0."""
    n = Fraction(n)
    if n == 0:
        return 10**9
    v = 0
    num, den = n.numerator, n.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def nonarch_correction(ainvs, P: tuple[Fraction, Fraction], p: int) -> mpmath.mpf:
    """Correction to max(0, -v_p(x)) log p when P reduces to the singular point mod p.

    The model must be minimal at p.
    """
    a1, a2, a3, a4, a6 = ainvs
    b2, b4, b6, b8 = b_invariants(ainvs)
    x, y = P
    A = _val(3 * x * x + 2 * a2 * x + a4 - a1 * y, p)
    B = _val(2 * y + a1 * x + a3, p)
    if A <= 0 or B <= 0:
        return mpmath.mpf(0)
    logp = mpmath.log(p)
    if _val(c4_invariant(ainvs), p) == 0:
        # multiplicative reduction
        N = _val(discriminant(ainvs), p)
        M = min(B, Fraction(N, 2))
        coeff = M * (M - N) / N
    else:
        C = _val(3 * x**4 + b2 * x**3 + 3 * b4 * x * x + 3 * b6 * x + b8, p)
        coeff = Fraction(-2 * B, 3) if C >= 3 * B else Fraction(-C, 4)
    return mpmath.mpf(coeff.numerator) / coeff.denominator * logp


def archimedean_height(ainvs, x: Fraction, dps: int = WORKING_DPS) -> mpmath.mpf:
    """Archimedean local height at a real point with first coordinate x."""
    b2, b4, b6, b8 = b_invariants(ainvs)
    with mpmath.workdps(dps):
        H = max(4, abs(b2), 2 * abs(b4), 2 * abs(b6), abs(b8))
        N = math.ceil(5 * dps / 3 + 0.5 + 0.75 * math.log(7 + 4 * math.log(H) / 3))
        # coefficients for the shifted variable x + 1
        sb2 = b2 - 12
        sb4 = b4 - b2 + 6
        sb6 = b6 - 2 * b4 + b2 - 4
        sb8 = b8 - 3 * b6 + 3 * b4 - b2 + 3
        xr = mpmath.mpf(x.numerator) / x.denominator
        if abs(xr) < 0.5:
            t = 1 / (xr + 1)
            beta = 0
        else:
            t = 1 / xr
            beta = 1
        mu = -mpmath.log(abs(t))
        f = mpmath.mpf(1)
        for _ in range(N + 1):
            f /= 4
            if beta:
                w = ((b6 * t + 2 * b4) * t + b2) * t * t + 4 * t
                z = 1 - (b4 + (2 * b6 + b8 * t) * t) * t * t
                zw = z + w
            else:
                w = ((sb6 * t + 2 * sb4) * t + sb2) * t * t + 4 * t
                z = 1 - (sb4 + (2 * sb6 + sb8 * t) * t) * t * t
                zw = z - w
            if abs(w) <= 2 * abs(z):
                mu += f * mpmath.log(abs(z))
                t = w / z
            else:
                mu += f * mpmath.log(abs(zw))
                t = w / zw
                beta = 1 - beta
        return mu


def _height_at(ainvs, P, dps: int) -> mpmath.mpf:
    x, _ = P
    with mpmath.workdps(dps):
        h = archimedean_height(ainvs, x, dps) + mpmath.log(x.denominator)
        for p in _bad_primes(tuple(ainvs)):
            h += nonarch_correction(ainvs, P, p)
        return h


def _torsion_xy(ainvs, P) -> bool:
    Q = P
    for _ in range(16):
        Q = ec_add(ainvs, Q, P)
        if Q is None:
            return True
        if Q[0].denominator.bit_length() > 8:
            return False
    return False


def height_xy(ainvs, P, precision: float = TARGET_PRECISION,
              dps: int = WORKING_DPS) -> tuple[mpmath.mpf, float]:
    """(height, error estimate) of an affine point (x, y) on ``ainvs``, or of None.

    The value is computed at two working precisions; if they disagree by more
    than ``precision`` the precision is raised until they agree.
    """
    ainvs = tuple(int(a) for a in ainvs)
    if P is None:
        return mpmath.mpf(0), 0.0
    P = (Fraction(P[0]), Fraction(P[1]))
    if _torsion_xy(ainvs, P):
        return mpmath.mpf(0), 0.0
    scale = len(str(max(abs(b) for b in b_invariants(ainvs)) or 1))
    lo = dps + scale
    while lo <= MAX_DPS:
        h1 = _height_at(ainvs, P, lo)
        h2 = _height_at(ainvs, P, lo + 20)
        err = float(abs(h2 - h1))
        if err <= precision:
            return h2, max(err, 10.0 ** (-(lo - scale)))
        lo *= 2
    raise PrecisionError(f"height did not stabilize to {precision} by {MAX_DPS} digits")


def _require_weierstrass(p: CurvePoint):
    a = p.model.ainvs
    if a is None:
        raise ModelMismatch("heights need a Weierstrass-type model; convert the point first")
    return a


def canonical_height_mp(p: CurvePoint, precision: float = TARGET_PRECISION) -> tuple[mpmath.mpf, float]:
    ainvs = _require_weierstrass(p)
    if p.is_infinity or is_torsion(p):
        return mpmath.mpf(0), 0.0
    return height_xy(ainvs, (p.x, p.y), precision)


def canonical_height(p: CurvePoint, precision: float = TARGET_PRECISION) -> float:
    """Neron-Tate height of a point on a minimal Weierstrass-type model."""
    return float(canonical_height_mp(p, precision)[0])


def pairing(p: CurvePoint, q: CurvePoint, precision: float = TARGET_PRECISION) -> float:
    """<p, q> = (h(p + q) - h(p) - h(q)) / 2."""
    if p.model != q.model:
        raise ModelMismatch("points live on different models")
    hs = [canonical_height_mp(r, precision)[0] for r in (p + q, p, q)]
    return float((hs[0] - hs[1] - hs[2]) / 2)


@dataclass
class HeightGram:
    points: list[CurvePoint]
    gram: list[list[mpmath.mpf]]
    regulator: mpmath.mpf
    precision: float
    minors: list[mpmath.mpf] = field(default_factory=list)


def _heights_task(args):
    ainvs, P, precision = args
    h, err = height_xy(ainvs, P, precision)
    return str(h), err


def height_gram(points: Sequence[CurvePoint], precision: float = TARGET_PRECISION,
                jobs: int = 1) -> HeightGram:
    if not points:
        return HeightGram([], [], mpmath.mpf(1), 0.0, [])
    model = points[0].model
    if any(p.model != model for p in points):
        raise ModelMismatch("all points must lie on one model")
    ainvs = _require_weierstrass(points[0])
    xy = [None if p.is_infinity else (p.x, p.y) for p in points]
    n = len(points)
    tasks = {}
    for i in range(n):
        tasks[(i, i)] = xy[i]
        for j in range(i + 1, n):
            tasks[(i, j)] = ec_add(ainvs, xy[i], xy[j])
    keys = list(tasks)
    args = [(ainvs, tasks[key], precision) for key in keys]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_heights_task, args))
    else:
        results = [_heights_task(a) for a in args]
    with mpmath.workdps(WORKING_DPS):
        h = {key: mpmath.mpf(val) for key, (val, _) in zip(keys, results)}
        worst = max(err for _, err in results)
        gram = [[mpmath.mpf(0)] * n for _ in range(n)]
        for i in range(n):
            gram[i][i] = h[(i, i)]
            for j in range(i + 1, n):
                gram[i][j] = gram[j][i] = (h[(i, j)] - h[(i, i)] - h[(j, j)]) / 2
        minors = [mpmath.det(mpmath.matrix([row[:m] for row in gram[:m]])) for m in range(1, n + 1)]
    # each off-diagonal entry combines three heights
    return HeightGram(list(points), gram, minors[-1], 2 * worst, minors)


def _minor_error(gram, m: int, entry_err: float) -> float:
    """Crude bound on how far an m x m minor can move under entrywise errors."""
    size = max((float(abs(v)) for row in gram[:m] for v in row[:m]), default=1.0)
    return m * math.factorial(m) * entry_err * max(1.0, size) ** (m - 1)


def _find_relation(points: Sequence[CurvePoint], gram, m: int):
    """Integer vector c with sum c_i P_i torsion, from the first m points, or None."""
    with mpmath.workdps(WORKING_DPS):
        if m == 1:
            return [1] if is_torsion(points[0]) else None
        G = mpmath.matrix([row[: m - 1] for row in gram[: m - 1]])
        g = mpmath.matrix([gram[i][m - 1] for i in range(m - 1)])
        try:
            c = mpmath.lu_solve(G, g)
        except ZeroDivisionError:
            return None
        for den in range(1, MAX_RELATION_DENOMINATOR + 1):
            ints = [int(mpmath.nint(den * c[i])) for i in range(m - 1)]
            if all(abs(den * c[i] - ints[i]) < 1e-6 for i in range(m - 1)):
                vec = [-a for a in ints] + [den]
                if _relation_holds(points[:m], vec):
                    return vec
    return None


def _relation_holds(points: Sequence[CurvePoint], vec: Sequence[int]) -> bool:
    ainvs = points[0].model.ainvs
    total = None
    for p, c in zip(points, vec):
        xy = None if p.is_infinity else (p.x, p.y)
        total = ec_add(ainvs, total, ec_mul(ainvs, c, xy))
    return total is None or _torsion_xy(ainvs, total)


def certify_independent(points: Sequence[CurvePoint], tol: float = DEFAULT_TOL,
                        precision: float = TARGET_PRECISION, jobs: int = 1) -> dict:
    """Certificate for the independence of ``points`` in E(Q)/torsion.

    Verdicts: "independent" when every leading principal minor of the Gram
    matrix exceeds ``tol`` by more than its error bound; "dependent" when an
    integer relation is found and verified exactly; otherwise "inconclusive".
    """
    hg = height_gram(points, precision, jobs)
    n = len(points)
    verdict = "independent"
    relation = None
    margin = None
    for m, minor in enumerate(hg.minors, start=1):
        err = _minor_error(hg.gram, m, hg.precision)
        slack = float(minor) - tol - err
        margin = slack if margin is None else min(margin, slack)
        if slack <= 0:
            relation = _find_relation(points, hg.gram, m)
            verdict = "dependent" if relation is not None else "inconclusive"
            break
    with mpmath.workdps(WORKING_DPS):
        return {
            "verdict": verdict,
            "n": n,
            "regulator": mpmath.nstr(hg.regulator, 20) if n else "1",
            "margin": margin,
            "tol": tol,
            "precision": hg.precision,
            "gram": [[mpmath.nstr(v, 15) for v in row] for row in hg.gram],
            "minors": [mpmath.nstr(v, 15) for v in hg.minors],
            "relation": relation,
        }


__all__ = [
    "HeightGram", "PrecisionError", "archimedean_height", "canonical_height",
    "certify_independent", "height_gram", "height_xy", "nonarch_correction", "pairing",
]
