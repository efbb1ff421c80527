"""Exact models of E_k: x^3+y^3=k and its 3-isogenous partner E'_k: uv(u+v)=k.

Points carry exact ``Fraction`` coordinates and are checked against their model
equation on construction.  The chord-tangent law is only implemented for the
Weierstrass-type forms; cubic-form points have to be converted first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .arith import CubefreeK

Rational = Union[int, Fraction]


class UndefinedAtPoint(ArithmeticError):
    """A rational map was evaluated where one of its denominators vanishes."""


class ModelMismatch(ValueError):
    pass


class Form(enum.Enum):
    CUBIC_EK = "cubic_ek"                      # x^3 + y^3 = k
    WEIERSTRASS_EK = "weierstrass_ek"          # Y^2 = X^3 - 432k^2
    CUBIC_EKPRIME = "cubic_ekprime"            # uv(u+v) = k
    WEIERSTRASS_EKPRIME = "weierstrass_ekprime"  # V^2 = U^3 + 16k^2
    MINIMAL_EKPRIME_EVEN = "minimal_ekprime_even"  # Z^2 = W^3 + k^2/4
    MINIMAL_EKPRIME_ODD = "minimal_ekprime_odd"    # Z^2 + Z = W^3 + (k^2-1)/4

    @property
    def curve(self) -> str:
        return "ek" if self in (Form.CUBIC_EK, Form.WEIERSTRASS_EK) else "ekprime"

    @property
    def is_cubic(self) -> bool:
        return self in (Form.CUBIC_EK, Form.CUBIC_EKPRIME)


def _as_k(k: int | CubefreeK) -> CubefreeK:
    return k if isinstance(k, CubefreeK) else CubefreeK.of(int(k))


@dataclass(frozen=True)
class CurveModel:
    k: CubefreeK
    form: Form

    def __post_init__(self):
        if self.form is Form.MINIMAL_EKPRIME_EVEN and self.k.k % 2:
            raise ValueError("even minimal model needs even k")
        if self.form is Form.MINIMAL_EKPRIME_ODD and self.k.k % 2 == 0:
            raise ValueError("odd minimal model needs odd k")

    @classmethod
    def make(cls, k: int | CubefreeK, form: Form | str) -> "CurveModel":
        form = Form(form) if isinstance(form, str) else form
        if form in (Form.MINIMAL_EKPRIME_EVEN, Form.MINIMAL_EKPRIME_ODD):
            return minimal_model(k)
        return cls(_as_k(k), form)

    @property
    def ainvs(self) -> tuple[int, int, int, int, int] | None:
        """(a1, a2, a3, a4, a6), or None for the cubic forms."""
        k = self.k.k
        if self.form is Form.WEIERSTRASS_EK:
            return (0, 0, 0, 0, -432 * k * k)
        if self.form is Form.WEIERSTRASS_EKPRIME:
            return (0, 0, 0, 0, 16 * k * k)
        if self.form is Form.MINIMAL_EKPRIME_EVEN:
            return (0, 0, 0, 0, k * k // 4)
        if self.form is Form.MINIMAL_EKPRIME_ODD:
            return (0, 0, 1, 0, (k * k - 1) // 4)
        return None

    @property
    def constant(self) -> int:
        """Constant term of a Weierstrass-type model."""
        a = self.ainvs
        if a is None:
            raise ModelMismatch(f"{self.form.value} has no Weierstrass constant")
        return a[4]

    def contains(self, x: Rational, y: Rational) -> bool:
        k = self.k.k
        if self.form is Form.CUBIC_EK:
            return x**3 + y**3 == k
        if self.form is Form.CUBIC_EKPRIME:
            return x * y * (x + y) == k
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y == x**3 + a2 * x * x + a4 * x + a6

    def __str__(self):
        k = self.k.k
        text = {
            Form.CUBIC_EK: f"x^3 + y^3 = {k}",
            Form.CUBIC_EKPRIME: f"uv(u+v) = {k}",
        }.get(self.form)
        if text:
            return text
        a1, a2, a3, a4, a6 = self.ainvs
        lhs = "y^2 + y" if a3 else "y^2"
        return f"{lhs} = x^3 + {a6}" if a6 >= 0 else f"{lhs} = x^3 - {-a6}"

    def infinity(self) -> "CurvePoint":
        return CurvePoint(self, None, None)

    def point(self, x: Rational | str, y: Rational | str) -> "CurvePoint":
        return CurvePoint(self, Fraction(x), Fraction(y))


@dataclass(frozen=True)
class CurvePoint:
    model: CurveModel
    x: Fraction | None
    y: Fraction | None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("a point is either at infinity or has two coordinates")
        if self.x is not None:
            object.__setattr__(self, "x", Fraction(self.x))
            object.__setattr__(self, "y", Fraction(self.y))
            if not self.model.contains(self.x, self.y):
                raise ValueError(f"({self.x}, {self.y}) is not on {self.model}")

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @property
    def k(self) -> int:
        return self.model.k.k

    def __neg__(self):
        return neg(self)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rmul__(self, n: int):
        return mul(n, self)

    def __repr__(self):
        if self.is_infinity:
            return f"CurvePoint({self.model.form.value}, k={self.k}, inf)"
        return f"CurvePoint({self.model.form.value}, k={self.k}, ({self.x}, {self.y}))"

    def to_json(self) -> dict:
        if self.is_infinity:
            return {"model": self.model.form.value, "inf": True}
        return {"model": self.model.form.value, "x": fraction_str(self.x), "y": fraction_str(self.y)}

    @classmethod
    def from_json(cls, k: int | CubefreeK, data: dict) -> "CurvePoint":
        model = CurveModel.make(k, data["model"])
        if data.get("inf"):
            return model.infinity()
        return model.point(parse_fraction(data["x"]), parse_fraction(data["y"]))


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_fraction(s: str | int) -> Fraction:
    return Fraction(str(s).strip())


# ---------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class ConductorData:
    k: CubefreeK
    beta3: int
    value: int


def beta3(k: int) -> int:
    if k % 3 == 0:
        return 3
    return 0 if k % 9 in (2, 7) else 1


def conductor(k: int | CubefreeK) -> ConductorData:
    """Conductor of E'_k (equivalently E_k): product over p | 3k of p^(2+beta_p)."""
    ck = _as_k(k)
    b = beta3(ck.k)
    value = 3 ** (2 + b)
    for p in ck.primes:
        if p != 3:
            value *= p * p
    return ConductorData(ck, b, value)


def minimal_model(k: int | CubefreeK) -> CurveModel:
    ck = _as_k(k)
    form = Form.MINIMAL_EKPRIME_EVEN if ck.k % 2 == 0 else Form.MINIMAL_EKPRIME_ODD
    return CurveModel(ck, form)


# ---------------------------------------------------------------------------
# coordinate maps (plain rationals in, plain rationals out)


def cubic_to_weierstrass_ek(k: int, x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
    if x + y == 0:
        raise UndefinedAtPoint("x + y = 0")
    return Fraction(12 * k) / (y + x), 36 * k * (y - x) / (y + x)


def weierstrass_to_cubic_ek(k: int, X: Fraction, Y: Fraction) -> tuple[Fraction, Fraction]:
    if X == 0:
        raise UndefinedAtPoint("X = 0")
    return (36 * k - Y) / (6 * X), (36 * k + Y) / (6 * X)


def cubic_to_weierstrass_ekprime(k: int, u: Fraction, v: Fraction) -> tuple[Fraction, Fraction]:
    if v == 0:
        raise UndefinedAtPoint("v = 0")
    return Fraction(4 * k) / v, (8 * k * u + 4 * k * v) / v


def weierstrass_to_cubic_ekprime(k: int, U: Fraction, V: Fraction) -> tuple[Fraction, Fraction]:
    if U == 0:
        raise UndefinedAtPoint("U = 0 (3-torsion point)")
    return (V - 4 * k) / (2 * U), Fraction(4 * k) / U


def _to_minimal(k: int, U: Fraction, V: Fraction) -> tuple[Fraction, Fraction]:
    return (U / 4, V / 8) if k % 2 == 0 else (U / 4, (V - 4) / 8)


def _from_minimal(k: int, W: Fraction, Z: Fraction) -> tuple[Fraction, Fraction]:
    return (4 * W, 8 * Z) if k % 2 == 0 else (4 * W, 8 * Z + 4)


_HUB = {"ek": Form.WEIERSTRASS_EK, "ekprime": Form.WEIERSTRASS_EKPRIME}


def _to_hub(p: CurvePoint) -> tuple[Fraction, Fraction] | None:
    k = p.k
    if p.is_infinity:
        return None
    f = p.model.form
    if f is Form.CUBIC_EK:
        return cubic_to_weierstrass_ek(k, p.x, p.y)
    if f is Form.CUBIC_EKPRIME:
        return cubic_to_weierstrass_ekprime(k, p.x, p.y)
    if f in (Form.MINIMAL_EKPRIME_EVEN, Form.MINIMAL_EKPRIME_ODD):
        return _from_minimal(k, p.x, p.y)
    return p.x, p.y


def _from_hub(k: int, xy, target: Form):
    if xy is None:
        return None
    X, Y = xy
    if target is Form.CUBIC_EK:
        return weierstrass_to_cubic_ek(k, X, Y)
    if target is Form.CUBIC_EKPRIME:
        return weierstrass_to_cubic_ekprime(k, X, Y)
    if target in (Form.MINIMAL_EKPRIME_EVEN, Form.MINIMAL_EKPRIME_ODD):
        return _to_minimal(k, X, Y)
    return X, Y


def convert(p: CurvePoint, target: Form | str) -> CurvePoint:
    """Move a point to another model of the same curve (E_k or E'_k).

    The cubic forms have one point at infinity standing for the group
    identity; on uv(u+v)=k the two other points at infinity are the 3-torsion
    points (U, V) = (0, +-4k), which have no affine cubic image.
    """
    target = Form(target) if isinstance(target, str) else target
    if target in (Form.MINIMAL_EKPRIME_EVEN, Form.MINIMAL_EKPRIME_ODD):
        target = minimal_model(p.model.k).form
    if target.curve != p.model.form.curve:
        raise ModelMismatch(f"cannot convert {p.model.form.value} to {target.value}; use an isogeny")
    if target is p.model.form:
        return p
    xy = _from_hub(p.k, _to_hub(p), target)
    model = CurveModel(p.model.k, target)
    return model.infinity() if xy is None else model.point(*xy)


# ---------------------------------------------------------------------------
# isogenies


def phi(p: CurvePoint) -> CurvePoint:
    """E_k -> E'_k, (x, y) -> (y^2/x, -k/(xy)) on the cubic models."""
    if p.model.form.curve != "ek":
        raise ModelMismatch("phi expects a point on E_k")
    target = CurveModel(p.model.k, Form.CUBIC_EKPRIME)
    if p.is_infinity:
        return target.infinity()
    p = convert(p, Form.CUBIC_EK)
    if p.x == 0 or p.y == 0:
        raise UndefinedAtPoint("phi is undefined where xy = 0")
    k = p.k
    return target.point(p.y * p.y / p.x, Fraction(-k) / (p.x * p.y))


def phi_hat(p: CurvePoint) -> CurvePoint:
    """Dual isogeny E'_k -> E_k on the Weierstrass models."""
    if p.model.form.curve != "ekprime":
        raise ModelMismatch("phi_hat expects a point on E'_k")
    target = CurveModel(p.model.k, Form.WEIERSTRASS_EK)
    if p.is_infinity:
        return target.infinity()
    p = convert(p, Form.WEIERSTRASS_EKPRIME)
    U, V = p.x, p.y
    if U == 0:
        raise UndefinedAtPoint("phi_hat is undefined at U = 0 (kernel point)")
    k2 = p.k * p.k
    return target.point((U**3 + 64 * k2) / U**2, V * (U**3 - 128 * k2) / U**3)


def composite_sign(p: CurvePoint) -> int:
    """Return s in {+1, -1} with phi_hat(phi(P)) = [3s] P, checked exactly.

    The sign is a property of the chosen coordinate maps, so it is measured
    rather than assumed.  Raises if neither sign fits.
    """
    P = convert(p, Form.WEIERSTRASS_EK)
    image = phi_hat(convert(phi(P), Form.WEIERSTRASS_EKPRIME))
    triple = mul(3, P)
    if image == triple:
        return 1
    if image == neg(triple):
        return -1
    raise AssertionError(f"phi_hat(phi(P)) is not +-3P for {p}")


# ---------------------------------------------------------------------------
# group law on Weierstrass-type models


def ec_neg(ainvs, P):
    if P is None:
        return None
    a1, _, a3, _, _ = ainvs
    x, y = P
    return (x, -y - a1 * x - a3)


def ec_add(ainvs, P, Q):
    """Chord-tangent addition on a long Weierstrass equation; None is infinity."""
    if P is None:
        return Q
    if Q is None:
        return P
    a1, a2, a3, a4, a6 = ainvs
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return None
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return (x3, y3)


def ec_mul(ainvs, n: int, P):
    if n < 0:
        return ec_mul(ainvs, -n, ec_neg(ainvs, P))
    result = None
    addend = P
    while n:
        if n & 1:
            result = ec_add(ainvs, result, addend)
        n >>= 1
        if n:
            addend = ec_add(ainvs, addend, addend)
    return result


def _group_model(p: CurvePoint):
    a = p.model.ainvs
    if a is None:
        raise ModelMismatch("group law needs a Weierstrass-type model; convert the point first")
    return a


def _wrap(model: CurveModel, xy) -> CurvePoint:
    return model.infinity() if xy is None else CurvePoint(model, xy[0], xy[1])


def _coords(p: CurvePoint):
    return None if p.is_infinity else (p.x, p.y)


def neg(p: CurvePoint) -> CurvePoint:
    return _wrap(p.model, ec_neg(_group_model(p), _coords(p)))


def add(p: CurvePoint, q: CurvePoint) -> CurvePoint:
    if p.model != q.model:
        raise ModelMismatch("points live on different models")
    return _wrap(p.model, ec_add(_group_model(p), _coords(p), _coords(q)))


def mul(n: int, p: CurvePoint) -> CurvePoint:
    return _wrap(p.model, ec_mul(_group_model(p), n, _coords(p)))


def is_torsion(p: CurvePoint, max_order: int = 12) -> bool:
    """Exact torsion test using Mazur's bound on orders over Q."""
    if p.is_infinity:
        return True
    a = _group_model(p)
    P = _coords(p)
    Q = P
    for _ in range(max_order):
        Q = ec_add(a, Q, P)
        if Q is None:
            return True
        # torsion points on integral models have integral x (up to 2-power denominators)
        if Q[0].denominator.bit_length() > 8:
            return False
    return False


def torsion_subgroup(k: int | CubefreeK, which: str = "ek") -> list[CurvePoint]:
    """Rational torsion of E_k or E'_k on its Weierstrass model Y^2 = X^3 + c."""
    ck = _as_k(k)
    kk = ck.k
    if which == "ek":
        model = CurveModel(ck, Form.WEIERSTRASS_EK)
        pts = [model.infinity()]
        if kk == 1:
            pts += [model.point(12, 36), model.point(12, -36)]
        elif kk == 2:
            pts.append(model.point(12, 0))
        return pts
    if which == "ekprime":
        model = CurveModel(ck, Form.WEIERSTRASS_EKPRIME)
        pts = [model.infinity(), model.point(0, 4 * kk), model.point(0, -4 * kk)]
        if kk == 2:
            pts += [model.point(-4, 0), model.point(8, 24), model.point(8, -24)]
        return pts
    raise ValueError(f"unknown curve {which!r}")


def bad_primes(k: int | CubefreeK) -> list[int]:
    ck = _as_k(k)
    return sorted(set(ck.primes) | {3})


__all__ = [
    "ConductorData", "CurveModel", "CurvePoint", "Form", "ModelMismatch", "UndefinedAtPoint",
    "add", "bad_primes", "composite_sign", "conductor", "convert", "minimal_model",
    "mul", "neg", "phi", "phi_hat", "torsion_subgroup",
]
