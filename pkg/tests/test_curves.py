import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cubesum.arith import CubefreeK
from cubesum.curves import (
    CurveModel, CurvePoint, Form, ModelMismatch, UndefinedAtPoint, add, beta3, composite_sign,
    conductor, convert, is_torsion, minimal_model, mul, neg, parse_fraction, phi, phi_hat,
    torsion_subgroup,
)
from cubesum.surfaces import scan_box


def _harvest(n=100):
    """Points on E_k (Weierstrass) taken from a small S3 scan."""
    pts = []
    for smp in scan_box("s3", 4):
        for p in smp.points:
            if p.model.form is Form.CUBIC_EK:
                pts.append(convert(p, Form.WEIERSTRASS_EK))
            else:
                try:
                    pts.append(convert(p, Form.WEIERSTRASS_EKPRIME))
                except UndefinedAtPoint:
                    pass
        if len(pts) >= n:
            break
    return pts[:n]


HARVEST = _harvest()


def test_conductor_examples():
    assert conductor(2).value == 36
    assert conductor(19).value == 9747
    assert conductor(9).value == 243
    assert [beta3(k) for k in (2, 7, 1, 8, 4, 5, 3, 6)] == [0, 0, 1, 1, 1, 1, 3, 3]


def _away_from_3(n):
    while n % 3 == 0:
        n //= 3
    return n


@given(st.sampled_from([2, 5, 7, 11, 13, 17, 19]), st.sampled_from([1, 3, 9, 10, 19, 31, 43]))
def test_conductor_ignores_square_exponents(p, m):
    if m % p == 0:
        return
    a, b = conductor(p * m), conductor(p * p * m)
    # the prime-to-3 part never moves; the 3-part follows k mod 9
    assert _away_from_3(a.value) == _away_from_3(b.value)
    if a.beta3 == b.beta3:
        assert a.value == b.value


def test_minimal_model_examples():
    assert minimal_model(9902523).constant == 24514990441382
    assert minimal_model(9902523).ainvs[2] == 1
    assert minimal_model(1683200989470).constant == 708291392738196762720225
    assert minimal_model(2).constant == 1
    assert str(minimal_model(1144421889)) == "y^2 + y = x^3 + 327425365005582080"


@given(st.integers(1, 10**9))
def test_minimal_constant_relation(k):
    try:
        ck = CubefreeK.of(k)
    except ValueError:
        return
    c = minimal_model(ck).constant
    assert (4 * c == k * k) if k % 2 == 0 else (4 * c + 1 == k * k)


def test_model_parity_enforced():
    with pytest.raises(ValueError):
        CurveModel(CubefreeK.of(3), Form.MINIMAL_EKPRIME_EVEN)


def test_points_checked_on_construction():
    m = CurveModel.make(9, Form.CUBIC_EK)
    m.point(1, 2)
    with pytest.raises(ValueError):
        m.point(1, 3)


def test_convert_examples():
    p = CurveModel.make(9, Form.CUBIC_EK).point(1, 2)
    w = convert(p, Form.WEIERSTRASS_EK)
    assert (w.x, w.y) == (36, 108)
    assert convert(w, Form.CUBIC_EK) == p
    k = 19
    t = CurveModel.make(k, Form.WEIERSTRASS_EKPRIME).point(0, 4 * k)
    assert (lambda q: (q.x, q.y))(convert(t, minimal_model(k).form)) == (0, (k - 1) // 2)
    with pytest.raises(UndefinedAtPoint):
        convert(t, Form.CUBIC_EKPRIME)
    with pytest.raises(ModelMismatch):
        convert(p, Form.WEIERSTRASS_EKPRIME)


def test_convert_at_antipodal_cubic_point_is_identity():
    # x + y = 0 only happens at the point at infinity of x^3 + y^3 = k
    p = CurveModel.make(9, Form.WEIERSTRASS_EK).infinity()
    assert convert(p, Form.CUBIC_EK).is_infinity


def test_convert_round_trips_on_harvest():
    for p in HARVEST:
        if p.model.form is Form.WEIERSTRASS_EK:
            forms = [Form.CUBIC_EK]
        else:
            forms = [Form.CUBIC_EKPRIME, minimal_model(p.model.k).form]
        for f in forms:
            q = convert(p, f)
            assert convert(q, p.model.form) == p


def test_phi_examples():
    img = phi(CurveModel.make(9, Form.CUBIC_EK).point(1, 2))
    assert (img.x, img.y) == (4, Fraction(-9, 2))
    img = phi(CurveModel.make(6, Form.CUBIC_EK).point(Fraction(17, 21), Fraction(37, 21)))
    assert img.x * img.y * (img.x + img.y) == 6
    img = phi(CurveModel.make(2, Form.CUBIC_EK).point(1, 1))
    assert (img.x, img.y) == (1, -2)
    with pytest.raises(UndefinedAtPoint):
        phi(CurveModel.make(1, Form.CUBIC_EK).point(1, 0))


def test_phi_hat_examples():
    k = 9
    with pytest.raises(UndefinedAtPoint):
        phi_hat(CurveModel.make(k, Form.WEIERSTRASS_EKPRIME).point(0, 4 * k))
    assert phi_hat(CurveModel.make(k, Form.WEIERSTRASS_EKPRIME).infinity()).is_infinity
    P = convert(CurveModel.make(k, Form.CUBIC_EK).point(1, 2), Form.WEIERSTRASS_EK)
    img = phi_hat(convert(phi(P), Form.WEIERSTRASS_EKPRIME))
    assert img in (mul(3, P), neg(mul(3, P)))


def test_composite_sign_is_constant():
    signs = {composite_sign(p) for p in HARVEST
             if p.model.form is Form.WEIERSTRASS_EK and not is_torsion(p)}
    assert signs == {-1}


def test_group_law_basics():
    k = 6
    m = CurveModel.make(k, Form.WEIERSTRASS_EKPRIME)
    t = m.point(0, 4 * k)
    assert mul(3, t).is_infinity
    P = convert(phi(CurveModel.make(k, Form.CUBIC_EK).point(Fraction(17, 21), Fraction(37, 21))),
                Form.WEIERSTRASS_EKPRIME)
    assert add(P, m.infinity()) == P
    assert add(P, neg(P)).is_infinity
    with pytest.raises(ModelMismatch):
        add(P, CurveModel.make(k, Form.WEIERSTRASS_EK).infinity())
    with pytest.raises(ModelMismatch):
        mul(2, CurveModel.make(9, Form.CUBIC_EK).point(1, 2))


def test_minimal_negation_convention():
    m = minimal_model(19)
    P = convert(CurveModel.make(19, Form.CUBIC_EKPRIME).point(*_prime_point_19()), m.form)
    assert (neg(P).x, neg(P).y) == (P.x, -P.y - 1)


def _prime_point_19():
    # phi of (3, -2) on x^3 + y^3 = 19
    q = phi(CurveModel.make(19, Form.CUBIC_EK).point(3, -2))
    return q.x, q.y


def test_doubling_matches_addition_on_harvest():
    assert len(HARVEST) == 100
    for p in HARVEST:
        assert mul(2, p) == add(p, p)


def test_associativity_on_harvest():
    by_model = {}
    for p in HARVEST:
        by_model.setdefault(p.model, []).append(p)
    checked = 0
    for pts in by_model.values():
        for a, b, c in itertools.islice(itertools.combinations(pts, 3), 5):
            assert add(add(a, b), c) == add(a, add(b, c))
            checked += 1
    assert checked > 0


def test_torsion_subgroups():
    assert [p.is_infinity for p in torsion_subgroup(19)] == [True]
    e1 = torsion_subgroup(1)
    assert len(e1) == 3 and all(mul(3, p).is_infinity for p in e1)
    e2 = torsion_subgroup(2)
    assert len(e2) == 2 and (e2[1].x, e2[1].y) == (12, 0)
    assert convert(CurveModel.make(2, Form.CUBIC_EK).point(1, 1), Form.WEIERSTRASS_EK) == e2[1]
    prime6 = torsion_subgroup(6, "ekprime")
    assert {(p.x, p.y) for p in prime6 if not p.is_infinity} == {(0, 24), (0, -24)}
    for p in torsion_subgroup(2, "ekprime"):
        assert is_torsion(p)


def test_e1_torsion_has_no_point_of_order_two():
    # X^3 - 432 has no rational root, so E_1 has no 2-torsion
    m = CurveModel.make(1, Form.WEIERSTRASS_EK)
    assert not any(m.contains(Fraction(x), 0) for x in range(-100, 100))


def test_point_json_round_trip():
    p = CurveModel.make(6, Form.CUBIC_EK).point(Fraction(17, 21), Fraction(37, 21))
    data = p.to_json()
    assert data == {"model": "cubic_ek", "x": "17/21", "y": "37/21"}
    assert CurvePoint.from_json(6, data) == p
    assert parse_fraction("-3") == -3
