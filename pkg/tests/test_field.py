import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from planarcycles.errors import ConfigError, NonFiniteParameter, NonPositiveEpsilon
from planarcycles.field import (X, Y, Family, FamilySpec, Polynomial2, VectorField2, build_family,
                                divergence_poly, eval_field, extract_params, harmonic, rotated_det)

coef = st.floats(-3, 3, allow_nan=False)
point = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


def eq1(**p):
    return build_family(FamilySpec(Family.QUADRATIC, p))


def test_family_instantiation_matches_equations():
    f = eq1(a=1.5, b=-0.5, c=0.25, d=2.0, f=-1.0)
    x, y = 0.3, -0.7
    assert f(x, y) == pytest.approx((y + 1.5 * x**2 - 0.5 * y**2 + 0.25 * x,
                                     -x + 2.0 * x**2 - 1.0 * x * y), abs=1e-15)
    g = build_family(FamilySpec("eq2", {"a": 2, "b": -1, "c": 0.5}))
    assert g(x, y) == pytest.approx((y + 2 * x**5 - x**3 + 0.5 * x, -x), abs=1e-15)
    h = build_family(FamilySpec("eq3", {"a": 0.4, "eps": 0.2}))
    assert h(x, y) == pytest.approx((y + x**4 - 2 * x**2, 0.2 * (0.4 - x)), abs=1e-15)
    q = build_family(FamilySpec("quartic", {"a": 1, "b": 2, "c": 3, "d": 4}))
    assert q(x, y) == pytest.approx((y - (x**4 + 2 * x**3 + 3 * x**2 + 4 * x), -x), abs=1e-15)


def test_all_zero_quadratic_is_harmonic():
    assert eq1() == harmonic()


def test_divergence_closed_forms():
    d = divergence_poly(eq1(a=1, b=0, c=2, d=0, f=1))
    assert d == 3 * X + 2
    assert d(0, 0) == 2
    assert divergence_poly(eq1(a=0.7, f=-1.4, c=0.3, b=5, d=-2)).degree == 0
    g = build_family(FamilySpec("eq2", {"a": 2, "b": -1, "c": 0.5}))
    assert divergence_poly(g) == 10 * X**4 - 3 * X**2 + 0.5
    h = build_family(FamilySpec("eq3", {"a": 0.4}))
    assert divergence_poly(h) == 4 * X**3 - 4 * X


@given(st.tuples(coef, coef, coef, coef, coef), point)
def test_divergence_matches_finite_differences(p, pt):
    f = eq1(**dict(zip("abcdf", p)))
    x, y = pt
    e = 1e-6
    fd = ((f.P(x + e, y) - f.P(x - e, y)) + (f.Q(x, y + e) - f.Q(x, y - e))) / (2 * e)
    assert f.divergence()(x, y) == pytest.approx(fd, abs=1e-6)


@given(st.sampled_from(["eq1", "eq2"]), coef, coef, point)
def test_rotated_det_identity(kind, c1, c2, pt):
    spec = FamilySpec(kind, {"a": 0.3, "b": -0.7})
    v = rotated_det(spec, c1, c2, pt)
    assert v + pt[0] ** 2 * (c1 - c2) == pytest.approx(0.0, abs=1e-12)


@given(st.lists(coef, min_size=4, max_size=4), point, point)
def test_shift_is_composition_with_translation(cs, off, pt):
    p = cs[0] * X**3 + cs[1] * X * Y**2 + cs[2] * Y + cs[3]
    q = p.shift(*off)
    assert q(*pt) == pytest.approx(p(pt[0] + off[0], pt[1] + off[1]), abs=1e-10)


@given(coef, coef, point)
def test_scale_is_composition_with_scaling(sx, sy, pt):
    p = X**2 * Y - 3 * Y**3 + X
    assert p.scale(sx, sy)(*pt) == pytest.approx(p(sx * pt[0], sy * pt[1]), abs=1e-10)


def test_polynomial_algebra():
    p = (X + Y) ** 2
    assert p == X**2 + 2 * X * Y + Y**2
    assert (p - p).degree == -1 or not np.any((p - p).coeffs)
    assert p.dx() == 2 * X + 2 * Y
    assert p.dy() == 2 * X + 2 * Y
    assert p[1, 1] == 2.0
    with pytest.raises(ValueError):
        _ = X**7


def test_translated_and_reversed_fields():
    f = eq1(a=1, d=1)
    t = f.translated(1.0, 0.0)
    assert t(0.2, 0.1) == pytest.approx(f(1.2, 0.1))
    r = f.reversed()
    assert r(0.3, 0.4) == pytest.approx(tuple(-v for v in f(0.3, 0.4)))
    m = f.mirrored()
    px, py = f(-0.3, 0.4)
    assert m(0.3, 0.4) == pytest.approx((-px, py))


def test_eval_field_and_extract_params_roundtrip():
    p = {"a": 0.5, "b": -1.0, "c": 0.1, "d": 2.0, "f": 3.0}
    f = eq1(**p)
    assert extract_params("eq1", f) == p
    assert eval_field(f, (1.0, 1.0)) == f(1.0, 1.0)
    spec = FamilySpec("eq3", {"a": -0.5, "eps": 0.05})
    assert extract_params("eq3", build_family(spec)) == pytest.approx(spec.params)


def test_family_spec_validation():
    with pytest.raises(ConfigError):
        FamilySpec("eq2", {"z": 1.0})
    with pytest.raises(NonFiniteParameter):
        FamilySpec("eq2", {"a": math.inf})
    with pytest.raises(NonFiniteParameter):
        FamilySpec("eq1", {"a": "nan"})
    with pytest.raises(NonPositiveEpsilon):
        FamilySpec("eq3", {"a": 0.5, "eps": 0.0})
    with pytest.raises(ConfigError):
        FamilySpec.from_json({"kind": "eq2", "params": {}, "extra": 1})
    with pytest.raises(ConfigError):
        FamilySpec.from_json({"kind": "eq9"})
    s = FamilySpec.from_json({"kind": "eq2", "params": {"a": "-0.25", "b": 1}})
    assert s.params == {"a": -0.25, "b": 1.0, "c": 0.0}
    assert FamilySpec("eq3", {"a": 0.2}).params["eps"] == 0.1
    assert FamilySpec.from_json(s.to_json()) == s


def test_kernel_table_layout():
    f = eq1(a=1, b=2, c=3, d=4, f=5)
    tab = f.kernel_table
    assert tab.shape == (7, 7, 7)
    assert np.array_equal(tab[0], f.P.coeffs)
    assert np.array_equal(tab[2], f.divergence().coeffs)
