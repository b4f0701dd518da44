import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import fsolve

from planarcycles.cycles import find_cycles, surrounds_point
from planarcycles.errors import DegenerateSystem
from planarcycles.field import FamilySpec, Polynomial2, VectorField2, X, Y, build_family
from planarcycles.flow import IntegratorConfig
from planarcycles.verify import (check_quadratic_system, eq1_normal_form, quadratic_singularities,
                                 resultant_y, slow_fast_focus_frame, verify_prop1, verify_prop2,
                                 verify_prop3)

coef = st.floats(-2, 2, allow_nan=False).filter(lambda v: abs(v) > 1e-3)


def test_singularities_simple_example():
    # y' = -x + x^2 vanishes at x = 0 and x = 1; x' = y forces y = 0
    s = quadratic_singularities({"a": 0, "b": 0, "c": 0, "d": 1.0, "f": 0})
    assert [(p.x, p.y, p.type) for p in s] == [(0.0, 0.0, "Antisaddle"), (1.0, 0.0, "Saddle")]
    assert s[0].det == pytest.approx(1.0) and s[1].det == pytest.approx(-1.0)


def test_resultant_of_circle_and_line():
    # x^2 + y^2 - 1 and y - x meet where 2 x^2 - 1 = 0
    r = resultant_y(X**2 + Y**2 - 1, Y - X)
    assert np.allclose(r / r[-1], [-0.5, 0.0, 1.0])


@settings(max_examples=25)
@given(st.tuples(coef, coef, coef, coef, coef))
def test_singularities_against_multistart_newton(p):
    params = dict(zip("abcdf", p))
    f = build_family(FamilySpec("eq1", params))
    sings = quadratic_singularities(params)
    for s in sings:
        assert max(map(abs, f(s.x, s.y))) < 1e-9
    # every root found from a grid of starts must be in the list
    found = []
    for x0 in np.linspace(-6, 6, 9):
        for y0 in np.linspace(-6, 6, 9):
            z, info, ok, _ = fsolve(lambda v: f(v[0], v[1]), [x0, y0], full_output=True, xtol=1e-13)
            if ok == 1 and max(map(abs, f(*z))) < 1e-11 and np.hypot(*z) < 50:
                found.append(z)
    for z in found:
        assert min(math.hypot(z[0] - s.x, z[1] - s.y) for s in sings) < 1e-6


def test_degenerate_system():
    with pytest.raises(DegenerateSystem):
        quadratic_singularities(VectorField2(X * Y, X))


def test_eq1_normal_form_at_origin_is_identity():
    p = {"a": 0.3, "b": -0.4, "c": 0.2, "d": 1.1, "f": -0.7}
    f = build_family(FamilySpec("eq1", p))
    assert eq1_normal_form(f) == pytest.approx(p)


def test_eq1_normal_form_rescales_linear_part():
    # x' = 2y + ..., y' = -0.5x: time and y rescaling give back y + c x, -x
    P = 2 * Y + 0.3 * X + 0.1 * X**2 + 0.2 * Y**2
    Q = -0.5 * X + 0.4 * X**2 + 0.6 * X * Y
    nf = eq1_normal_form(VectorField2(P, Q))
    g, beta = 1.0, 0.5  # sqrt(2 * 0.5) = 1; beta = 1 / (g * 2)
    assert nf == pytest.approx({"a": 0.1, "b": 0.2 * beta**2, "c": 0.3, "d": 0.4 / beta, "f": 0.6})
    assert eq1_normal_form(VectorField2(P + X * Y, Q)) is None


def test_hopf_sign_of_small_origin_cycles():
    # first Lyapunov coefficient of the quadratic family at c = 0 is proportional to d(2a + f);
    # a small cycle needs c of the opposite sign
    cfg = IntegratorConfig(max_time=500.0)
    for d, c in ((1.0, -0.01), (-1.0, 0.01)):
        f = build_family(FamilySpec("eq1", {"a": 0.5, "d": d, "c": c}))
        cs = find_cycles(f, (1e-3, 0.5), 40, cfg)
        assert len(cs) == 1 and surrounds_point(cs.cycles[0], (0.0, 0.0))
        assert c * d * (2 * 0.5) < 0
        g = build_family(FamilySpec("eq1", {"a": 0.5, "d": d, "c": -c}))
        assert not find_cycles(g, (1e-3, 0.5), 40, cfg).cycles


def test_check_quadratic_system_records_sign():
    params = {"a": 1.0014586905202103, "b": -0.8783649680558403, "c": -0.05923610227345977,
              "d": 1.9229487992049545, "f": 1.846628774655147}
    res = check_quadratic_system(params)
    assert len(res["cycles"]) == 1
    assert res["cycles"][0]["sign_quantity"] < 0
    assert [v[0] for v in res["violations"]] == ["B_origin_sign"]


def test_prop1_report_is_deterministic():
    r1 = verify_prop1(30, seed=3)
    r2 = verify_prop1(30, seed=3)
    assert r1.dumps() == r2.dumps()
    data = json.loads(r1.dumps())
    assert data["proposition"] == "P1" and data["config"]["seed"] == 3
    names = [c["name"] for c in data["checks"]]
    assert names[1].startswith("A_") and names[-1].startswith("F_")
    for cand in data["counterexample_candidates"]:
        assert {"params", "seed", "integrator", "check"} <= set(cand)
    with pytest.raises(ValueError):
        verify_prop1(0)


def test_prop2_same_sign_node_has_no_semistable():
    rep = verify_prop2([1.0], [1.0])
    assert rep.passed
    assert rep.checks[0].name == "no_semistable(1.0,1.0)"


def test_prop3_truth_table_and_mirror():
    rep = verify_prop3(0.1, [0.0, 0.5, -0.5, 1.2, -1.2])
    assert rep.passed and rep.exit_code == 0
    statuses = {c.name: c.status for c in rep.checks}
    assert statuses["a=0.0"] == "Pass"
    assert statuses["mirror(a=±0.5)"] == "Pass"
    assert rep.check("mirror(a=±0.5)").data["max_polyline_gap"] < 1e-6
    assert "boundary_orbit(a=0)" in statuses
    with pytest.raises(ValueError):
        verify_prop3(0.0, [0.5])


def test_slow_fast_frame_moves_equilibrium_to_origin():
    for a in (-0.8, 0.2, 1.3):
        f, off = slow_fast_focus_frame(a, 0.1)
        assert off == pytest.approx((a, 2 * a * a - a**4))
        assert f(0.0, 0.0) == pytest.approx((0.0, 0.0), abs=1e-14)
