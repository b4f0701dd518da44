import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from planarcycles.errors import ConfigError
from planarcycles.field import FamilySpec, build_family, harmonic
from planarcycles.flow import IntegratorConfig, integrate, section_crossings


def linear_focus(c):
    return build_family(FamilySpec("eq1", {"c": c}))


def test_harmonic_closed_form():
    tr = integrate(harmonic(), (0.0, 1.0), t_end=2 * math.pi)
    assert tr.reason == "TimeLimit"
    tt = np.linspace(0, 2 * math.pi, 97)
    z = tr(tt)
    assert np.max(np.abs(z[:, 0] - np.sin(tt))) < 1e-8
    assert np.max(np.abs(z[:, 1] - np.cos(tt))) < 1e-8
    assert np.max(np.abs(z[:, 2])) == 0.0
    assert tr.final[:2] == pytest.approx([0.0, 1.0], abs=1e-9)


def test_divergence_accumulator_on_linear_focus():
    c = -0.3
    tr = integrate(linear_focus(c), (0.0, 1.0), t_end=5.0)
    assert tr.s[-1] == pytest.approx(c * 5.0, abs=1e-12)


def test_global_error_shrinks_with_tolerance():
    # exact solution of x' = y + c x, y' = -x through (0, 1)
    c = 0.2
    w = math.sqrt(1 - c * c / 4)

    def exact(t):
        return math.exp(c * t / 2) * math.sin(w * t) / w

    errs = []
    for rtol in (1e-6, 1e-8, 1e-10):
        cfg = IntegratorConfig(rtol=rtol, atol=rtol * 1e-2)
        tr = integrate(linear_focus(c), (0.0, 1.0), cfg, t_end=10.0)
        errs.append(abs(tr.final[0] - exact(10.0)))
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 1e-8


def test_dense_output_between_nodes():
    c = 0.2
    w = math.sqrt(1 - c * c / 4)
    tr = integrate(linear_focus(c), (0.0, 1.0), IntegratorConfig(max_step=0.5), t_end=10.0)
    mid = 0.5 * (tr.t[:-1] + tr.t[1:])
    exact = np.exp(c * mid / 2) * np.sin(w * mid) / w
    assert np.max(np.abs(tr(mid)[:, 0] - exact)) < 1e-8


def test_agrees_with_scipy_on_quintic():
    f = build_family(FamilySpec("eq2", {"a": -0.1, "b": 1.0, "c": -1.0}))
    tr = integrate(f, (0.0, 1.3), t_end=20.0)
    ref = solve_ivp(lambda t, z: f(z[0], z[1]), (0, 20), [0.0, 1.3], method="DOP853",
                    rtol=1e-12, atol=1e-14)
    assert tr.final[:2] == pytest.approx(ref.y[:, -1], abs=1e-7)


def test_time_reversal_returns_to_start():
    f = build_family(FamilySpec("eq2", {"a": -0.1, "b": 1.0, "c": -1.0}))
    fwd = integrate(f, (0.3, 0.8), t_end=4.0)
    back = integrate(f.reversed(), fwd.final[:2], t_end=4.0)
    assert back.final[:2] == pytest.approx([0.3, 0.8], abs=1e-8)


def test_escape_detected():
    f = build_family(FamilySpec("eq2", {"b": 1.0, "c": -1.0}))
    tr = integrate(f, (0.0, 3.0))
    assert tr.reason == "Escaped"
    assert math.hypot(*tr.final[:2]) > 1e4


def test_stop_predicate():
    tr = integrate(harmonic(), (0.0, 1.0), t_end=10.0, stop=lambda t, z: z[1] < 0)
    assert tr.reason == "EventStop"
    assert tr.t_end < math.pi


def test_variational_matrix_of_harmonic_is_rotation():
    tr = integrate(harmonic(), (0.0, 1.0), t_end=1.0, variational=True)
    phi = tr.final[3:].reshape(2, 2)
    rot = np.array([[math.cos(1.0), math.sin(1.0)], [-math.sin(1.0), math.cos(1.0)]])
    assert phi == pytest.approx(rot, abs=1e-9)


def test_invalid_initial_points():
    with pytest.raises(ValueError):
        integrate(harmonic(), (math.nan, 0.0))
    with pytest.raises(ValueError):
        integrate(harmonic(), (0.0, 2e4))


@given(st.floats(0.05, 3.0), st.sampled_from([0.1, 0.37, math.inf]))
def test_section_crossings_independent_of_step_cap(y0, cap):
    f = build_family(FamilySpec("eq2", {"a": -0.1, "b": 1.0, "c": -1.0}))
    ref = section_crossings(integrate(f, (0.0, y0), t_end=15.0))
    got = section_crossings(integrate(f, (0.0, y0), IntegratorConfig(max_step=cap), t_end=15.0))
    assert len(got) == len(ref)
    for (t1, y1), (t2, y2) in zip(got, ref):
        assert t1 == pytest.approx(t2, abs=1e-7)
        assert y1 == pytest.approx(y2, abs=1e-7)


def test_harmonic_crossings_every_period():
    cr = section_crossings(integrate(harmonic(), (0.0, 1.0), t_end=20.0))
    assert [t for t, _ in cr] == pytest.approx([2 * math.pi * k for k in (1, 2, 3)], abs=1e-8)


def test_integrator_config_validation_and_json():
    cfg = IntegratorConfig(rtol=1e-9, max_time=50.0)
    assert IntegratorConfig.from_json(cfg.to_json()) == cfg
    assert cfg.to_json()["max_step"] is None
    with pytest.raises(ConfigError):
        IntegratorConfig(rtol=-1.0)
    with pytest.raises(ConfigError):
        IntegratorConfig.from_json({"rtol": 1e-8, "bogus": 1})
    with pytest.raises(ConfigError):
        IntegratorConfig.from_json({"atol": "x"})


def test_trajectory_csv(tmp_path):
    tr = integrate(harmonic(), (0.0, 1.0), t_end=2 * math.pi)
    p = tmp_path / "t.csv"
    tr.to_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "t,x,y,s"
    last = [float(v) for v in rows[-1].split(",")]
    assert last[1:3] == pytest.approx([0.0, 1.0], abs=1e-8)
    tr.to_csv(tmp_path / "u.csv", uniform=11)
    assert len((tmp_path / "u.csv").read_text().splitlines()) == 12
