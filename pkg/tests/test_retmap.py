import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from planarcycles.errors import NonTransverse
from planarcycles.field import FamilySpec, build_family, harmonic
from planarcycles.flow import IntegratorConfig
from planarcycles.retmap import first_return, pprime2, pprime_variational, scan, write_scan_csv

EQ2 = build_family(FamilySpec("eq2", {"b": 1.0, "c": -1.0}))


def focus(c):
    return build_family(FamilySpec("eq1", {"c": c}))


@given(st.floats(0.01, 50.0))
def test_harmonic_return_is_identity(y):
    s = first_return(harmonic(), y)
    assert s.Py == pytest.approx(y, rel=1e-9)
    assert s.T == pytest.approx(2 * math.pi, abs=1e-8)
    assert s.h == 0.0
    assert s.Pprime == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("c", [-0.1, 0.05, 0.3])
def test_linear_focus_closed_form(c):
    # the return map of x' = y + c x, y' = -x is multiplication by exp(c pi / w)
    w = math.sqrt(1 - c * c / 4)
    k = math.exp(c * math.pi / w)
    for y in (0.1, 1.0, 5.0):
        s = first_return(focus(c), y)
        assert s.Py == pytest.approx(k * y, rel=1e-9)
        assert s.T == pytest.approx(2 * math.pi / w, rel=1e-9)
        assert s.h == pytest.approx(c * 2 * math.pi / w, rel=1e-9)
        assert s.Pprime == pytest.approx(k, rel=1e-8)
    assert pprime2(focus(c), 1.0) == pytest.approx(0.0, abs=1e-4)


def test_first_return_against_scipy_events():
    def ev(t, z):
        return z[0]

    ev.direction = 1
    for y in (0.3, 1.0, 1.25):
        s = first_return(EQ2, y)
        ref = solve_ivp(lambda t, z: EQ2(z[0], z[1]), (0, 50), [0.0, y], method="DOP853",
                        rtol=1e-12, atol=1e-14, events=ev)
        t_ev = [t for t in ref.t_events[0] if t > 1e-9][0]
        y_ev = [z[1] for t, z in zip(ref.t_events[0], ref.y_events[0]) if t > 1e-9][0]
        assert s.T == pytest.approx(t_ev, rel=1e-8)
        assert s.Py == pytest.approx(y_ev, rel=1e-8)


@pytest.mark.parametrize("y", [0.2, 0.7, 1.2])
def test_multiplier_formula_matches_variational(y):
    s = first_return(EQ2, y)
    assert s.Pprime == pytest.approx(y / s.Py * math.exp(s.h), rel=1e-12)
    assert pprime_variational(EQ2, y) == pytest.approx(s.Pprime, rel=1e-6)


def test_multiplier_matches_finite_difference_for_non_lienard_field():
    f = build_family(FamilySpec("eq1", {"a": 0.3, "b": 0.2, "c": -0.05, "d": 0.4, "f": 0.6}))
    y, e = 0.4, 1e-6
    fd = (first_return(f, y + e).Py - first_return(f, y - e).Py) / (2 * e)
    assert first_return(f, y).Pprime == pytest.approx(fd, rel=1e-5)
    assert pprime_variational(f, y) == pytest.approx(fd, rel=1e-5)


def test_return_map_monotone():
    ys = np.geomspace(0.05, 1.25, 25)
    ps = [first_return(EQ2, y).Py for y in ys]
    assert np.all(np.diff(ps) > 0)


def test_nontransverse_start():
    f = build_family(FamilySpec("eq1", {"b": -1.0}))
    with pytest.raises(NonTransverse):
        first_return(f, 1.0)


def test_invalid_start():
    with pytest.raises(ValueError):
        first_return(harmonic(), -1.0)
    with pytest.raises(ValueError):
        first_return(harmonic(), 1e5)


def test_scan_tags_escapes_and_time_limits(tmp_path):
    samples = scan(EQ2, (0.1, 4.0), 20)
    assert len(samples) == 20
    assert samples[0].y == pytest.approx(0.1) and samples[-1].y == pytest.approx(4.0)
    assert np.allclose(np.diff(np.log([s.y for s in samples])), math.log(40) / 19)
    assert {s.status for s in samples} == {"Ok", "Escaped"}
    assert all(s.displacement < 0 for s in samples if s.ok)
    short = scan(focus(-0.01), (0.5, 1.0), 3, IntegratorConfig(max_time=1.0))
    assert {s.status for s in short} == {"NoReturn"}
    write_scan_csv(samples, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "y,Py,T,h,Pprime,status"
    assert lines[-1].endswith("Escaped")


def test_scan_threads_match_serial():
    a = scan(EQ2, (0.1, 1.2), 12)
    b = scan(EQ2, (0.1, 1.2), 12, workers=3)
    assert a == b


def test_pprime2_with_error_estimate():
    f = build_family(FamilySpec("eq2", {"a": -0.22420341189462387, "b": 1.0, "c": -1.0}))
    val, err = pprime2(f, 1.6688450069249763, return_error=True)
    assert abs(val) > 5 * err
