import math

import pytest

from planarcycles.bifurc import (bracket_fold, count_cycles, perturb_semistable, phi_surface,
                                 quintic, rotated_sweep, solve_semistable, uniqueness_scan)
from planarcycles.errors import CycleLost
from planarcycles.field import FamilySpec
from planarcycles.retmap import first_return

A_STAR = -0.22420341189462387
Y_STAR = 1.6688450069249763


@pytest.fixture(scope="module")
def sol():
    return solve_semistable(1.0, -1.0)


def test_counts_along_a():
    assert tuple(count_cycles(1.0, -1.0, 0.0)) == (1, 0)
    two = count_cycles(1.0, -1.0, -0.1)
    assert tuple(two) == (2, 0)
    assert two.y0s == pytest.approx((1.3259, 5.49997), abs=1e-4)
    assert two.multiplicity == 2


def test_energy_bound_has_no_cycles():
    # a = -b^2 / (4|c|) makes x F(x) a perfect square, so energy never grows
    for b, c in ((1.0, -1.0), (2.0, -1.0), (1.0, -2.0)):
        assert tuple(count_cycles(b, c, -b * b / (4 * abs(c)))) == (0, 0)


def test_semistable_solution(sol):
    assert sol.converged
    assert sol.a_star == pytest.approx(A_STAR, abs=1e-9)
    assert sol.y0_star == pytest.approx(Y_STAR, abs=1e-8)
    assert sol.res_d < 1e-8 and sol.res_h < 1e-8
    assert sol.pprime2_certified
    assert sol.pprime2 < 0


def test_semistable_is_double_fixed_point(sol):
    s = first_return(quintic(sol.a_star, 1.0, -1.0), sol.y0_star)
    assert s.Py == pytest.approx(sol.y0_star, abs=1e-9)
    assert s.Pprime == pytest.approx(1.0, abs=1e-6)


def test_bracket_contains_solution(sol):
    fb = bracket_fold(1.0, -1.0)
    assert fb.a_lo <= sol.a_star <= fb.a_hi
    assert fb.counts == (0, 2)
    assert fb.y_guess == pytest.approx(sol.y0_star, rel=1e-3)


def test_chart_symmetry(sol):
    # (a, b, c) -> (-a, -b, -c) with the same section point
    m = solve_semistable(-1.0, 1.0)
    assert m.a_star == pytest.approx(-sol.a_star, rel=1e-12)
    assert m.y0_star == pytest.approx(sol.y0_star, rel=1e-12)


@pytest.mark.parametrize("s", [0.5, 2.0])
def test_scaling_law(sol, s):
    # (x, y) -> (s x, s y) maps (a, b, c) to (a / s^4, b / s^2, c)
    p = solve_semistable(s * s, -1.0, (sol.a_star * s**4, sol.y0_star / s))
    assert p.a_star / sol.a_star == pytest.approx(s**4, rel=1e-6)
    assert p.y0_star * s / sol.y0_star == pytest.approx(1.0, rel=1e-6)


def test_requires_opposite_signs():
    with pytest.raises(ValueError):
        bracket_fold(1.0, 1.0)
    with pytest.raises(ValueError):
        solve_semistable(0.0, -1.0)
    with pytest.raises(ValueError):
        phi_surface([1.0], [1.0])


def test_phi_surface_warm_start():
    surf = phi_surface([1.0, 4.0], [-1.0, -2.0])
    assert surf.all_converged
    assert surf.warm_source[(4.0, -1.0)] == [1.0, -1.0]
    assert surf.solution(4.0, -1.0).a_star == pytest.approx(16 * A_STAR, rel=1e-6)
    r = surf.solution(4.0, -2.0).a_star / surf.solution(1.0, -2.0).a_star
    assert r == pytest.approx(16.0, rel=1e-6)


def test_strongly_repelling_cycle_beside_node():
    # c = -2 makes the origin a node and the cycle multiplier about e^18
    cnt = count_cycles(1.0, -2.0, 0.0)
    assert tuple(cnt) == (1, 0)
    rev = count_cycles(-1.0, 2.0, 0.0)
    assert cnt.y0s == pytest.approx(rev.y0s, rel=1e-9)


def test_uniqueness_scan(sol):
    us = uniqueness_scan(1.0, -1.0, sol.a_star)
    assert us.transitions == 1
    assert not us.anomalies
    assert min(us.a_values) == pytest.approx(2 * sol.a_star)


def test_perturbation_counts(sol):
    out = perturb_semistable(sol, [-1e-3, -1e-4, 1e-4, 1e-3])
    assert [(p.n_hyperbolic, p.n_semistable) for p in out] == [(0, 0), (0, 0), (2, 0), (2, 0)]
    with pytest.raises(ValueError):
        perturb_semistable(sol, [0.5])


def test_rotated_sweep_monotone(tmp_path):
    res = rotated_sweep(FamilySpec("eq2", {"b": 1.0}), (0.5, 1.5), 11)
    assert res.values == pytest.approx([-0.5 - 0.1 * k for k in range(11)])
    assert not res.lost
    assert res.monotone()
    assert res.y_star[5][0] == pytest.approx(1.2544168, abs=1e-6)
    res.write_csv(tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "lambda,c,y0"


def test_rotated_sweep_loses_cycle_at_fold():
    spec = FamilySpec("eq2", {"a": A_STAR + 1e-3, "b": 1.0})
    with pytest.raises(CycleLost):
        rotated_sweep(spec, (1.0, 0.9), 3, y_range=(0.5, 4.0), strict=True)
