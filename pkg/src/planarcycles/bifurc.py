"""Double (semistable) cycles of the quintic Lienard family and rotated sweeps.

The family is ``x' = y + a x^5 + b x^3 + c x, y' = -x``.  For ``c < 0 < b`` two
cycles coexist for ``a`` slightly below zero and none for ``a`` very negative;
they merge at ``a = phi(b, c)``.  The opposite chart ``b < 0 < c`` is mapped to
the canonical one exactly: reversing time and reflecting ``y -> -y`` turns
``(a, b, c)`` into ``(-a, -b, -c)``, and the cycles are centrally symmetric so
the section point is unchanged.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field as dc_field, asdict
from typing import Optional, Sequence

import numpy as np

from .cycles import CycleSet, _Displacement, _refine_root, find_cycles
from .errors import (CycleLabError, CycleLost, JacobianSingular, NewtonDiverged, NoFoldFound,
                     NoReturn, RangeUndetermined)
from .field import Family, FamilySpec, ROTATION_PARAMETER, VectorField2, build_family
from .flow import DEFAULT_CONFIG, IntegratorConfig
from .retmap import first_return, pprime2 as _pprime2, scan

log = logging.getLogger(__name__)

Y_LOW = 0.01
Y_START = 2.0
N_INITIAL = 40
PER_OCTAVE = 10


def quintic(a: float, b: float, c: float) -> VectorField2:
    return build_family(FamilySpec(Family.QUINTIC_LIENARD, {"a": a, "b": b, "c": c}))


@dataclass(frozen=True)
class CycleCount:
    n_hyperbolic: int
    n_semistable: int
    y0s: tuple[float, ...]
    y_max: float
    outer: str

    def __iter__(self):
        return iter((self.n_hyperbolic, self.n_semistable))

    @property
    def multiplicity(self) -> int:
        return self.n_hyperbolic + 2 * self.n_semistable


def _grow_range(field: VectorField2, cfg: IntegratorConfig, y_lo: float):
    samples = scan(field, (y_lo, Y_START), N_INITIAL, cfg)
    y_hi = Y_START
    negative_octaves = 0
    while True:
        top = samples[-1]
        if top.status == "Escaped":
            return samples, y_hi, "Escaped"
        if negative_octaves >= 2:
            return samples, y_hi, "Contracting"
        if 2 * y_hi > 0.5 * cfg.escape_radius:
            raise RangeUndetermined(
                f"outer displacement sign not settled below y={y_hi:g}")
        new = scan(field, (y_hi, 2 * y_hi), PER_OCTAVE + 1, cfg)[1:]
        samples += new
        y_hi *= 2
        if all(s.ok and s.Py < s.y for s in new):
            negative_octaves += 1
        else:
            negative_octaves = 0


def count_cycles(b: float, c: float, a: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                 y_lo: float = Y_LOW, return_set: bool = False):
    """Cycles of the quintic family, scanning an outward-growing range of ``y``.

    The range doubles until the outermost orbit escapes or two consecutive
    octaves contract throughout.
    """
    for v in (a, b, c):
        if not math.isfinite(v):
            raise ValueError("parameters must be finite")
    field = quintic(a, b, c)
    samples, y_hi, outer = _grow_range(field, cfg, y_lo)
    cs = find_cycles(field, (y_lo, y_hi), len(samples), cfg, build=False, samples=samples)
    res = CycleCount(len(cs.hyperbolic()), len(cs.semistable()),
                     tuple(cy.y0 for cy in cs.cycles), y_hi, outer)
    return (res, cs) if return_set else res


def _canonical(b: float, c: float) -> tuple[float, float, float]:
    if not (math.isfinite(b) and math.isfinite(c)):
        raise ValueError("parameters must be finite")
    if not b * c < 0:
        raise ValueError(f"a semistable cycle needs bc < 0, got b={b}, c={c}")
    return (b, c, 1.0) if c < 0 else (-b, -c, -1.0)


@dataclass(frozen=True)
class FoldBracket:
    b: float
    c: float
    a_lo: float
    a_hi: float
    y_guess: float
    counts: tuple[int, int]

    @property
    def a_mid(self) -> float:
        return 0.5 * (self.a_lo + self.a_hi)


def _side(cnt: CycleCount) -> Optional[int]:
    if cnt.n_semistable == 0 and cnt.n_hyperbolic == 2:
        return 2
    if cnt.n_semistable == 0 and cnt.n_hyperbolic == 0:
        return 0
    if cnt.n_semistable == 1 and cnt.n_hyperbolic == 0:
        return 1
    return None


def bracket_fold(b: float, c: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                 rel_width: float = 1e-6) -> FoldBracket:
    """Bisect ``a`` between a two-cycle and a zero-cycle member of the family.

    ``a = -b**2 / (4|c|)`` is the zero-cycle end: there ``x * F(x)`` is
    non-negative, so the energy never increases.
    """
    bb, cc, sgn = _canonical(b, c)
    a_lo = -bb * bb / (4.0 * abs(cc))
    lo_cnt = count_cycles(bb, cc, a_lo, cfg)
    if _side(lo_cnt) != 0:
        raise NoFoldFound(f"expected no cycles at a={a_lo}, found {tuple(lo_cnt)}")
    a_hi, hi_cnt = None, None
    for k in range(1, 12):
        trial = a_lo / 2**k
        try:
            cnt = count_cycles(bb, cc, trial, cfg)
        except RangeUndetermined:
            break
        if _side(cnt) == 2:
            a_hi, hi_cnt = trial, cnt
            break
        if _side(cnt) == 0:
            a_lo, lo_cnt = trial, cnt
    if a_hi is None:
        raise NoFoldFound(f"no two-cycle member found for b={b}, c={c}")
    while a_hi - a_lo > rel_width * (1.0 + abs(a_hi)):
        mid = 0.5 * (a_lo + a_hi)
        cnt = count_cycles(bb, cc, mid, cfg)
        side = _side(cnt)
        if side == 2:
            a_hi, hi_cnt = mid, cnt
        elif side == 0:
            a_lo, lo_cnt = mid, cnt
        elif side == 1:
            a_lo = a_hi = mid
            hi_cnt = cnt
            break
        else:
            raise NoFoldFound(f"unexpected cycle count {tuple(cnt)} at a={mid}")
    y_guess = float(np.mean(hi_cnt.y0s))
    if sgn < 0:
        return FoldBracket(b, c, -a_hi, -a_lo, y_guess, (2, 0))
    return FoldBracket(b, c, a_lo, a_hi, y_guess, (0, 2))


@dataclass
class SemistableSolution:
    b: float
    c: float
    a_star: float
    y0_star: float
    res_d: float
    res_h: float
    pprime2: float
    pprime2_err: float
    converged: bool
    iterations: int
    reason: str = ""

    @property
    def pprime2_certified(self) -> bool:
        return abs(self.pprime2) > 10.0 * self.pprime2_err

    def to_json(self) -> dict:
        return asdict(self)


def _residual(bb, cc, a, y, cfg):
    s = first_return(quintic(a, bb, cc), y, cfg)
    return np.array([s.Py - y, s.h])


def _newton(bb, cc, a, y, cfg, tol=1e-12, max_iter=50):
    F = _residual(bb, cc, a, y, cfg)
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(F)) < tol:
            return a, y, F, it - 1
        ha = 1e-5 * max(abs(a), 1e-3)
        hy = 1e-5 * max(abs(y), 1e-3)
        J = np.empty((2, 2))
        J[:, 0] = (_residual(bb, cc, a + ha, y, cfg) - _residual(bb, cc, a - ha, y, cfg)) / (2 * ha)
        J[:, 1] = (_residual(bb, cc, a, y + hy, cfg) - _residual(bb, cc, a, y - hy, cfg)) / (2 * hy)
        if not np.all(np.isfinite(J)) or abs(np.linalg.det(J)) < 1e-14 * np.abs(J).max() ** 2:
            raise JacobianSingular(f"singular Jacobian at a={a}, y={y}")
        step = np.linalg.solve(J, -F)
        lam = 1.0
        norm0 = np.linalg.norm(F)
        while True:
            try:
                Fn = _residual(bb, cc, a + lam * step[0], y + lam * step[1], cfg)
                if np.linalg.norm(Fn) < norm0:
                    break
            except CycleLabError:
                pass
            lam *= 0.5
            if lam < 2.0**-20:
                if norm0 < 1e-9:
                    return a, y, F, it
                raise NewtonDiverged(f"damping floor reached at a={a}, y={y}")
        a, y, F = a + lam * step[0], y + lam * step[1], Fn
        if abs(lam * step[0]) < 1e-15 * max(1, abs(a)) and abs(lam * step[1]) < 1e-15 * y:
            return a, y, F, it
    if np.max(np.abs(F)) < 1e-8:
        return a, y, F, max_iter
    raise NewtonDiverged(f"no convergence in {max_iter} iterations")


def solve_semistable(b: float, c: float, init: Optional[FoldBracket | tuple[float, float]] = None,
                     cfg: IntegratorConfig = DEFAULT_CONFIG) -> SemistableSolution:
    """Damped Newton on ``(P_a(y) - y, h_a(y)) = 0`` for the double cycle."""
    bb, cc, sgn = _canonical(b, c)
    if init is None:
        init = bracket_fold(b, c, cfg)
    if isinstance(init, FoldBracket):
        a0, y0 = init.a_mid, init.y_guess
    else:
        a0, y0 = (float(v) for v in init)
    a0 *= sgn
    try:
        a, y, F, it = _newton(bb, cc, a0, y0, cfg)
    except NoReturn as e:
        raise NewtonDiverged(f"orbit lost during Newton: {e}") from e
    field = quintic(a, bb, cc)
    try:
        p2, p2err = _pprime2(field, y, cfg, return_error=True)
    except CycleLabError:
        p2, p2err = math.nan, math.inf
    res_d, res_h = abs(F[0]), abs(F[1])
    converged = res_d < 1e-8 and res_h < 1e-8
    return SemistableSolution(float(b), float(c), float(sgn * a), float(y), float(res_d),
                              float(res_h), float(p2), float(p2err), bool(converged), it,
                              "" if converged else "residual above 1e-8")


@dataclass
class PhiSurface:
    b_grid: tuple[float, ...]
    c_grid: tuple[float, ...]
    nodes: dict = dc_field(default_factory=dict)
    warm_source: dict = dc_field(default_factory=dict)
    failures: dict = dc_field(default_factory=dict)

    def solution(self, b, c) -> Optional[SemistableSolution]:
        return self.nodes.get((b, c))

    @property
    def all_converged(self) -> bool:
        return not self.failures and all(s.converged for s in self.nodes.values())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["b", "c", "a_star", "y0_star", "res_d", "res_h", "converged"])
            for b in self.b_grid:
                for c in self.c_grid:
                    s = self.nodes.get((b, c))
                    if s is None:
                        w.writerow([repr(b), repr(c), "nan", "nan", "nan", "nan", "False"])
                    else:
                        w.writerow([repr(s.b), repr(s.c), repr(s.a_star), repr(s.y0_star),
                                    repr(s.res_d), repr(s.res_h), str(s.converged)])

    def to_json(self) -> dict:
        out = []
        for b in self.b_grid:
            for c in self.c_grid:
                s = self.nodes.get((b, c))
                entry = {"b": b, "c": c, "warm_start": self.warm_source.get((b, c))}
                if s is not None:
                    entry.update(s.to_json())
                if (b, c) in self.failures:
                    entry["failure"] = self.failures[(b, c)]
                out.append(entry)
        return {"b_grid": list(self.b_grid), "c_grid": list(self.c_grid), "nodes": out}

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")


def phi_surface(b_grid: Sequence[float], c_grid: Sequence[float],
                cfg: IntegratorConfig = DEFAULT_CONFIG) -> PhiSurface:
    """Solve the double-cycle condition on a grid, warm-starting row-major from neighbours.

    The warm start uses the exact rescaling ``phi(b s^2, c) = s^4 phi(b, c)``
    from the neighbour; any failure falls back to a cold fold bracket.
    """
    b_grid = tuple(float(b) for b in b_grid)
    c_grid = tuple(float(c) for c in c_grid)
    bad = [(b, c) for b in b_grid for c in c_grid if not b * c < 0]
    if bad:
        raise ValueError(f"grid nodes with bc >= 0: {bad}")
    surf = PhiSurface(b_grid, c_grid)
    for i, b in enumerate(b_grid):
        for j, c in enumerate(c_grid):
            neighbours = []
            if j > 0:
                neighbours.append((b, c_grid[j - 1]))
            if i > 0:
                neighbours.append((b_grid[i - 1], c))
            sol = None
            for nb in neighbours:
                ns = surf.nodes.get(nb)
                if ns is None or not ns.converged or ns.b * b <= 0 or ns.c * c <= 0:
                    continue
                r = b / ns.b
                guess = (ns.a_star * r * r, ns.y0_star / math.sqrt(r))
                try:
                    sol = solve_semistable(b, c, guess, cfg)
                except CycleLabError as e:
                    log.info("warm start from %s failed at %s: %s", nb, (b, c), e)
                    sol = None
                if sol is not None and sol.converged:
                    surf.warm_source[(b, c)] = list(nb)
                    break
                sol = None
            if sol is None:
                try:
                    sol = solve_semistable(b, c, None, cfg)
                    surf.warm_source[(b, c)] = None
                except CycleLabError as e:
                    surf.failures[(b, c)] = f"{type(e).__name__}: {e}"
                    continue
            surf.nodes[(b, c)] = sol
            if not sol.converged:
                surf.failures[(b, c)] = sol.reason
    return surf


@dataclass
class UniquenessScan:
    a_values: list[float]
    counts: list[tuple[int, int]]
    transitions: int
    anomalies: list[tuple[float, str]]
    truncated_at: Optional[float] = None


def uniqueness_scan(b: float, c: float, a_star: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                    step: Optional[float] = None) -> UniquenessScan:
    """Cycle counts on a grid of ``a`` between ``2 a*`` and zero (zero excluded).

    At ``a = 0`` the outer cycle has gone to infinity, so the grid stops short of it.
    The scan also stops once the outer cycle has grown past a hundredth of the
    escape radius and the next member loses it to escape; ``truncated_at`` records
    that ``a``. Counts are taken in the chart with ``c < 0``; the map ``(a, b, c) -> (-a, -b, -c)``
    reverses time and keeps every cycle.
    """
    bb, cc, sgn = _canonical(b, c)
    step = (abs(a_star) + 1.0) * 1e-2 if step is None else step
    n = int(math.floor(abs(a_star) * 2 / step))
    a_values = [2 * a_star + math.copysign(k * step, -a_star) for k in range(n + 1)]
    a_values = [a for a in a_values if a * a_star > 0]
    counts, sides, anomalies = [], [], []
    outer_y, truncated_at = 0.0, None
    for i, a in enumerate(a_values):
        try:
            cnt = count_cycles(bb, cc, sgn * a, cfg)
        except CycleLabError as e:
            anomalies.append((a, type(e).__name__))
            counts.append((-1, -1))
            sides.append(None)
            continue
        if (tuple(cnt) == (1, 0) and cnt.outer == "Escaped" and sides and sides[-1] == 2
                and outer_y > 1e-2 * cfg.escape_radius):
            truncated_at = a
            a_values = a_values[:i]
            break
        if cnt.y0s:
            outer_y = max(cnt.y0s)
        counts.append(tuple(cnt))
        side = _side(cnt)
        if side not in (0, 2):
            anomalies.append((a, f"count {tuple(cnt)}"))
        sides.append(side)
    transitions = sum(1 for s0, s1 in zip(sides, sides[1:]) if s0 != s1)
    return UniquenessScan(a_values, counts, transitions, anomalies, truncated_at)


@dataclass
class SweepResult:
    lambdas: list[float]
    param: str
    values: list[float]
    y_star: list[list[float]]
    lost: list[tuple[int, float]] = dc_field(default_factory=list)

    def monotone(self, index: int = 0, tol: float = 1e-9) -> bool:
        ys = [row[index] for row in self.y_star if math.isfinite(row[index])]
        d = np.diff(ys)
        return bool(np.all(d > tol) or np.all(d < -tol))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            ncyc = len(self.y_star[0]) if self.y_star else 0
            w.writerow(["lambda", self.param] + [f"y{k}" for k in range(ncyc)])
            for lam, v, row in zip(self.lambdas, self.values, self.y_star):
                w.writerow([repr(lam), repr(v)] + [repr(float(y)) for y in row])


def _track(field, y_prev, cfg):
    disp = _Displacement(field, cfg)
    for width in (1.05, 1.2, 1.5):
        lo, hi = y_prev / width, y_prev * width
        glo, ghi = disp(lo), disp(hi)
        if math.isfinite(glo) or math.isfinite(ghi):
            if not (math.isnan(glo) or math.isnan(ghi)) and (glo < 0) != (ghi < 0):
                r = _refine_root(disp, lo, hi, glo, ghi)
                if r is not None:
                    return r
    return None


def rotated_sweep(spec: FamilySpec, lam_range: tuple[float, float], n: int,
                  cfg: IntegratorConfig = DEFAULT_CONFIG, y_range=(0.05, 10.0),
                  strict: bool = False) -> SweepResult:
    """Follow each hyperbolic cycle through the rotation parameter ``lambda = -c``."""
    if spec.kind not in ROTATION_PARAMETER:
        raise ValueError(f"no rotation parameter for family {spec.kind.value}")
    param, factor = ROTATION_PARAMETER[spec.kind]
    lo, hi = (float(v) for v in lam_range)
    lambdas = [lo] if lo == hi else list(np.linspace(lo, hi, int(n)))
    values = [lam / factor for lam in lambdas]
    first = find_cycles(build_family(spec.with_params(**{param: values[0]})), y_range, 60, cfg,
                        build=False)
    current = [cy.y0 for cy in first.hyperbolic()]
    rows = [list(current)]
    lost = []
    for k in range(1, len(lambdas)):
        field = build_family(spec.with_params(**{param: values[k]}))
        row = []
        for idx, y_prev in enumerate(current):
            y_new = math.nan
            if math.isfinite(y_prev):
                r = _track(field, y_prev, cfg)
                if r is None:
                    lost.append((idx, lambdas[k - 1]))
                    if strict:
                        raise CycleLost(f"cycle {idx} lost after lambda={lambdas[k - 1]}",
                                        last_good=lambdas[k - 1])
                else:
                    y_new = r
            row.append(y_new)
        current = row
        rows.append(row)
    return SweepResult(lambdas, param, values, rows, lost)


@dataclass(frozen=True)
class PerturbationCount:
    delta: float
    a: float
    n_hyperbolic: int
    n_semistable: int


def perturb_semistable(sol: SemistableSolution, deltas: Sequence[float],
                       cfg: IntegratorConfig = DEFAULT_CONFIG, n: int = 40) -> list[PerturbationCount]:
    """Cycle counts at ``a* + delta`` inside the window ``y0* [1/2, 2]``."""
    if not sol.converged:
        raise ValueError("perturbation needs a converged solution")
    out = []
    for d in deltas:
        if abs(d) > 1e-2 * (1.0 + abs(sol.a_star)):
            raise ValueError(f"offset {d} too large for a local perturbation")
        a = sol.a_star + d
        cs = find_cycles(quintic(a, sol.b, sol.c), (0.5 * sol.y0_star, 2.0 * sol.y0_star), n, cfg,
                         build=False)
        out.append(PerturbationCount(float(d), a, len(cs.hyperbolic()), len(cs.semistable())))
    return out
