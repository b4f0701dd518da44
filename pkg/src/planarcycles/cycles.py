"""Limit cycle detection from the displacement ``d(y) = P(y) - y`` and cycle geometry."""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq, minimize_scalar
from shapely.geometry import LineString

from .errors import CycleLabError, DegeneratePolyline, NoReturn, OnBoundary
from .field import Polynomial2, VectorField2
from .flow import DEFAULT_CONFIG, IntegratorConfig, Trajectory, integrate
from .retmap import ReturnSample, first_return, scan

log = logging.getLogger(__name__)

FIXED_POINT_TOL = 1e-9
TOL_H = 1e-7
CHORD_TOL = 1e-3
CANDIDATE_D = 1e-5
CANDIDATE_H = 1e-4
CENTER_REL = 1e-7
CENTER_RUN = 20


class CycleClass(str, Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    SEMISTABLE_OUTER_STABLE = "SemistableOuterStable"
    SEMISTABLE_INNER_STABLE = "SemistableInnerStable"
    DEGENERATE = "Degenerate"

    @property
    def is_semistable(self) -> bool:
        return self in (CycleClass.SEMISTABLE_INNER_STABLE, CycleClass.SEMISTABLE_OUTER_STABLE)

    @property
    def is_hyperbolic(self) -> bool:
        return self in (CycleClass.STABLE, CycleClass.UNSTABLE)


@dataclass(frozen=True, eq=False)
class LimitCycle:
    """A periodic orbit through ``(0, y0)`` of ``field``.

    ``offset`` is added to the field's coordinates to obtain the coordinates
    the polyline is expressed in (non-zero when the field was translated so
    that a singular point sits at the origin).
    """

    y0: float
    period: float
    multiplier: float
    h: float
    klass: CycleClass
    polyline: np.ndarray
    orientation: str
    min_y: float
    field: VectorField2
    orbit: Trajectory
    offset: tuple[float, float] = (0.0, 0.0)
    surrounds: tuple = ()

    def translated(self, dx: float, dy: float) -> "LimitCycle":
        ox, oy = self.offset
        return LimitCycle(self.y0, self.period, self.multiplier, self.h, self.klass,
                          self.polyline + np.array([dx, dy]), self.orientation,
                          self.min_y + dy, self.field, self.orbit, (ox + dx, oy + dy),
                          self.surrounds)

    def with_surrounds(self, pts) -> "LimitCycle":
        return LimitCycle(self.y0, self.period, self.multiplier, self.h, self.klass,
                          self.polyline, self.orientation, self.min_y, self.field,
                          self.orbit, self.offset, tuple(tuple(map(float, p)) for p in pts))

    def to_json(self) -> dict:
        return {"y0": self.y0, "period": self.period, "multiplier": self.multiplier,
                "class": self.klass.value, "orientation": self.orientation,
                "min_y": self.min_y}


@dataclass
class CycleSet:
    cycles: list[LimitCycle]
    y_range: tuple[float, float]
    n: int
    failures: list[tuple[float, str]] = dc_field(default_factory=list)
    notes: list[str] = dc_field(default_factory=list)
    samples: list[ReturnSample] = dc_field(default_factory=list)

    @property
    def center_detected(self) -> bool:
        return "CenterDetected" in self.notes

    def hyperbolic(self) -> list[LimitCycle]:
        return [c for c in self.cycles if c.klass.is_hyperbolic]

    def semistable(self) -> list[LimitCycle]:
        return [c for c in self.cycles if c.klass.is_semistable]

    def __len__(self):
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def to_json(self) -> list:
        return [c.to_json() for c in self.cycles]

    def write(self, json_path, polyline_stem=None) -> None:
        with open(json_path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")
        if polyline_stem is not None:
            for i, c in enumerate(self.cycles):
                np.savetxt(f"{polyline_stem}_{i}.csv", c.polyline, delimiter=",",
                           header="x,y", comments="", fmt="%.17g")


# ---------------------------------------------------------------------------
# polylines and closed-curve geometry


def _polyline_from_orbit(orbit: Trajectory, offset=(0.0, 0.0), tol: float = CHORD_TOL) -> np.ndarray:
    t, z = orbit.t, orbit.z
    f = orbit.field
    vx, vy = f(z[:, 0], z[:, 1])
    ang = np.unwrap(np.arctan2(vy, vx))
    turn = np.abs(np.diff(ang))
    seg = np.hypot(np.diff(z[:, 0]), np.diff(z[:, 1]))
    # sagitta of an arc of length L turning by alpha is about L * alpha / 8
    m = np.maximum(1, np.ceil(np.sqrt(seg * turn / (8.0 * tol)) * 2.0)).astype(int)
    parts = []
    for i in range(len(t) - 1):
        k = m[i]
        if k == 1:
            parts.append(t[i:i + 1])
        else:
            parts.append(np.linspace(t[i], t[i + 1], k, endpoint=False))
    parts.append(t[-1:])
    tq = np.concatenate(parts)
    pts = orbit(tq)[:, :2]
    pts[-1] = pts[0]  # close the loop exactly
    return pts + np.asarray(offset, dtype=float)


def _closed(poly: np.ndarray) -> np.ndarray:
    poly = np.asarray(poly, dtype=float)
    if np.array_equal(poly[0], poly[-1]):
        return poly
    return np.vstack([poly, poly[:1]])


def signed_area(poly: np.ndarray) -> float:
    poly = _closed(poly)
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def winding_number(poly: np.ndarray, pt) -> int:
    """Winding number of the closed polyline around ``pt`` (crossing-rule form)."""
    poly = _closed(poly)
    px, py = float(pt[0]), float(pt[1])
    x0, y0 = poly[:-1, 0] - px, poly[:-1, 1] - py
    x1, y1 = poly[1:, 0] - px, poly[1:, 1] - py
    cross = x0 * y1 - x1 * y0
    up = (y0 <= 0) & (y1 > 0) & (cross > 0)
    down = (y0 > 0) & (y1 <= 0) & (cross < 0)
    return int(np.count_nonzero(up) - np.count_nonzero(down))


def distance_to_polyline(poly: np.ndarray, pt) -> float:
    p = np.asarray(pt, dtype=float)
    poly = _closed(poly)
    a, b = poly[:-1], poly[1:]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    L2[L2 == 0] = 1.0
    u = np.clip(np.einsum("ij,ij->i", p - a, ab) / L2, 0.0, 1.0)
    proj = a + u[:, None] * ab
    return float(np.min(np.hypot(*(proj - p).T)))


def _orbit_min_y(orbit: Trajectory) -> float:
    """Lowest ordinate along the dense orbit, refined around the lowest node."""
    i = int(np.argmin(orbit.y))
    lo, hi = orbit.t[max(i - 1, 0)], orbit.t[min(i + 1, len(orbit.t) - 1)]
    if hi <= lo:
        return float(orbit.y[i])
    res = minimize_scalar(lambda t: orbit(t)[1], bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return float(min(res.fun, orbit.y[i]))


def cycle_from_orbit(field: VectorField2, y0: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                     sample: Optional[ReturnSample] = None,
                     klass: Optional[CycleClass] = None) -> LimitCycle:
    """Build a :class:`LimitCycle` for the periodic orbit through ``(0, y0)``."""
    if sample is None:
        sample = first_return(field, y0, cfg)
    if klass is None:
        klass = classify_h(sample.h)
    orbit = integrate(field, (0.0, y0), cfg, t_end=sample.T)
    poly = _polyline_from_orbit(orbit)
    if len(poly) < 4:
        raise DegeneratePolyline("closed orbit sampled with fewer than three vertices")
    area = signed_area(poly)
    if area == 0.0:
        raise DegeneratePolyline("zero signed area")
    return LimitCycle(y0=float(y0), period=sample.T, multiplier=sample.Pprime, h=sample.h,
                      klass=klass, polyline=poly,
                      orientation="Positive" if area > 0 else "Negative",
                      min_y=_orbit_min_y(orbit), field=field, orbit=orbit)


def classify_h(h: float, tol_h: float = TOL_H) -> CycleClass:
    if h < -tol_h:
        return CycleClass.STABLE
    if h > tol_h:
        return CycleClass.UNSTABLE
    return CycleClass.DEGENERATE


@dataclass(frozen=True)
class CycleGeometry:
    orientation: str
    min_y: float
    bbox: tuple[float, float, float, float]
    area: float


def cycle_geometry(field: VectorField2, cycle: LimitCycle) -> CycleGeometry:
    poly = cycle.polyline
    if len(poly) < 4:
        raise DegeneratePolyline("polyline has fewer than three vertices")
    area = signed_area(poly)
    if area == 0.0:
        raise DegeneratePolyline("zero signed area")
    lo = poly.min(axis=0)
    hi = poly.max(axis=0)
    return CycleGeometry("Positive" if area > 0 else "Negative", min(cycle.min_y, float(lo[1])),
                         (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])), area)


def surrounds_point(cycle: Union[LimitCycle, np.ndarray], pt, boundary_tol: float = 1e-9) -> bool:
    poly = cycle.polyline if isinstance(cycle, LimitCycle) else np.asarray(cycle)
    if distance_to_polyline(poly, pt) < boundary_tol:
        raise OnBoundary(f"point {tuple(pt)} lies on the cycle")
    return winding_number(poly, pt) != 0


def intersects_line(cycle: Union[LimitCycle, np.ndarray], line) -> bool:
    """Whether the closed curve meets ``alpha + beta*x + gamma*y = 0``."""
    alpha, beta, gamma = (float(v) for v in line)
    if beta == 0.0 and gamma == 0.0:
        raise ValueError("degenerate line")
    poly = cycle.polyline if isinstance(cycle, LimitCycle) else np.asarray(cycle)
    v = alpha + beta * poly[:, 0] + gamma * poly[:, 1]
    if v.min() <= 0.0 <= v.max():
        return True
    if not isinstance(cycle, LimitCycle):
        return False
    # no sign change on the vertices: confirm on the dense orbit near the closest vertex
    scale = math.hypot(beta, gamma)
    i = int(np.argmin(np.abs(v)))
    if abs(v[i]) / scale > 10 * CHORD_TOL:
        return False
    orb = cycle.orbit
    ox, oy = cycle.offset
    tt = orb.t
    j = int(np.argmin(np.hypot(orb.x + ox - poly[i, 0], orb.y + oy - poly[i, 1])))
    lo, hi = tt[max(j - 2, 0)], tt[min(j + 2, len(tt) - 1)]
    sgn = np.sign(v[i])

    def g(tq):
        z = orb(tq)
        return sgn * (alpha + beta * (z[0] + ox) + gamma * (z[1] + oy))

    res = minimize_scalar(g, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    return bool(res.fun <= 0.0)


def disjoint_interiors(c1, c2) -> bool:
    p1 = c1.polyline if isinstance(c1, LimitCycle) else np.asarray(c1)
    p2 = c2.polyline if isinstance(c2, LimitCycle) else np.asarray(c2)
    p1, p2 = _closed(p1), _closed(p2)
    if LineString(p1).intersects(LineString(p2)):
        return False
    return winding_number(p1, p2[0]) == 0 and winding_number(p2, p1[0]) == 0


def is_simple(cycle) -> bool:
    from shapely.geometry import LinearRing
    poly = cycle.polyline if isinstance(cycle, LimitCycle) else np.asarray(cycle)
    return bool(LinearRing(_closed(poly)).is_simple)


OneForm = Union[Polynomial2, Callable, float]


def _as_callable(f: OneForm):
    if isinstance(f, Polynomial2):
        return f
    if callable(f):
        return f
    c = float(f)
    return lambda x, y: np.full(np.shape(x), c)


_GL_NODES, _GL_WEIGHTS = leggauss(8)


def line_integral(cycle: LimitCycle, M: OneForm, N: OneForm, along_flow: bool = False) -> float:
    """Integral of ``M dx + N dy`` over the cycle, by Gauss-Legendre along the dense orbit.

    The result refers to the positively (counter-clockwise) oriented curve
    unless ``along_flow`` is set.
    """
    M, N = _as_callable(M), _as_callable(N)
    orb = cycle.orbit
    t = orb.t
    a, b = t[:-1], t[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    tq = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    z = orb(tq)
    xdot, ydot = cycle.field(z[:, 0], z[:, 1])
    ox, oy = cycle.offset
    xs, ys = z[:, 0] + ox, z[:, 1] + oy
    val = float(np.sum(w * (M(xs, ys) * xdot + N(xs, ys) * ydot)))
    if along_flow:
        return val
    return val if cycle.orientation == "Positive" else -val


# ---------------------------------------------------------------------------
# detection


def _disp_value(s: ReturnSample) -> float:
    if s.ok:
        return s.Py - s.y
    if s.status == "Escaped":
        return math.inf
    return math.nan


class _Displacement:
    """Memoised ``d(y)`` with escaping orbits mapped to ``+inf``."""

    def __init__(self, field, cfg):
        self.field = field
        self.cfg = cfg
        self.cache: dict[float, ReturnSample] = {}

    def sample(self, y: float) -> ReturnSample:
        s = self.cache.get(y)
        if s is None:
            try:
                s = first_return(self.field, y, self.cfg)
            except NoReturn as e:
                s = ReturnSample(y=y, status="Escaped" if e.reason == "Escaped" else "NoReturn")
            except CycleLabError as e:
                s = ReturnSample(y=y, status=type(e).__name__)
            self.cache[y] = s
        return s

    def __call__(self, y: float) -> float:
        return _disp_value(self.sample(float(y)))


def _finite_bracket(disp: _Displacement, lo: float, hi: float, glo: float, ghi: float):
    """Shrink a sign-change bracket with an infinite end until both ends are finite."""
    for _ in range(200):
        if math.isfinite(glo) and math.isfinite(ghi):
            return lo, hi, glo, ghi
        if hi - lo < 1e-14 * max(1.0, hi):
            return None
        mid = 0.5 * (lo + hi)
        gm = disp(mid)
        if math.isnan(gm):
            return None
        if gm == 0.0:
            return mid, mid, 0.0, 0.0
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi, ghi = mid, gm
    return None


def _refine_root(disp: _Displacement, lo, hi, glo, ghi) -> Optional[float]:
    fb = _finite_bracket(disp, lo, hi, glo, ghi)
    if fb is None:
        return None
    lo, hi, glo, ghi = fb
    if lo == hi:
        return lo

    def g(y):
        v = disp(y)
        if not math.isfinite(v):
            raise _BracketBroken
        return v

    try:
        return brentq(g, lo, hi, xtol=1e-15 * max(1.0, hi), rtol=1e-15, maxiter=200)
    except (_BracketBroken, ValueError, RuntimeError):
        return None


class _BracketBroken(Exception):
    pass


_PROBE_OFFSETS = (3e-1, 1e-1, 3e-2, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12)


def _bounded(g: float) -> bool:
    return g != math.inf


def _returns(g: float) -> bool:
    return math.isfinite(g)


def _probe_edge(disp: _Displacement, lo: float, hi: float, side: int,
                inside: Callable[[float], bool]) -> list[float]:
    """Roots of ``d`` squeezed against the edge of a set of failing samples.

    ``inside(g)`` marks the kept side; ``side`` is +1 when ``lo`` is kept and
    ``hi`` is not, -1 for the reverse.  A strongly repelling cycle leaves
    only a thin band of returning orbits next to the escaping set, and a
    cycle around a node borders orbits that never come back; either band can
    be narrower than any scan spacing.  The edge is located by bisection and
    sampled at geometrically spaced offsets; every sign change among those
    samples is refined.
    """
    a, b = lo, hi
    for _ in range(60):
        mid = 0.5 * (a + b)
        if inside(disp(mid)) != (side > 0):
            b = mid
        else:
            a = mid
        if b - a < 1e-13 * b:
            break
    edge = a if side > 0 else b
    width = hi - lo
    pts = [edge] + [edge - side * off * width for off in reversed(_PROBE_OFFSETS)] + [lo if side > 0 else hi]
    pts = sorted(set(pts))
    vals = [(y, disp(y)) for y in pts]
    vals = [(y, g) for y, g in vals if math.isfinite(g)]
    roots = []
    for (y0, g0), (y1, g1) in zip(vals[:-1], vals[1:]):
        if g0 == 0.0:
            roots.append(y0)
        elif (g0 < 0) != (g1 < 0) and g1 != 0.0:
            r = _refine_root(disp, y0, y1, g0, g1)
            if r is not None:
                roots.append(r)
    if vals and vals[-1][1] == 0.0:
        roots.append(vals[-1][0])
    return roots


def _center_runs(ys, gs):
    """Longest run of consecutive samples where the return map is the identity."""
    best, run = 0, 0
    for y, g in zip(ys, gs):
        if math.isfinite(g) and abs(g) < CENTER_REL * y:
            run += 1
            best = max(best, run)
        else:
            run = 0
    return best


def find_cycles(field: VectorField2, y_range, n: int = 60,
                cfg: IntegratorConfig = DEFAULT_CONFIG, build: bool = True,
                samples: Optional[list[ReturnSample]] = None) -> CycleSet:
    """Bracket and refine every zero of the displacement over ``y_range``.

    Tangential zeros (local extremum of ``d`` touching zero) are polished with
    a bounded scalar search and reported as semistable candidates; an extremum
    that crosses zero splits into two hyperbolic cycles.  A band of at least
    20 identity-map samples is reported as ``CenterDetected`` with no cycles.
    """
    if n < 8:
        raise ValueError("find_cycles needs n >= 8")
    disp = _Displacement(field, cfg)
    if samples is None:
        samples = scan(field, y_range, n, cfg)
    for s in samples:
        disp.cache[s.y] = s
    ys = np.array([s.y for s in samples])
    gs = np.array([_disp_value(s) for s in samples])
    result = CycleSet([], tuple(map(float, y_range)), n, samples=samples)
    result.failures = [(s.y, s.status) for s in samples if not s.ok]

    run = _center_runs(ys, gs)
    if run >= CENTER_RUN:
        result.notes.append("CenterDetected")
        return result
    flat_band = run >= 3
    if flat_band:
        log.warning("identity return map on %d consecutive samples; too few for a center", run)
        result.notes.append("DegenerateFlatDisplacement")

    roots: list[tuple[float, Optional[CycleClass]]] = []
    for i in range(len(ys) - 1):
        g0, g1 = gs[i], gs[i + 1]
        if math.isnan(g0) or math.isnan(g1):
            continue
        if g0 == 0.0:
            roots.append((ys[i], None))
            continue
        if (g0 < 0) != (g1 < 0) and g1 != 0.0:
            if flat_band and abs(g0) < CENTER_REL * ys[i] and abs(g1) < CENTER_REL * ys[i + 1]:
                continue
            r = _refine_root(disp, ys[i], ys[i + 1], g0, g1)
            if r is None:
                result.failures.append((float(ys[i]), "BracketFailed"))
            else:
                roots.append((r, None))
    if len(gs) and gs[-1] == 0.0:
        roots.append((ys[-1], None))

    # cycles hiding in a thin band next to escaping or non-returning orbits
    for i in range(len(ys) - 1):
        g0, g1 = gs[i], gs[i + 1]
        for inside in (_bounded, _returns):
            k0, k1 = inside(g0), inside(g1)
            if k0 != k1:
                side = +1 if k0 else -1
                roots.extend((r, None) for r in _probe_edge(disp, ys[i], ys[i + 1], side, inside))
                break

    # tangential candidates: interior local minima of |d| without a sign change
    for i in range(1, len(ys) - 1):
        g_prev, g, g_next = gs[i - 1], gs[i], gs[i + 1]
        if not (np.isfinite(g_prev) and np.isfinite(g) and np.isfinite(g_next)):
            continue
        if g == 0.0 or not ((g_prev < 0) == (g < 0) == (g_next < 0)):
            continue
        if not (abs(g) <= abs(g_prev) and abs(g) <= abs(g_next)):
            continue
        sgn = 1.0 if g > 0 else -1.0

        def obj(y):
            v = disp(y)
            return sgn * v if math.isfinite(v) else math.inf

        res = minimize_scalar(obj, bounds=(ys[i - 1], ys[i + 1]), method="bounded",
                              options={"xatol": 1e-12 * ys[i]})
        y_ext, d_ext = float(res.x), sgn * float(res.fun)
        if not math.isfinite(d_ext):
            continue
        if (d_ext < 0) != (g < 0) and abs(d_ext) > FIXED_POINT_TOL * max(1.0, y_ext):
            for lo, hi, glo, ghi in ((ys[i - 1], y_ext, g_prev, d_ext), (y_ext, ys[i + 1], d_ext, g_next)):
                r = _refine_root(disp, lo, hi, glo, ghi)
                if r is None:
                    result.failures.append((float(lo), "BracketFailed"))
                else:
                    roots.append((r, None))
            continue
        s_ext = disp.sample(y_ext)
        if abs(d_ext) < CANDIDATE_D and s_ext.ok and abs(s_ext.h) < CANDIDATE_H:
            klass = (CycleClass.SEMISTABLE_OUTER_STABLE if g < 0
                     else CycleClass.SEMISTABLE_INNER_STABLE)
            roots.append((y_ext, klass))

    roots.sort(key=lambda r: r[0])
    merged: list[tuple[float, Optional[CycleClass]]] = []
    for r in roots:
        if merged and abs(r[0] - merged[-1][0]) < 1e-9 * max(1.0, r[0]):
            if r[1] is not None:
                merged[-1] = r
            continue
        merged.append(r)

    for y0, klass in merged:
        s = disp.sample(y0)
        if not s.ok:
            result.failures.append((y0, s.status))
            continue
        if klass is None:
            if abs(s.Py - y0) >= fixed_point_tol(y0, s.Pprime):
                result.failures.append((y0, "FixedPointTolerance"))
                continue
            klass = classify_h(s.h)
            if klass is CycleClass.DEGENERATE:
                klass = _one_sided_class(disp, y0)
        if build:
            try:
                result.cycles.append(cycle_from_orbit(field, y0, cfg, s, klass))
            except CycleLabError as e:
                result.failures.append((y0, type(e).__name__))
        else:
            result.cycles.append(_bare_cycle(field, s, klass))
    return result


def fixed_point_tol(y0: float, pprime: float) -> float:
    """Residual accepted for ``P(y0) = y0``.

    A strongly expanding or contracting map cannot resolve its fixed point
    better than ``|P' - 1|`` times a few units in the last place of ``y0``.
    """
    cond = 8.0 * abs(pprime - 1.0) * math.ulp(y0) if math.isfinite(pprime) else 0.0
    return max(FIXED_POINT_TOL * max(1.0, y0), cond)


def _one_sided_class(disp: _Displacement, y0: float) -> CycleClass:
    eps = 1e-3 * y0
    lo, hi = disp(y0 - eps), disp(y0 + eps)
    if lo < 0 and hi < 0:
        return CycleClass.SEMISTABLE_OUTER_STABLE
    if lo > 0 and hi > 0:
        return CycleClass.SEMISTABLE_INNER_STABLE
    return CycleClass.DEGENERATE


def _bare_cycle(field, s: ReturnSample, klass) -> LimitCycle:
    empty = np.empty((0, 2))
    return LimitCycle(s.y, s.T, s.Pprime, s.h, klass, empty, "", math.nan, field, None)
