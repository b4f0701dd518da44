"""Falsification harnesses for the three statements about limit cycles.

A harness never declares a statement true.  Each check ends as ``Pass`` (no
counterexample under this budget), ``Fail`` (a reproducible counterexample
candidate is attached) or ``Measured`` (data recorded, no claim asserted).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .bifurc import (bracket_fold, count_cycles, solve_semistable, uniqueness_scan)
from .cycles import (LimitCycle, OnBoundary, find_cycles, intersects_line, disjoint_interiors,
                     line_integral, surrounds_point)
from .errors import CycleLabError, DegenerateSystem
from .field import Family, FamilySpec, Polynomial2, VectorField2, build_family
from .flow import DEFAULT_CONFIG, IntegratorConfig

PASS, FAIL, MEASURED, NOT_APPLICABLE = "Pass", "Fail", "Measured", "NotApplicable"


def _clean(v):
    """Plain JSON-serialisable Python values (numpy scalars and tuples converted)."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_clean(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, Enum):
        return v.value
    return v


@dataclass
class Check:
    name: str
    status: str
    data: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "data": _clean(self.data)}


@dataclass
class PropositionReport:
    proposition: str
    config: dict
    checks: list[Check] = dc_field(default_factory=list)
    counterexample_candidates: list[dict] = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"proposition": self.proposition, "config": _clean(self.config),
                "checks": [c.to_json() for c in self.checks],
                "counterexample_candidates": _clean(self.counterexample_candidates),
                "passed": self.passed}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    def summary(self) -> str:
        lines = [f"{self.proposition}: {'no counterexample found' if self.passed else 'COUNTEREXAMPLE CANDIDATES'}"]
        for c in self.checks:
            lines.append(f"  [{c.status:>8}] {c.name}")
        if self.counterexample_candidates:
            lines.append(f"  {len(self.counterexample_candidates)} candidate(s) recorded")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# singular points of quadratic fields


@dataclass(frozen=True)
class QuadraticSingularity:
    x: float
    y: float
    type: str
    det: float
    trace: float

    @property
    def location(self) -> tuple[float, float]:
        return (self.x, self.y)


def _y_columns(p: Polynomial2) -> list[np.ndarray]:
    c = p.coeffs
    cols = [npoly.polytrim(c[:, j].copy()) for j in range(c.shape[1])]
    while len(cols) > 1 and not np.any(cols[-1]):
        cols.pop()
    return cols


def _poly_det(m: list[list[np.ndarray]]) -> np.ndarray:
    n = len(m)
    if n == 1:
        return m[0][0]
    acc = np.zeros(1)
    for j in range(n):
        if not np.any(m[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = npoly.polymul(m[0][j], _poly_det(minor))
        acc = npoly.polyadd(acc, term) if j % 2 == 0 else npoly.polysub(acc, term)
    return acc


def resultant_y(P: Polynomial2, Q: Polynomial2) -> np.ndarray:
    """Sylvester resultant of ``P`` and ``Q`` with respect to ``y`` (ascending powers of x)."""
    pc, qc = _y_columns(P), _y_columns(Q)
    m, n = len(pc) - 1, len(qc) - 1
    if m == 0 and n == 0:
        raise DegenerateSystem("neither component depends on y")
    size = m + n
    zero = np.zeros(1)
    rows = []
    for i in range(n):
        row = [zero] * size
        for k in range(m + 1):
            row[i + k] = pc[m - k]
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for k in range(n + 1):
            row[i + k] = qc[n - k]
        rows.append(row)
    return npoly.polytrim(_poly_det(rows))


def _poly_in_y(p: Polynomial2, x: float) -> np.ndarray:
    c = p.coeffs
    return np.array([npoly.polyval(x, c[:, j]) for j in range(c.shape[1])])


def _newton_polish(field: VectorField2, x: float, y: float, iters: int = 20):
    Px, Py, Qx, Qy = field.jacobian()
    for _ in range(iters):
        F = np.array(field(x, y))
        J = np.array([[Px(x, y), Py(x, y)], [Qx(x, y), Qy(x, y)]])
        try:
            dx, dy = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        x, y = x + dx, y + dy
        if abs(dx) + abs(dy) < 1e-15 * (1 + abs(x) + abs(y)):
            break
    return x, y


def quadratic_singularities(system, tol_det: float = 1e-10) -> list[QuadraticSingularity]:
    """All real singular points of a quadratic field.

    ``system`` is a quadratic-family parameter mapping (``a, b, c, d, f``), a
    :class:`FamilySpec` or a :class:`VectorField2` of degree at most two.
    """
    if isinstance(system, VectorField2):
        field = system
    elif isinstance(system, FamilySpec):
        field = build_family(system)
    else:
        field = build_family(FamilySpec(Family.QUADRATIC, dict(system)))
    if max(field.P.degree, field.Q.degree) > 2:
        raise ValueError("quadratic_singularities needs a field of degree <= 2")
    res = resultant_y(field.P, field.Q)
    scale = max(1.0, float(np.max(np.abs(res))))
    if np.max(np.abs(res)) < 1e-10 or len(res) == 0:
        raise DegenerateSystem("resultant vanishes identically")
    xs = npoly.polyroots(res) if len(res) > 1 else np.array([])
    cand = []
    for r in np.atleast_1d(xs):
        if abs(r.imag) > 1e-6 * (1 + abs(r.real)):
            continue
        x = float(r.real)
        py = npoly.polytrim(_poly_in_y(field.P, x), tol=1e-13 * scale)
        qy = npoly.polytrim(_poly_in_y(field.Q, x), tol=1e-13 * scale)
        ys = []
        for coeffs in (py, qy):
            if len(coeffs) > 1 and np.any(coeffs[1:]):
                ys.extend(v.real for v in npoly.polyroots(coeffs) if abs(v.imag) < 1e-6 * (1 + abs(v.real)))
        if not ys:
            if not np.any(py) and not np.any(qy):
                raise DegenerateSystem(f"vertical line of singular points at x={x}")
            continue
        for y in ys:
            cand.append(_newton_polish(field, x, float(y)))
    Px, Py, Qx, Qy = field.jacobian()
    out: list[QuadraticSingularity] = []
    for x, y in cand:
        p, q = field(x, y)
        if max(abs(p), abs(q)) > 1e-10:
            continue
        if any(math.hypot(x - s.x, y - s.y) < 1e-8 for s in out):
            continue
        det = Px(x, y) * Qy(x, y) - Py(x, y) * Qx(x, y)
        tr = Px(x, y) + Qy(x, y)
        kind = "Antisaddle" if det > tol_det else ("Saddle" if det < -tol_det else "Degenerate")
        out.append(QuadraticSingularity(float(x), float(y), kind, float(det), float(tr)))
    out.sort(key=lambda s: (s.x, s.y))
    return out


def eq1_normal_form(field: VectorField2, tol: float = 1e-12) -> Optional[dict]:
    """Quadratic-family coefficients of a translated quadratic field, if it still has that shape.

    The shape requires no ``y`` or ``y^2`` terms in ``dy/dt`` and no ``xy``
    term in ``dx/dt``.  The linear part is normalised to ``(y + c x, -x)`` by
    rescaling ``y`` and time (positive time factor).
    """
    P, Q = field.P, field.Q
    if max(abs(Q[0, 1]), abs(Q[0, 2]), abs(P[1, 1]), abs(P[0, 0]), abs(Q[0, 0])) > tol:
        return None
    p01, p10, q10 = P[0, 1], P[1, 0], Q[1, 0]
    if not p01 * q10 < 0:
        return None
    g = 1.0 / math.sqrt(-p01 * q10)
    beta = 1.0 / (g * p01)
    return {"a": g * P[2, 0], "b": g * P[0, 2] * beta**2, "c": g * p10,
            "d": g * Q[2, 0] / beta, "f": g * Q[1, 1]}


def _focus_sign_quantity(p: dict) -> float:
    return p["c"] * p["d"] * (2 * p["a"] + p["f"])


# ---------------------------------------------------------------------------
# quadratic systems: randomized cycle checks


@dataclass
class Prop1Settings:
    y_range: tuple[float, float] = (1e-3, 5.0)
    n: int = 40
    section_margin: float = 0.9


PROP1_CONFIG = DEFAULT_CONFIG.replace(max_time=200.0, escape_radius=1e3)


def _antisaddle_cycles(field: VectorField2, s: QuadraticSingularity, cfg: IntegratorConfig,
                       settings: Prop1Settings):
    T = field.translated(s.x, s.y)
    lo, hi = settings.y_range
    p01, p02 = T.P[0, 1], T.P[0, 2]
    if p02 != 0.0 and -p01 / p02 > 0:
        hi = min(hi, settings.section_margin * (-p01 / p02))
    if hi <= lo * 2:
        return T, [], "SectionTooShort"
    cs = find_cycles(T, (lo, hi), settings.n, cfg)
    kept = []
    for c in cs.cycles:
        try:
            inside = surrounds_point(c, (0.0, 0.0))
        except OnBoundary:
            inside = False
        if inside:
            kept.append(c.translated(s.x, s.y).with_surrounds([s.location]))
    return T, kept, ("CenterDetected" if cs.center_detected else "")


def check_quadratic_system(params: dict, cfg: IntegratorConfig = PROP1_CONFIG,
                           settings: Optional[Prop1Settings] = None) -> dict:
    """Detect cycles around every antisaddle of one quadratic-family system and evaluate the sign, line and disjointness checks."""
    settings = settings or Prop1Settings()
    field = build_family(FamilySpec(Family.QUADRATIC, params))
    sings = quadratic_singularities(params)
    if any(s.type == "Degenerate" for s in sings):
        raise DegenerateSystem("degenerate singular point")
    a, b, c, d, f = (params[k] for k in "abcdf")
    out = {"params": dict(params), "singularities": [], "cycles": [], "violations": [],
           "measured": [], "not_applicable": 0, "b_checked": 0, "d_checked": 0}
    cycles: list[LimitCycle] = []
    for s in sings:
        entry = {"x": s.x, "y": s.y, "type": s.type}
        out["singularities"].append(entry)
        if s.type != "Antisaddle":
            continue
        T, kept, note = _antisaddle_cycles(field, s, cfg, settings)
        nf = eq1_normal_form(T)
        entry["eq1_form"] = nf
        entry["note"] = note
        for cy in kept:
            cycles.append(cy)
            cinfo = {"singularity": [s.x, s.y], "y0": cy.y0, "period": cy.period,
                     "class": cy.klass.value, "orientation": cy.orientation, "min_y": cy.min_y}
            out["cycles"].append(cinfo)
            # claimed: a cycle around the (translated) origin forces cd(2a+f) > 0
            if nf is None:
                out["not_applicable"] += 1
            else:
                out["b_checked"] += 1
                q = _focus_sign_quantity(nf)
                cinfo["sign_quantity"] = q
                if not q > 0:
                    out["violations"].append(("B_origin_sign", cinfo))
                if abs(nf["c"]) < 1e-12:
                    out["violations"].append(("F_zero_c_no_cycle", cinfo))
            crosses_axis = intersects_line(cy, (0.0, 1.0, 0.0))
            cinfo["intersects_x0"] = crosses_axis
            if crosses_axis:
                out["d_checked"] += 1
                hit = intersects_line(cy, (-1.0, d, f)) if (d or f) else False
                cinfo["intersects_L"] = hit
                if hit:
                    out["violations"].append(("D_line_L", cinfo))
            else:
                # claimed orientation rule: positive orientation <-> cd(2a+f) < 0
                q = c * d * (2 * a + f)
                expected = "Positive" if q < 0 else ("Negative" if q > 0 else "undetermined")
                out["measured"].append(("C_orientation",
                                        {"orientation": cy.orientation, "cd(2a+f)": q,
                                         "consistent": expected == cy.orientation}))
            li = line_integral(cy, Polynomial2.from_terms({}),
                               Polynomial2.from_terms({(0, 0): -1.0, (1, 0): d, (0, 1): f}))
            out["measured"].append(("E_line_integral", {"value": li, "sign_d": math.copysign(1, d) if d else 0.0,
                                                        "same_sign": (li > 0) == (d > 0)}))
        if note == "CenterDetected" and nf is not None and abs(nf["c"]) >= 1e-12:
            out["measured"].append(("center", {"singularity": [s.x, s.y], "eq1_form": nf}))
    for c1, c2 in itertools.combinations(cycles, 2):
        if disjoint_interiors(c1, c2):
            out["violations"].append(("A_disjoint_interiors",
                                      {"cycles": [[c1.y0, c1.offset], [c2.y0, c2.offset]]}))
    out["pairs"] = len(cycles) * (len(cycles) - 1) // 2
    return out


def verify_prop1(sample_count: int = 500, seed: int = 42, param_box: float = 2.0,
                 cfg: IntegratorConfig = PROP1_CONFIG,
                 settings: Optional[Prop1Settings] = None) -> PropositionReport:
    """Randomised search for quadratic systems with two cycles with disjoint interiors."""
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    settings = settings or Prop1Settings()
    rng = np.random.default_rng(seed)
    draws = rng.uniform(-param_box, param_box, size=(int(sample_count), 5))
    report = PropositionReport("P1", {"sample_count": sample_count, "seed": seed,
                                      "param_box": param_box, "integrator": cfg.to_json(),
                                      "y_range": list(settings.y_range), "n": settings.n})
    totals = {"rejected": 0, "systems_with_cycles": 0, "cycles": 0, "pairs": 0,
              "b_checked": 0, "b_not_applicable": 0, "d_checked": 0}
    failures = {"A_disjoint_interiors": 0, "B_origin_sign": 0, "D_line_L": 0,
                "F_zero_c_no_cycle": 0}
    measured_c, measured_e = [], []
    for idx, row in enumerate(draws):
        params = dict(zip("abcdf", (float(v) for v in row)))
        try:
            res = check_quadratic_system(params, cfg, settings)
        except DegenerateSystem:
            totals["rejected"] += 1
            continue
        ncyc = len(res["cycles"])
        totals["cycles"] += ncyc
        totals["systems_with_cycles"] += ncyc > 0
        totals["pairs"] += res["pairs"]
        totals["b_checked"] += res["b_checked"]
        totals["b_not_applicable"] += res["not_applicable"]
        totals["d_checked"] += res["d_checked"]
        for name, data in res["measured"]:
            (measured_c if name.startswith("C") else measured_e).append({"sample": idx, **data}) \
                if name[0] in "CE" else None
        for name, data in res["violations"]:
            failures[name] += 1
            report.counterexample_candidates.append(
                {"check": name, "sample": idx, "seed": seed, "params": params,
                 "integrator": cfg.to_json(), "data": data})
    report.checks.append(Check("samples", MEASURED, dict(totals, samples=sample_count)))
    report.checks.append(Check("A_no_disjoint_interior_pair",
                               FAIL if failures["A_disjoint_interiors"] else PASS,
                               {"pairs_tested": totals["pairs"],
                                "violations": failures["A_disjoint_interiors"]}))
    report.checks.append(Check("B_origin_cycle_sign_cd(2a+f)>0",
                               FAIL if failures["B_origin_sign"] else PASS,
                               {"cycles_checked": totals["b_checked"],
                                "not_applicable": totals["b_not_applicable"],
                                "violations": failures["B_origin_sign"]}))
    report.checks.append(Check("C_orientation_sign", MEASURED, {"records": measured_c}))
    report.checks.append(Check("D_no_cycle_meets_line_-1+dx+fy=0",
                               FAIL if failures["D_line_L"] else PASS,
                               {"cycles_checked": totals["d_checked"],
                                "violations": failures["D_line_L"]}))
    report.checks.append(Check("E_line_integral_(-1+dx+fy)dy", MEASURED, {"records": measured_e}))
    report.checks.append(Check("F_zero_linear_term_no_cycle",
                               FAIL if failures["F_zero_c_no_cycle"] else PASS,
                               {"violations": failures["F_zero_c_no_cycle"]}))
    return report


# ---------------------------------------------------------------------------
# quintic Lienard family: fold of cycles


def verify_prop2(b_grid: Sequence[float], c_grid: Sequence[float],
                 cfg: IntegratorConfig = DEFAULT_CONFIG, uniqueness: bool = True,
                 scaling: bool = True) -> PropositionReport:
    """Per-node confirmation of the semistable surface for the quintic family."""
    b_grid = [float(b) for b in b_grid]
    c_grid = [float(c) for c in c_grid]
    for v in b_grid + c_grid:
        if not math.isfinite(v):
            raise ValueError("grid values must be finite")
    report = PropositionReport("P2", {"b_grid": b_grid, "c_grid": c_grid,
                                      "integrator": cfg.to_json(), "uniqueness": uniqueness,
                                      "scaling": scaling})
    solutions = {}
    for b in b_grid:
        for c in c_grid:
            node = {"b": b, "c": c}
            if b * c > 0:
                report.checks.append(_no_semistable_check(b, c, cfg, report))
                continue
            if b * c == 0:
                report.checks.append(Check(f"node({b},{c})", NOT_APPLICABLE, node))
                continue
            try:
                fb = bracket_fold(b, c, cfg)
                sol = solve_semistable(b, c, fb, cfg)
            except CycleLabError as e:
                report.checks.append(Check(f"fold({b},{c})", FAIL, dict(node, error=f"{type(e).__name__}: {e}")))
                report.counterexample_candidates.append(dict(node, check="fold", error=str(e),
                                                             integrator=cfg.to_json()))
                continue
            solutions[(b, c)] = sol
            ok = sol.converged and sol.pprime2_certified
            report.checks.append(Check(f"semistable({b},{c})", PASS if ok else FAIL,
                                       dict(node, bracket=[fb.a_lo, fb.a_hi], **sol.to_json())))
            if not ok:
                report.counterexample_candidates.append(dict(node, check="semistable",
                                                             solution=sol.to_json(),
                                                             integrator=cfg.to_json()))
            if uniqueness:
                us = uniqueness_scan(b, c, sol.a_star, cfg)
                ok = us.transitions == 1 and not us.anomalies
                report.checks.append(Check(f"uniqueness({b},{c})", PASS if ok else FAIL,
                                           dict(node, transitions=us.transitions,
                                                a_values=us.a_values, counts=us.counts,
                                                anomalies=us.anomalies,
                                                truncated_at=us.truncated_at)))
                if not ok:
                    report.counterexample_candidates.append(dict(node, check="uniqueness",
                                                                 counts=us.counts,
                                                                 a_values=us.a_values,
                                                                 integrator=cfg.to_json()))
            if scaling:
                s = 2.0
                try:
                    partner = solve_semistable(b * s * s, c, (sol.a_star * s**4, sol.y0_star / s), cfg)
                    ra = partner.a_star / (s**4 * sol.a_star)
                    ry = partner.y0_star * s / sol.y0_star
                    ok = partner.converged and abs(ra - 1) < 1e-6 and abs(ry - 1) < 1e-6
                    data = dict(node, s=s, a_ratio=ra, y_ratio=ry, partner=partner.to_json())
                except CycleLabError as e:
                    ok, data = False, dict(node, error=str(e))
                report.checks.append(Check(f"scaling({b},{c})", PASS if ok else FAIL, data))
                if not ok:
                    report.counterexample_candidates.append(dict(data, check="scaling",
                                                                 integrator=cfg.to_json()))
    return report


def _no_semistable_check(b, c, cfg, report) -> Check:
    scale = b * b / abs(c)
    a_values = [k * scale for k in (-1.0, -0.5, -0.25, -0.1, 0.0, 0.1, 0.5)]
    counts, bad = [], []
    for a in a_values:
        try:
            cnt = count_cycles(b, c, a, cfg)
        except CycleLabError as e:
            counts.append(None)
            bad.append((a, type(e).__name__))
            continue
        counts.append([cnt.n_hyperbolic, cnt.n_semistable])
        if cnt.n_semistable or cnt.multiplicity > 1:
            bad.append((a, [cnt.n_hyperbolic, cnt.n_semistable]))
    data = {"b": b, "c": c, "a_values": a_values, "counts": counts, "anomalies": bad}
    if bad:
        report.counterexample_candidates.append(dict(data, check="no_semistable",
                                                     integrator=cfg.to_json()))
    return Check(f"no_semistable({b},{c})", FAIL if bad else PASS, data)


# ---------------------------------------------------------------------------
# slow-fast family: cycle existence in a


PROP3_CONFIG = DEFAULT_CONFIG.replace(max_time=2000.0)


def slow_fast_focus_frame(a: float, eps: float) -> tuple[VectorField2, tuple[float, float]]:
    """Slow-fast field translated so that its equilibrium ``(a, 2a^2 - a^4)`` is the origin."""
    yq = 2 * a * a - a**4
    field = build_family(FamilySpec(Family.SLOW_FAST, {"a": a, "eps": eps}))
    return field.translated(a, yq), (a, yq)


@dataclass
class Prop3Result:
    a: float
    cycles: list
    center: bool
    reversed: bool
    offset: tuple[float, float]


def _prop3_detect(a, eps, cfg, y_range, n) -> Prop3Result:
    T, off = slow_fast_focus_frame(a, eps)
    rev = a > 0
    work = T.reversed() if rev else T
    cs = find_cycles(work, y_range, n, cfg)
    cycles = [c.translated(*off) for c in cs.cycles]
    return Prop3Result(a, cycles, cs.center_detected, rev, off)


def _forward_log_multiplier(res: Prop3Result, cyc: LimitCycle) -> float:
    return -cyc.h if res.reversed else cyc.h


def verify_prop3(eps: float = 0.1, a_list: Sequence[float] = (0.0, 0.2, -0.2, 0.5, -0.5, 0.8, -0.8,
                                                                1.0, -1.0, 1.3, -1.3),
                 cfg: IntegratorConfig = PROP3_CONFIG, y_range=(1e-3, 4.0), n: int = 60,
                 mirror_tol: float = 1e-6) -> PropositionReport:
    """Cycle existence across ``a`` for the slow-fast family at fixed ``eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    a_list = [float(a) for a in a_list]
    report = PropositionReport("P3", {"eps": eps, "a_list": a_list, "integrator": cfg.to_json(),
                                      "y_range": list(y_range), "n": n})
    results = {}
    for a in a_list:
        res = _prop3_detect(a, eps, cfg, y_range, n)
        results[a] = res
        data = {"a": a, "n_cycles": len(res.cycles), "center": res.center,
                "time_reversed": res.reversed,
                "cycles": [{"y0_section": c.y0, "period": c.period,
                            "log_multiplier": _forward_log_multiplier(res, c),
                            "min_y": c.min_y, "orientation": c.orientation} for c in res.cycles]}
        if a == 0.0:
            ok = res.center and not res.cycles
            expect = "CenterDetected"
        elif abs(a) < 1.0:
            ok = len(res.cycles) >= 1
            expect = ">=1 cycle"
        else:
            ok = not res.cycles
            expect = "no cycle"
        data["expected"] = expect
        best_effort = 0.9 < abs(a) < 1.0
        status = PASS if ok else (MEASURED if best_effort else FAIL)
        report.checks.append(Check(f"a={a!r}", status, data))
        if status == FAIL:
            report.counterexample_candidates.append({"check": f"a={a!r}", "eps": eps, "a": a,
                                                     "integrator": cfg.to_json(), "data": data})
        for c in res.cycles:
            report.checks.append(Check(f"min_y(a={a!r})", MEASURED,
                                       {"min_y": c.min_y, "below_-1": c.min_y < -1.0}))
    for a in a_list:
        if a <= 0 or -a not in results:
            continue
        rp, rm = results[a], results[-a]
        if not (rp.cycles and rm.cycles):
            continue
        data = mirror_comparison(rp, rm)
        ok = (len(rp.cycles) == len(rm.cycles) and data["max_polyline_gap"] < mirror_tol
              and data["max_log_multiplier_sum"] < mirror_tol)
        report.checks.append(Check(f"mirror(a=±{a!r})", PASS if ok else FAIL, data))
        if not ok:
            report.counterexample_candidates.append({"check": "mirror", "a": a, "eps": eps,
                                                     "integrator": cfg.to_json(), "data": data})
    report.checks.append(Check("boundary_orbit(a=0)", MEASURED, boundary_orbit(eps, cfg, y_range)))
    return report


def mirror_comparison(rp: Prop3Result, rm: Prop3Result, samples: int = 2001) -> dict:
    """Compare the cycles for ``+a`` and ``-a`` under ``x -> -x`` with time reversal."""
    gap, lsum = 0.0, 0.0
    for cp, cm in zip(rp.cycles, rm.cycles):
        T = min(cp.period, cm.period)
        tt = np.linspace(0.0, T, samples)
        zp, zm = cp.orbit(tt), cm.orbit(tt)
        xp = zp[:, 0] + cp.offset[0]
        yp = zp[:, 1] + cp.offset[1]
        xm = zm[:, 0] + cm.offset[0]
        ym = zm[:, 1] + cm.offset[1]
        gap = max(gap, float(np.max(np.hypot(xp + xm, yp - ym))), abs(cp.period - cm.period))
        lsum = max(lsum, abs(_forward_log_multiplier(rp, cp) + _forward_log_multiplier(rm, cm)))
    return {"max_polyline_gap": gap, "max_log_multiplier_sum": lsum,
            "n_plus": len(rp.cycles), "n_minus": len(rm.cycles)}


def boundary_orbit(eps: float, cfg: IntegratorConfig = PROP3_CONFIG, y_range=(1e-3, 4.0)) -> dict:
    """Edge of the period annulus of the centre at ``a = 0`` and where its orbit runs.

    The orbit just inside the edge is compared against both ``y = x^4 - 2x^2``
    and the actual ``dx/dt`` nullcline ``y = 2x^2 - x^4`` at its rightmost point.
    """
    from .cycles import _Displacement
    from .flow import integrate
    field = build_family(FamilySpec(Family.SLOW_FAST, {"a": 0.0, "eps": eps}))
    disp = _Displacement(field, cfg)
    lo, hi = y_range
    if math.isfinite(disp(hi)):
        return {"edge": None, "note": "no escape inside the scanned range"}
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if math.isfinite(disp(mid)):
            lo = mid
        else:
            hi = mid
    s = disp.sample(lo)
    orb = integrate(field, (0.0, lo), cfg, t_end=s.T)
    i = int(np.argmax(orb.x))
    x, y = float(orb.x[i]), float(orb.y[i])
    return {"edge_y": lo, "rightmost_x": x, "y_at_rightmost": y,
            "graph_x4-2x2": x**4 - 2 * x * x, "nullcline_2x2-x4": 2 * x * x - x**4,
            "min_y": float(orb.y.min())}
