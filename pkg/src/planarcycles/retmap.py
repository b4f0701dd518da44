"""Poincare return map on the positive y-axis.

For a start point ``(0, y)`` the orbit is followed to its first crossing of
``{x = 0, y > 0}`` in the same direction as it left.  Besides ``P(y)`` and the
return time ``T(y)`` the integrated divergence ``h(y)`` is recorded; the
multiplier then follows from

    P'(y) = xdot(0, y) / xdot(0, P(y)) * exp(h(y)),

which is ``y / P(y) * exp(h(y))`` for every Lienard-type field (``xdot = y`` on
the axis).  :func:`pprime_variational` obtains the same derivative from the
first variational equation and serves as the independent check.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .errors import NoReturn, NonFiniteState, NonTransverse, StepSizeUnderflow, CycleLabError
from .field import VectorField2
from .flow import DEFAULT_CONFIG, TRANSVERSALITY_FLOOR, IntegratorConfig

_DUMMY_T = np.empty(1)


@dataclass(frozen=True)
class ReturnSample:
    y: float
    Py: float = math.nan
    T: float = math.nan
    h: float = math.nan
    Pprime: float = math.nan
    status: str = "Ok"

    @property
    def ok(self) -> bool:
        return self.status == "Ok"

    @property
    def displacement(self) -> float:
        return self.Py - self.y


def _launch(field: VectorField2, y: float, cfg: IntegratorConfig, variational: bool,
            delta: float):
    if not (y > 0.0 and math.isfinite(y)):
        raise ValueError(f"section ordinate must be positive and finite, got {y}")
    if y > cfg.escape_radius:
        raise ValueError(f"start ordinate {y} beyond the escape radius")
    tab = field.kernel_table
    v0 = field.P(0.0, y)
    if abs(v0) < delta:
        raise NonTransverse(f"flow tangent to the section at y={y} (xdot={v0:.3g})")
    direction = 1.0 if v0 > 0 else -1.0
    z0 = np.array([0.0, y, 0.0, 1.0, 0.0, 0.0, 1.0] if variational else [0.0, y, 0.0])
    n = len(z0)
    status, _, t, _, _, tev, zev, _ = K.run(
        tab, z0, 0.0, cfg.max_time, 0.0, cfg.rtol, cfg.atol, cfg.max_step,
        cfg.escape_radius, cfg.max_steps, 1, direction, delta,
        _DUMMY_T, np.empty((1, n)), np.empty((1, 5, n)))
    if status == K.EVENT:
        return v0, tev, zev
    if status == K.ESCAPED:
        raise NoReturn(f"orbit from y={y} escaped at t={t:.6g}", reason="Escaped")
    if status == K.SETTLED:
        raise NoReturn(f"orbit from y={y} settled on an equilibrium at t={t:.6g}", reason="Equilibrium")
    if status in (K.TIMELIMIT, K.MAXSTEPS):
        raise NoReturn(f"orbit from y={y} did not return by t={t:.6g}", reason="TimeLimit")
    if status == K.NONTRANSVERSE:
        raise NonTransverse(f"orbit from y={y} returns tangentially at y={zev[1]}")
    if status == K.UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow from y={y} at t={t:.6g}")
    raise NonFiniteState(f"non-finite state from y={y} at t={t:.6g}")


def first_return(field: VectorField2, y: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                 delta: float = TRANSVERSALITY_FLOOR) -> ReturnSample:
    v0, T, z = _launch(field, y, cfg, False, delta)
    Py, h = float(z[1]), float(z[2])
    v1 = field.P(0.0, Py)
    return ReturnSample(y=float(y), Py=Py, T=float(T), h=h, Pprime=(v0 / v1) * math.exp(h))


def pprime_variational(field: VectorField2, y: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
                       delta: float = TRANSVERSALITY_FLOOR) -> float:
    """``dP/dy`` from the variational matrix projected along the flow onto the section."""
    _, _, z = _launch(field, y, cfg, True, delta)
    Py = z[1]
    xdot, ydot = field(0.0, Py)
    # column of Phi for an initial perturbation along e_y: (Phi12, Phi22)
    return float(z[6] - ydot * z[4] / xdot)


def _safe_sample(field, y, cfg, delta):
    try:
        return first_return(field, y, cfg, delta)
    except NoReturn as e:
        return ReturnSample(y=float(y), status=e.reason if e.reason == "Escaped" else "NoReturn")
    except CycleLabError as e:
        return ReturnSample(y=float(y), status=type(e).__name__)


def scan(field: VectorField2, y_range, n: int, cfg: IntegratorConfig = DEFAULT_CONFIG,
         delta: float = TRANSVERSALITY_FLOOR, workers: int = 1) -> list[ReturnSample]:
    """``n`` geometrically spaced first returns over ``y_range``; failures are kept, tagged.

    Escaping orbits carry status ``Escaped``; every other failure is tagged with
    the error name (``NoReturn`` for the time limit).
    """
    ymin, ymax = (float(v) for v in y_range)
    if not 0.0 < ymin < ymax:
        raise ValueError(f"need 0 < ymin < ymax, got {y_range}")
    if n < 2:
        raise ValueError("need at least two samples")
    ys = np.geomspace(ymin, ymax, int(n))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(lambda y: _safe_sample(field, y, cfg, delta), ys))
    return [_safe_sample(field, y, cfg, delta) for y in ys]


def pprime2(field: VectorField2, y0: float, cfg: IntegratorConfig = DEFAULT_CONFIG,
            return_error: bool = False):
    """Second derivative of the return map by one Richardson level of centred differences.

    The error estimate adds the Richardson correction to the amplification of
    the integration tolerance by the difference quotient.
    """
    eta = max(1e-4, 1e-4 * y0)

    def P(y):
        return first_return(field, y, cfg).Py

    p0 = P(y0)
    d1 = (P(y0 + eta) - 2.0 * p0 + P(y0 - eta)) / eta**2
    e2 = 0.5 * eta
    d2 = (P(y0 + e2) - 2.0 * p0 + P(y0 - e2)) / e2**2
    value = (4.0 * d2 - d1) / 3.0
    noise = 16.0 * (cfg.rtol * abs(p0) + cfg.atol) / e2**2
    err = abs(value - d2) + noise
    return (value, err) if return_error else value


def write_scan_csv(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y", "Py", "T", "h", "Pprime", "status"])
        for s in samples:
            w.writerow([repr(s.y), repr(s.Py), repr(s.T), repr(s.h), repr(s.Pprime), s.status])
