"""Adaptive integration of planar fields with dense output.

The integrated state is ``(x, y, s)`` with ``ds/dt = div(field)(x, y)``, so the
divergence integral along an orbit inherits the integrator's error control.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, asdict, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from .errors import ConfigError, NonFiniteState, NonTransverse, StepSizeUnderflow
from .field import VectorField2

log = logging.getLogger(__name__)

TRANSVERSALITY_FLOOR = 1e-6


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    max_time: float = 1e6
    escape_radius: float = 1e4
    max_steps: int = 20_000_000

    def __post_init__(self):
        for name in ("rtol", "atol", "max_step", "max_time", "escape_radius"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or math.isnan(v):
                raise ConfigError(f"{name} must be a number")
            if not v > 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if int(self.max_steps) < 1:
            raise ConfigError("max_steps must be at least 1")

    def replace(self, **kw) -> "IntegratorConfig":
        return replace(self, **kw)

    def to_json(self) -> dict:
        d = asdict(self)
        if math.isinf(d["max_step"]):
            d["max_step"] = None
        return d

    @classmethod
    def from_json(cls, obj) -> "IntegratorConfig":
        if obj is None:
            return cls()
        if not isinstance(obj, dict):
            raise ConfigError("integrator block must be an object")
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown integrator keys: {sorted(extra)}")
        kw = {}
        for k, v in obj.items():
            if k == "max_step" and v is None:
                v = math.inf
            try:
                kw[k] = int(v) if k == "max_steps" else float(v)
            except (TypeError, ValueError):
                raise ConfigError(f"integrator.{k} is not a number: {v!r}") from None
        return cls(**kw)


DEFAULT_CONFIG = IntegratorConfig()


class Trajectory:
    """Accepted nodes ``(t, x, y, s[, Phi])`` with a per-step quartic interpolant."""

    def __init__(self, field: VectorField2, t, z, rc, reason: str):
        self.field = field
        self.t = t
        self.z = z
        self.rc = rc
        self.reason = reason
        for a in (t, z, rc):
            a.setflags(write=False)

    @property
    def x(self):
        return self.z[:, 0]

    @property
    def y(self):
        return self.z[:, 1]

    @property
    def s(self):
        return self.z[:, 2]

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def final(self) -> np.ndarray:
        return self.z[-1]

    def __len__(self):
        return len(self.t)

    def __call__(self, tq):
        tq = np.asarray(tq, dtype=float)
        scalar = tq.ndim == 0
        tq = np.atleast_1d(tq)
        if np.any(tq < self.t[0] - 1e-12) or np.any(tq > self.t[-1] + 1e-12):
            raise ValueError("query time outside the integrated span")
        if len(self.t) == 1:
            out = np.repeat(self.z[:1], len(tq), axis=0)
            return out[0] if scalar else out
        idx = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0, len(self.t) - 2)
        h = self.t[idx + 1] - self.t[idx]
        th = ((tq - self.t[idx]) / h)[:, None]
        r = self.rc[idx]
        th1 = 1.0 - th
        out = r[:, 0] + th * (r[:, 1] + th1 * (r[:, 2] + th * (r[:, 3] + th1 * r[:, 4])))
        return out[0] if scalar else out

    def to_csv(self, path, uniform: Optional[int] = None) -> None:
        """Write ``t,x,y,s`` at the nodes, or at ``uniform`` equally spaced times."""
        if uniform:
            tt = np.linspace(self.t[0], self.t[-1], int(uniform))
            zz = self(tt)
        else:
            tt, zz = self.t, self.z
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "x", "y", "s"])
            for ti, zi in zip(tt, zz):
                w.writerow([repr(float(ti)), repr(float(zi[0])), repr(float(zi[1])), repr(float(zi[2]))])


def _state0(init, variational: bool) -> np.ndarray:
    x, y = (float(v) for v in init)
    z = [x, y, 0.0]
    if variational:
        z += [1.0, 0.0, 0.0, 1.0]
    return np.array(z)


def _check_init(init, cfg: IntegratorConfig):
    x, y = (float(v) for v in init)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValueError(f"initial point must be finite, got {init}")
    if math.hypot(x, y) > cfg.escape_radius:
        raise ValueError(f"initial point {init} lies outside the escape radius {cfg.escape_radius}")


def integrate(field: VectorField2, init, cfg: IntegratorConfig = DEFAULT_CONFIG,
              t_end: Optional[float] = None,
              stop: Optional[Callable[[float, np.ndarray], bool]] = None,
              variational: bool = False, chunk: int = 4096) -> Trajectory:
    """Integrate ``field`` from ``init`` over ``[0, t_end]`` (default ``cfg.max_time``).

    ``stop(t, state)`` is checked at every accepted node; the trajectory ends
    at the first node where it returns True.
    """
    _check_init(init, cfg)
    t_end = cfg.max_time if t_end is None else min(float(t_end), cfg.max_time)
    tab = field.kernel_table
    z = _state0(init, variational)
    n = len(z)
    ts, zs, rcs = [], [], []
    t, h, steps = 0.0, 0.0, 0
    reason = None
    first = True
    while reason is None:
        out_t = np.empty(chunk)
        out_z = np.empty((chunk, n))
        out_rc = np.empty((chunk, 5, n))
        status, nn, t, z, h, _, _, used = K.run(
            tab, z, t, t_end, h, cfg.rtol, cfg.atol, cfg.max_step, cfg.escape_radius,
            cfg.max_steps - steps, 0, 1.0, TRANSVERSALITY_FLOOR, out_t, out_z, out_rc)
        steps += used
        # every chunk after the first repeats its starting node
        lo = 0 if first else 1
        first = False
        t_new, z_new = out_t[lo:nn], out_z[lo:nn]
        rc_new = out_rc[:nn - 1]
        if stop is not None:
            for i in range(len(t_new)):
                if stop(float(t_new[i]), z_new[i]):
                    keep = i + 1
                    t_new, z_new = t_new[:keep], z_new[:keep]
                    rc_new = rc_new[:keep - 1 + lo]
                    reason = "EventStop"
                    break
        ts.append(t_new)
        zs.append(z_new)
        rcs.append(rc_new)
        if reason is not None:
            break
        if status == K.CAPACITY:
            continue
        if status == K.UNDERFLOW:
            raise StepSizeUnderflow(f"step size fell below {K.H_FLOOR} at t={t}")
        if status == K.NONFINITE:
            raise NonFiniteState(f"non-finite state at t={t}")
        if status == K.ESCAPED:
            reason = "Escaped"
        else:
            if status == K.MAXSTEPS:
                log.warning("step budget exhausted at t=%g", t)
            reason = "TimeLimit"
    tt = np.concatenate(ts)
    zz = np.concatenate(zs)
    rr = np.concatenate(rcs) if rcs else np.empty((0, 5, n))
    return Trajectory(field, tt, zz, rr, reason)


def section_crossings(traj: Trajectory, direction: int = 1,
                      delta: float = TRANSVERSALITY_FLOOR) -> list[tuple[float, float]]:
    """Crossings of the half-line ``{x = 0, y > 0}`` with ``sign(dx/dt) == direction``."""
    x = traj.x
    out = []
    idx = np.nonzero((direction * x[:-1] < 0.0) & (direction * x[1:] >= 0.0))[0]
    for i in idx:
        t0, t1 = traj.t[i], traj.t[i + 1]
        if x[i + 1] == 0.0:
            ts = t1
        else:
            ts = brentq(lambda tq: traj(tq)[0], t0, t1, xtol=1e-15, rtol=1e-15, maxiter=80)
        ys = float(traj(ts)[1])
        if ys <= 0.0:
            continue
        if abs(traj.field.P(0.0, ys)) < delta:
            raise NonTransverse(f"flow tangent to the section at y={ys}")
        out.append((float(ts), ys))
    return out
