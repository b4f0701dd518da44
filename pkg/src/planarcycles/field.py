"""Planar polynomial vector fields and the parametric families studied here.

Polynomials are stored as dense coefficient tables ``c[i, j]`` for the
monomial ``x**i * y**j`` with total degree capped at :data:`MAX_DEGREE`.
All arithmetic is float64 and exact in the sense that no numerical
differentiation is ever used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import ConfigError, NonFiniteParameter, NonPositiveEpsilon

MAX_DEGREE = 6
_N = MAX_DEGREE + 1
_DEGREE_MASK = np.add.outer(np.arange(_N), np.arange(_N)) <= MAX_DEGREE


class Polynomial2:
    """Bivariate real polynomial of total degree at most 6."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        c = np.zeros((_N, _N))
        if coeffs is not None:
            a = np.asarray(coeffs, dtype=float)
            if a.ndim != 2:
                raise ValueError("coefficient table must be 2-D")
            ni, nj = a.shape
            over = [(i, j) for i in range(ni) for j in range(nj)
                    if a[i, j] != 0.0 and (i >= _N or j >= _N or i + j > MAX_DEGREE)]
            if over:
                raise ValueError(f"degree cap {MAX_DEGREE} exceeded by monomials {over}")
            c[:min(ni, _N), :min(nj, _N)] = a[:_N, :_N]
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_terms(cls, terms: Mapping[tuple[int, int], float]) -> "Polynomial2":
        size = max([_N] + [max(i, j) + 1 for i, j in terms])
        c = np.zeros((size, size))
        for (i, j), v in terms.items():
            c[i, j] += float(v)
        return cls(c)

    @classmethod
    def constant(cls, v: float) -> "Polynomial2":
        return cls.from_terms({(0, 0): v})

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    def __getitem__(self, ij) -> float:
        return float(self._c[ij])

    @property
    def degree(self) -> int:
        nz = np.argwhere(self._c != 0.0)
        if nz.size == 0:
            return -1
        return int(nz.sum(axis=1).max())

    def is_zero(self) -> bool:
        return not np.any(self._c)

    def __call__(self, x, y):
        # Horner in y of Horner-in-x row polynomials
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for j in range(MAX_DEGREE, -1, -1):
            row = np.zeros_like(out)
            for i in range(MAX_DEGREE - j, -1, -1):
                row = row * x + self._c[i, j]
            out = out * y + row
        return out if out.ndim else float(out)

    def dx(self) -> "Polynomial2":
        c = np.zeros((_N, _N))
        c[:-1, :] = self._c[1:, :] * np.arange(1, _N)[:, None]
        return Polynomial2(c)

    def dy(self) -> "Polynomial2":
        c = np.zeros((_N, _N))
        c[:, :-1] = self._c[:, 1:] * np.arange(1, _N)[None, :]
        return Polynomial2(c)

    def __add__(self, other):
        if isinstance(other, Polynomial2):
            return Polynomial2(self._c + other._c)
        return Polynomial2(self._c + np.pad([[float(other)]], ((0, MAX_DEGREE), (0, MAX_DEGREE))))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial2(-self._c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Polynomial2):
            return Polynomial2(self._c * float(other))
        c = np.zeros((2 * _N - 1, 2 * _N - 1))
        for i, j in np.argwhere(self._c != 0.0):
            c[i:i + _N, j:j + _N] += self._c[i, j] * other._c
        return Polynomial2(c)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Polynomial2.constant(1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial2) and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other: "Polynomial2", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    def shift(self, x0: float, y0: float) -> "Polynomial2":
        """Coefficients of ``p(x + x0, y + y0)``."""
        c = np.zeros((_N, _N))
        bx = _binomial_powers(x0)
        by = _binomial_powers(y0)
        for i, j in np.argwhere(self._c != 0.0):
            # (x + x0)^i (y + y0)^j expanded
            c[:i + 1, :j + 1] += self._c[i, j] * np.outer(bx[i, :i + 1], by[j, :j + 1])
        return Polynomial2(c)

    def scale(self, sx: float, sy: float) -> "Polynomial2":
        """Coefficients of ``p(sx * x, sy * y)``."""
        px = float(sx) ** np.arange(_N)
        py = float(sy) ** np.arange(_N)
        return Polynomial2(self._c * np.outer(px, py))

    def __repr__(self):
        terms = [f"{self._c[i, j]:+g}*x^{i}y^{j}" for i, j in np.argwhere(self._c != 0.0)]
        return "Polynomial2(" + (" ".join(terms) if terms else "0") + ")"


def _binomial_powers(s: float) -> np.ndarray:
    # row i holds the coefficients of x^k in (x + s)^i
    t = np.zeros((_N, _N))
    for i in range(_N):
        for k in range(i + 1):
            t[i, k] = math.comb(i, k) * s ** (i - k)
    return t


X = Polynomial2.from_terms({(1, 0): 1.0})
Y = Polynomial2.from_terms({(0, 1): 1.0})


@dataclass(frozen=True, eq=False)
class VectorField2:
    """The planar field ``(dx/dt, dy/dt) = (P(x, y), Q(x, y))``."""

    P: Polynomial2
    Q: Polynomial2

    def __call__(self, x, y):
        return self.P(x, y), self.Q(x, y)

    def __eq__(self, other):
        return isinstance(other, VectorField2) and self.P == other.P and self.Q == other.Q

    def __hash__(self):
        return hash((self.P, self.Q))

    def divergence(self) -> Polynomial2:
        return self.P.dx() + self.Q.dy()

    def jacobian(self) -> tuple[Polynomial2, Polynomial2, Polynomial2, Polynomial2]:
        return self.P.dx(), self.P.dy(), self.Q.dx(), self.Q.dy()

    def reversed(self) -> "VectorField2":
        return VectorField2(-self.P, -self.Q)

    def mirrored(self) -> "VectorField2":
        """Field in the reflected coordinate ``x' = -x``."""
        return VectorField2(-self.P.scale(-1.0, 1.0), self.Q.scale(-1.0, 1.0))

    def translated(self, x0: float, y0: float) -> "VectorField2":
        """Field in coordinates ``(X, Y) = (x - x0, y - y0)``."""
        return VectorField2(self.P.shift(x0, y0), self.Q.shift(x0, y0))

    @cached_property
    def kernel_table(self) -> np.ndarray:
        """Stacked tables ``[P, Q, div, Px, Py, Qx, Qy]`` for the integrator."""
        polys = (self.P, self.Q, self.divergence()) + self.jacobian()
        return np.ascontiguousarray(np.stack([p.coeffs for p in polys]))


def harmonic() -> VectorField2:
    """``x' = y, y' = -x``: clockwise rotation, period 2*pi."""
    return VectorField2(Y, -X)


class Family(str, Enum):
    QUADRATIC = "eq1"
    QUINTIC_LIENARD = "eq2"
    SLOW_FAST = "eq3"
    QUARTIC_LIENARD = "quartic"


PARAM_NAMES: dict[Family, tuple[str, ...]] = {
    Family.QUADRATIC: ("a", "b", "c", "d", "f"),
    Family.QUINTIC_LIENARD: ("a", "b", "c"),
    Family.SLOW_FAST: ("a", "eps"),
    Family.QUARTIC_LIENARD: ("a", "b", "c", "d"),
}

DEFAULT_EPS = 0.1


@dataclass(frozen=True)
class FamilySpec:
    kind: Family
    params: Mapping[str, float] = dc_field(default_factory=dict)

    def __post_init__(self):
        kind = Family(self.kind)
        names = PARAM_NAMES[kind]
        unknown = set(self.params) - set(names)
        if unknown:
            raise ConfigError(f"unknown parameters for {kind.value}: {sorted(unknown)}")
        params = {}
        for name in names:
            if name in self.params:
                v = _parse_number(self.params[name], name)
            elif kind is Family.SLOW_FAST and name == "eps":
                v = DEFAULT_EPS
            else:
                v = 0.0
            params[name] = v
        if kind is Family.SLOW_FAST and not params["eps"] > 0.0:
            raise NonPositiveEpsilon(f"eps must be positive, got {params['eps']}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)

    def with_params(self, **updates) -> "FamilySpec":
        return FamilySpec(self.kind, {**self.params, **updates})

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj) -> "FamilySpec":
        if not isinstance(obj, Mapping):
            raise ConfigError("system definition must be a JSON object")
        extra = set(obj) - {"kind", "params"}
        if extra:
            raise ConfigError(f"unknown keys in system definition: {sorted(extra)}")
        if "kind" not in obj:
            raise ConfigError("system definition lacks 'kind'")
        try:
            kind = Family(obj["kind"])
        except ValueError:
            raise ConfigError(f"unknown system kind {obj['kind']!r}") from None
        params = obj.get("params", {})
        if not isinstance(params, Mapping):
            raise ConfigError("'params' must be an object")
        return cls(kind, dict(params))


def _parse_number(v, name: str) -> float:
    if isinstance(v, bool):
        raise ConfigError(f"parameter {name} must be a number")
    try:
        x = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {name} is not a number: {v!r}") from None
    if not math.isfinite(x):
        raise NonFiniteParameter(f"parameter {name} is not finite: {v!r}")
    return x


def build_family(spec: FamilySpec) -> VectorField2:
    p = spec.params
    if spec.kind is Family.QUADRATIC:
        P = Polynomial2.from_terms({(0, 1): 1.0, (2, 0): p["a"], (0, 2): p["b"], (1, 0): p["c"]})
        Q = Polynomial2.from_terms({(1, 0): -1.0, (2, 0): p["d"], (1, 1): p["f"]})
    elif spec.kind is Family.QUINTIC_LIENARD:
        P = Polynomial2.from_terms({(0, 1): 1.0, (5, 0): p["a"], (3, 0): p["b"], (1, 0): p["c"]})
        Q = -X
    elif spec.kind is Family.SLOW_FAST:
        P = Polynomial2.from_terms({(0, 1): 1.0, (4, 0): 1.0, (2, 0): -2.0})
        Q = Polynomial2.from_terms({(0, 0): p["eps"] * p["a"], (1, 0): -p["eps"]})
    else:
        P = Polynomial2.from_terms({(0, 1): 1.0, (4, 0): -p["a"], (3, 0): -p["b"],
                                    (2, 0): -p["c"], (1, 0): -p["d"]})
        Q = -X
    return VectorField2(P, Q)


def extract_params(kind: Family | str, field: VectorField2) -> dict[str, float]:
    """Read the family parameters back from a field's coefficients."""
    kind = Family(kind)
    P, Q = field.P, field.Q
    if kind is Family.QUADRATIC:
        return {"a": P[2, 0], "b": P[0, 2], "c": P[1, 0], "d": Q[2, 0], "f": Q[1, 1]}
    if kind is Family.QUINTIC_LIENARD:
        return {"a": P[5, 0], "b": P[3, 0], "c": P[1, 0]}
    if kind is Family.SLOW_FAST:
        eps = -Q[1, 0]
        return {"a": Q[0, 0] / eps, "eps": eps}
    return {"a": -P[4, 0], "b": -P[3, 0], "c": -P[2, 0], "d": -P[1, 0]}


# For the quadratic and quintic Lienard families the rotation parameter is lambda = -c.
ROTATION_PARAMETER = {Family.QUADRATIC: ("c", -1.0), Family.QUINTIC_LIENARD: ("c", -1.0)}


def eval_field(field: VectorField2, point) -> tuple[float, float]:
    x, y = point
    return field(float(x), float(y))


def divergence_poly(field: VectorField2) -> Polynomial2:
    return field.divergence()


def rotated_det(spec: FamilySpec, value1: float, value2: float, point, param: str = "c") -> float:
    """``P1*Q2 - Q1*P2`` for the members of ``spec`` with ``param`` set to each value."""
    f1 = build_family(spec.with_params(**{param: value1}))
    f2 = build_family(spec.with_params(**{param: value2}))
    x, y = point
    p1, q1 = f1(x, y)
    p2, q2 = f2(x, y)
    return p1 * q2 - q1 * p2
