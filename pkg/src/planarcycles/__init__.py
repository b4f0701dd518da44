"""Limit cycles of planar polynomial vector fields.

Integration with an event-capable Dormand-Prince scheme, the Poincare return
map on the positive y-axis, cycle detection and classification, fold
continuation for the quintic Lienard family and falsification harnesses.
"""
from .errors import (CycleLabError, ConfigError, NoReturn, NonTransverse, StepSizeUnderflow,
                     NonFiniteState, RangeUndetermined, NoFoldFound, NewtonDiverged, CycleLost,
                     DegenerateSystem, OnBoundary)
from .field import (Polynomial2, VectorField2, Family, FamilySpec, build_family, harmonic,
                    eval_field, divergence_poly, rotated_det, X, Y)
from .flow import IntegratorConfig, Trajectory, integrate, section_crossings, DEFAULT_CONFIG
from .retmap import ReturnSample, first_return, pprime_variational, pprime2, scan
from .cycles import (CycleClass, LimitCycle, CycleSet, find_cycles, surrounds_point,
                     intersects_line, disjoint_interiors, is_simple, line_integral)
from .bifurc import (CycleCount, count_cycles, bracket_fold, solve_semistable, phi_surface,
                     uniqueness_scan, rotated_sweep, perturb_semistable, quintic)
from .verify import (PropositionReport, QuadraticSingularity, quadratic_singularities,
                     verify_prop1, verify_prop2, verify_prop3)

__version__ = "0.1.0"
