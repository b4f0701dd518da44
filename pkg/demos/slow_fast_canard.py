"""Slow-fast family ``x' = y + x^4 - 2x^2, y' = eps (a - x)`` at ``eps = 0.1``.

The equilibrium ``(a, 2a^2 - a^4)`` is surrounded by a cycle only while
``0 < |a| < 1``; at ``a = 0`` the linearisation is a center and the flow is
reversible. The script runs the truth table and prints the detected cycles.
"""
from planarcycles import verify_prop3

report = verify_prop3(0.1, (0.0, 0.3, -0.3, 0.7, -0.7, 1.0, 1.3))
for check in report.checks:
    d = check.data
    if check.name.startswith("a="):
        periods = [round(c["period"], 4) for c in d["cycles"]]
        print(f"{check.name:>8}: {check.status:8} expected {d['expected']}, "
              f"center={d['center']} periods={periods}")
    elif check.name.startswith("mirror"):
        print(f"{check.name}: {check.status} gap {d['max_polyline_gap']:.1e}")
