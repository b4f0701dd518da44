"""Van der Pol oscillator as a member of the quintic Lienard family.

The family is ``x' = y + a x^5 + b x^3 + c x, y' = -x``. With ``a = 0``,
``b = -1/3`` and ``c = 1`` it is the van der Pol equation with ``mu = 1``.
The script scans the return map on the positive y-axis, locates the cycle and
prints its period, amplitude and multiplier.
"""
import numpy as np

from planarcycles import find_cycles, quintic, scan

field = quintic(0.0, -1.0 / 3.0, 1.0)

print("Return map on the section x = 0, y > 0")
for s in scan(field, (0.5, 4.0), 8):
    print(f"  y={s.y:6.3f}  P(y)={s.Py:9.6f}  T={s.T:8.5f}  status={s.status}")

for c in find_cycles(field, (0.05, 10.0), 40):
    amplitude = float(np.max(np.abs(c.polyline[:, 0])))
    print(f"cycle: y0={c.y0:.10f} period={c.period:.10f} amplitude={amplitude:.8f} "
          f"multiplier={c.multiplier:.3e} ({c.klass.value})")
