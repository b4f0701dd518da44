"""Compiled Dormand-Prince 5(4) stepping for polynomial planar fields.

State layout: ``(x, y, s)`` where ``s`` accumulates the divergence, optionally
followed by the four entries of the variational matrix ``Phi`` (row major).
The coefficient table ``tab`` is ``VectorField2.kernel_table``.
"""
import numpy as np
from numba import njit

OK = 0
EVENT = 1
ESCAPED = 2
TIMELIMIT = 3
UNDERFLOW = 4
NONFINITE = 5
NONTRANSVERSE = 6
CAPACITY = 7
MAXSTEPS = 8
SETTLED = 9

STATUS_NAMES = {
    OK: "Ok", EVENT: "EventStop", ESCAPED: "Escaped", TIMELIMIT: "TimeLimit",
    UNDERFLOW: "StepSizeUnderflow", NONFINITE: "NonFiniteState",
    NONTRANSVERSE: "NonTransverse", CAPACITY: "Capacity", MAXSTEPS: "MaxSteps",
    SETTLED: "Settled",
}

H_FLOOR = 1e-14
# Underflow with the radius e-folding within this many floor steps is a
# finite-time blow-up and reported as an escape.
BLOWUP_STEPS = 1000.0

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423


@njit(cache=True)
def poly_eval(tab, k, x, y):
    acc = 0.0
    for j in range(6, -1, -1):
        row = 0.0
        for i in range(6 - j, -1, -1):
            row = row * x + tab[k, i, j]
        acc = acc * y + row
    return acc


@njit(cache=True)
def rhs(tab, z, dz):
    x = z[0]
    y = z[1]
    dz[0] = poly_eval(tab, 0, x, y)
    dz[1] = poly_eval(tab, 1, x, y)
    dz[2] = poly_eval(tab, 2, x, y)
    if z.shape[0] == 7:
        px = poly_eval(tab, 3, x, y)
        py = poly_eval(tab, 4, x, y)
        qx = poly_eval(tab, 5, x, y)
        qy = poly_eval(tab, 6, x, y)
        dz[3] = px * z[3] + py * z[5]
        dz[4] = px * z[4] + py * z[6]
        dz[5] = qx * z[3] + qy * z[5]
        dz[6] = qx * z[4] + qy * z[6]


@njit(cache=True)
def _norm(v, z0, z1, rtol, atol):
    acc = 0.0
    n = v.shape[0]
    for i in range(n):
        sc = atol + rtol * max(abs(z0[i]), abs(z1[i]))
        acc += (v[i] / sc) ** 2
    return np.sqrt(acc / n)


@njit(cache=True)
def initial_step(tab, z0, f0, rtol, atol, max_step):
    n = z0.shape[0]
    tmp = np.empty(n)
    f1 = np.empty(n)
    d0 = _norm(z0, z0, z0, rtol, atol)
    d1 = _norm(f0, z0, z0, rtol, atol)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    for i in range(n):
        tmp[i] = z0[i] + h0 * f0[i]
    rhs(tab, tmp, f1)
    for i in range(n):
        tmp[i] = f1[i] - f0[i]
    d2 = _norm(tmp, z0, z0, rtol, atol) / h0
    m = max(d1, d2)
    if m <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / m) ** 0.2
    return min(100.0 * h0, h1, max_step)


@njit(cache=True)
def dopri_step(tab, z, k, h, znew, rc, errv):
    """One trial step from ``z`` with ``k[0] = f(z)``; fills stages, dense coefficients."""
    n = z.shape[0]
    tmp = np.empty(n)
    for i in range(n):
        tmp[i] = z[i] + h * A21 * k[0, i]
    rhs(tab, tmp, k[1])
    for i in range(n):
        tmp[i] = z[i] + h * (A31 * k[0, i] + A32 * k[1, i])
    rhs(tab, tmp, k[2])
    for i in range(n):
        tmp[i] = z[i] + h * (A41 * k[0, i] + A42 * k[1, i] + A43 * k[2, i])
    rhs(tab, tmp, k[3])
    for i in range(n):
        tmp[i] = z[i] + h * (A51 * k[0, i] + A52 * k[1, i] + A53 * k[2, i] + A54 * k[3, i])
    rhs(tab, tmp, k[4])
    for i in range(n):
        tmp[i] = z[i] + h * (A61 * k[0, i] + A62 * k[1, i] + A63 * k[2, i]
                             + A64 * k[3, i] + A65 * k[4, i])
    rhs(tab, tmp, k[5])
    for i in range(n):
        znew[i] = z[i] + h * (A71 * k[0, i] + A73 * k[2, i] + A74 * k[3, i]
                              + A75 * k[4, i] + A76 * k[5, i])
    rhs(tab, znew, k[6])
    for i in range(n):
        errv[i] = h * (E1 * k[0, i] + E3 * k[2, i] + E4 * k[3, i] + E5 * k[4, i]
                       + E6 * k[5, i] + E7 * k[6, i])
        dz = znew[i] - z[i]
        bspl = h * k[0, i] - dz
        rc[0, i] = z[i]
        rc[1, i] = dz
        rc[2, i] = bspl
        rc[3, i] = dz - h * k[6, i] - bspl
        rc[4, i] = h * (D1 * k[0, i] + D3 * k[2, i] + D4 * k[3, i] + D5 * k[4, i]
                        + D6 * k[5, i] + D7 * k[6, i])


@njit(cache=True)
def dense_eval(rc, theta, i):
    th1 = 1.0 - theta
    return rc[0, i] + theta * (rc[1, i] + th1 * (rc[2, i] + theta * (rc[3, i] + th1 * rc[4, i])))


@njit(cache=True)
def _underflow(tab, z):
    x = z[0]
    y = z[1]
    r2 = x * x + y * y
    if r2 <= 1.0:
        return UNDERFLOW
    rate = (x * poly_eval(tab, 0, x, y) + y * poly_eval(tab, 1, x, y)) / r2
    if rate * H_FLOOR * BLOWUP_STEPS > 1.0:
        return ESCAPED
    return UNDERFLOW


@njit(cache=True)
def _refine_root(rc, lo, hi, flo, fhi):
    """Bisection-safeguarded secant for x(theta) = 0 on [lo, hi]."""
    a, b, fa, fb = lo, hi, flo, fhi
    th = 0.5 * (a + b)
    for _ in range(80):
        if fb != fa:
            th = b - fb * (b - a) / (fb - fa)
        if not (min(a, b) < th < max(a, b)) or abs(th - 0.5 * (a + b)) > 0.45 * abs(b - a):
            th = 0.5 * (a + b)
        fth = dense_eval(rc, th, 0)
        if abs(fth) < 1e-13 or abs(b - a) < 1e-16:
            return th
        if (fth < 0.0) == (fa < 0.0):
            a, fa = th, fth
        else:
            b, fb = th, fth
    return th


@njit(cache=True, nogil=True)
def run(tab, z0, t0, t_end, h, rtol, atol, max_step, escape, max_steps,
        mode, direction, delta, out_t, out_z, out_rc):
    """Integrate from ``(t0, z0)``.

    mode 0 records accepted nodes into the ``out_*`` buffers until ``t_end``
    (or the buffers fill up, returning CAPACITY so the caller can resume).
    mode 1 stops at the first crossing of ``{x = 0, y > 0}`` with
    ``sign(dx/dt) == direction`` and returns the refined event state, or
    SETTLED once the speed falls below ``atol`` (the orbit has come to rest
    on an equilibrium within tolerance).

    Returns ``(status, n_nodes, t, z, h_next, t_event, z_event, n_steps)``.
    """
    n = z0.shape[0]
    z = z0.copy()
    znew = np.empty(n)
    k = np.empty((7, n))
    rc = np.empty((5, n))
    errv = np.empty(n)
    zev = np.zeros(n)
    t = t0
    rhs(tab, z, k[0])
    if h <= 0.0:
        h = initial_step(tab, z, k[0], rtol, atol, max_step)
    cap = out_t.shape[0]
    nn = 0
    if mode == 0:
        out_t[0] = t
        out_z[0, :] = z
        nn = 1
    steps = 0
    r2 = escape * escape
    rejected = False
    while True:
        if mode == 0 and nn >= cap:
            return CAPACITY, nn, t, z, h, 0.0, zev, steps
        if steps >= max_steps:
            return MAXSTEPS, nn, t, z, h, 0.0, zev, steps
        if t >= t_end:
            return TIMELIMIT, nn, t, z, h, 0.0, zev, steps
        hs = min(h, max_step)
        last = False
        if t + hs >= t_end:
            hs = t_end - t
            last = True
        if hs < H_FLOOR and not last:
            return _underflow(tab, z), nn, t, z, h, 0.0, zev, steps
        dopri_step(tab, z, k, hs, znew, rc, errv)
        err = _norm(errv, z, znew, rtol, atol)
        steps += 1
        if not np.isfinite(err):
            h = 0.2 * hs
            rejected = True
            if h < H_FLOOR:
                return _underflow(tab, z), nn, t, z, h, 0.0, zev, steps
            continue
        if err > 1.0:
            h = hs * max(0.2, 0.9 * err ** -0.2)
            rejected = True
            if h < H_FLOOR:
                return _underflow(tab, z), nn, t, z, h, 0.0, zev, steps
            continue
        fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
        if rejected:
            fac = min(1.0, fac)
        rejected = False
        for i in range(n):
            if not np.isfinite(znew[i]):
                return NONFINITE, nn, t, z, h, 0.0, zev, steps
        tnew = t + hs
        if mode == 1 and direction * z[0] < 0.0 and direction * znew[0] >= 0.0:
            th = _refine_root(rc, 0.0, 1.0, rc[0, 0], znew[0])
            yev = dense_eval(rc, th, 1)
            if yev > 0.0:
                for i in range(n):
                    zev[i] = dense_eval(rc, th, i)
                zev[0] = 0.0
                px = poly_eval(tab, 0, 0.0, yev)
                tev = t + th * hs
                if abs(px) < delta:
                    return NONTRANSVERSE, nn, t, z, h, tev, zev, steps
                return EVENT, nn, tnew, znew, h, tev, zev, steps
        if mode == 0:
            out_t[nn] = tnew
            out_z[nn, :] = znew
            out_rc[nn - 1, :, :] = rc
            nn += 1
        t = tnew
        for i in range(n):
            z[i] = znew[i]
            k[0, i] = k[6, i]
        h = hs * fac if not last else max(h, hs)
        if z[0] * z[0] + z[1] * z[1] > r2:
            return ESCAPED, nn, t, z, h, 0.0, zev, steps
        if mode == 1 and abs(k[0, 0]) + abs(k[0, 1]) < atol:
            return SETTLED, nn, t, z, h, 0.0, zev, steps
