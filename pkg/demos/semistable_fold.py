"""Fold of cycles in the quintic Lienard family at ``b = 1, c = -1``.

At ``a = 0`` there is one hyperbolic cycle. Making ``a`` negative brings a
second cycle in from infinity; the two approach each other and merge into a
double cycle at ``a = a*``, below which none remain. The script brackets the
fold, solves for the double cycle, counts cycles on both sides and checks the
scaling ``phi(s^2 b, c) = s^4 phi(b, c)``.
"""
from planarcycles import bracket_fold, count_cycles, perturb_semistable, solve_semistable

fb = bracket_fold(1.0, -1.0)
print(f"bracket: a in [{fb.a_lo:.8f}, {fb.a_hi:.8f}], counts {fb.counts}")

sol = solve_semistable(1.0, -1.0, fb)
print(f"double cycle: a*={sol.a_star!r} y0*={sol.y0_star!r}")
print(f"  residuals {sol.res_d:.1e} {sol.res_h:.1e}, P''={sol.pprime2:.4f} +- {sol.pprime2_err:.1e}")

for a in (0.0, 0.5 * sol.a_star, sol.a_star + 1e-3, sol.a_star - 1e-3, 1.5 * sol.a_star):
    cnt = count_cycles(1.0, -1.0, a)
    print(f"  a={a:+.6f}: {cnt.n_hyperbolic} hyperbolic, {cnt.n_semistable} double, y0 {cnt.y0s}")

for p in perturb_semistable(sol, [-1e-4, 1e-4]):
    print(f"  a*{p.delta:+.0e}: {p.n_hyperbolic} cycle(s) near y0*")

big = solve_semistable(4.0, -1.0, (16 * sol.a_star, 0.5 * sol.y0_star))
print(f"scaling: phi(4,-1)/phi(1,-1) = {big.a_star / sol.a_star:.10f}, "
      f"y0 ratio = {big.y0_star / sol.y0_star:.10f}")
