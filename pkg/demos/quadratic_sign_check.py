"""Sign of ``cd(2a+f)`` for a quadratic system with a small cycle at the origin.

The system ``x' = y + a x^2 + b y^2 + c x, y' = -x + d x^2 + f x y`` has a
focus at the origin whose first Lyapunov coefficient is proportional to
``d (2a + f)``. A small cycle is born where the linear damping ``c`` and that
coefficient have opposite signs, so cycles found next to the origin have
``cd(2a+f) < 0``. The script prints the measured cycles and the sign.
"""
from planarcycles.verify import check_quadratic_system

for params in ({"a": 1.0014586905202103, "b": -0.8783649680558403, "c": -0.05923610227345977,
                "d": 1.9229487992049545, "f": 1.846628774655147},
               {"a": 0.5, "b": 0.0, "c": 0.02, "d": -1.0, "f": 0.5}):
    out = check_quadratic_system(params)
    print(params)
    for cy in out["cycles"]:
        q = cy.get("sign_quantity")
        print(f"  cycle around {cy['singularity']}: y0={cy['y0']:.6f} period={cy['period']:.4f} "
              f"{cy['class']}, cd(2a+f)={q if q is None else f'{q:+.4f}'}")
    print(f"  violations: {[name for name, _ in out['violations']] or 'none'}")
