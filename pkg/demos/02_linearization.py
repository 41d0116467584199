"""Local stability of nonlinear systems through linearization.

Find equilibria with damped Newton from a few seeds, linearize with a
central-difference Jacobian, and classify each point.  The pendulum shows
the classic alternation: centers at even multiples of pi, saddles at odd
ones -- and at a center the linearization is deliberately inconclusive.
"""

import math

from stabkit import autonomous as aut
from stabkit.schema import bundled_system

for name, seeds in [
    ("quadratic_drag", [[0.1, 0.1], [1.8, 0.2]]),
    ("prey_predator", [[0.05, 0.05], [1.9, 0.6]]),
]:
    sysd = bundled_system(name).build()
    print(f"--- {name}")
    for eq in aut.find_equilibria(sysd, seeds, tol=1e-10):
        rep = aut.local_stability(sysd, eq.point)
        point = ", ".join(f"{v:+.6f}" for v in eq.point)
        kind = rep.critical_point.value if rep.critical_point else "-"
        print(f"  ({point})  {rep.conclusion.value:22s} {kind}")

print("--- pendulum")
pend = bundled_system("pendulum").build()
for n in range(4):
    eq = aut.find_equilibria(pend, [[n * math.pi + 0.2, 0.1]], tol=1e-10)[0]
    rep = aut.local_stability(pend, eq.point)
    print(f"  near {n}*pi: point ({eq.point[0]:+.4f}, {eq.point[1]:+.4f})"
          f"  {rep.critical_point.value:8s} -> {rep.conclusion.value}")
    if rep.note:
        print(f"           note: {rep.note}")
