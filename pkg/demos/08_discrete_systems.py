"""Discrete-time stability: differences instead of derivatives.

The one-step difference of a candidate V plays the role the derivative
plays in continuous time.  A cubic feedback term decides the verdict:
contracting for a < 0, neutral at a = 0.
"""

import numpy as np

from stabkit import discrete as dc, odeint
from stabkit.lyapunov import CandidateV
from stabkit.schema import bundled_system

V = CandidateV("0.5*x1^2 + 2*x1*x2 + 4*x2^2")

for name in ("cubic_map", "cubic_map_neutral"):
    sysd = bundled_system(name).build()
    a = sysd.params["a"]
    rep = dc.classify_discrete(sysd, V, radius=0.3)
    dv = dc.delta_v(sysd, V, [0.1, 0.1])
    print(f"{name:18s} a={a:+.1f}  delta-V(0.1,0.1)={dv:+.6f}  "
          f"-> {rep.conclusion.value}")

# sampled-time approximation of a continuous system
pend = bundled_system("pendulum").build()
disc = dc.euler_discretize(pend, 0.01)
orbit = dc.iterate(disc, [0.1, 0.0], 100)
reference = odeint.integrate(pend, [0.1, 0.0], 0.0, 1.0, 1e-3)
gap = np.linalg.norm(orbit.states[-1] - reference.states[-1])
print(f"\nsampled pendulum vs continuous at t=1: gap {gap:.2e} "
      "(first-order discretization)")

orbit = dc.iterate(dc.DiscreteSystem(1, ("2*x1",)), [1.0], 60)
print(f"doubling map escapes after {len(orbit.states) - 1} steps "
      f"(escaped={orbit.escaped})")
