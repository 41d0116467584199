"""Classify linear autonomous systems by their eigenvalues.

Five planar systems, five different critical points: the sign pattern of
the spectrum decides stability, and for 2x2 systems the taxonomy (node,
saddle, center, spiral) describes the flow geometry around the origin.
"""

from stabkit import autonomous as aut
from stabkit.schema import bundled_system

NAMES = ["coupled_decay", "uniform_growth", "saddle",
         "harmonic_center", "damped_rotation"]

for name in NAMES:
    sysd = bundled_system(name).build()
    a = sysd.rhs.a
    verdict = aut.classify_linear(a)
    taxonomy = aut.classify_critical_point_2d(a)
    eigs = ", ".join(f"{v:.4g}" for v in verdict.eigenvalues)
    print(f"{name:18s} eigenvalues [{eigs}]")
    print(f"{'':18s} -> {verdict.kind.value} ({taxonomy.value}), "
          f"BIBO={verdict.bibo}")

# A marginal spectrum is exactly where the criterion stops deciding:
import numpy as np

print()
print("repeated zero eigenvalue:",
      aut.classify_linear(np.zeros((2, 2))).kind.value)
print("simple zero eigenvalue:  ",
      aut.classify_linear(np.diag([0.0, -1.0])).kind.value)
