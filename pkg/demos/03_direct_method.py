"""The direct method: certify stability from a candidate function alone.

No trajectories are solved.  A positive definite V with a nonpositive
derivative along the flow pins the verdict; the quality of the candidate
decides how strong a conclusion you get.  For linear systems the matrix
equation A'P + PA = -Q manufactures the candidate.
"""

import numpy as np

from stabkit import linalg, lyapunov as ly
from stabkit.schema import bundled_system

# energy is only semidefinite: derivative vanishes on a whole axis
spring = bundled_system("spring_mass").build()
rep = ly.check_candidate(
    spring, ly.CandidateV("0.5*k*x1^2 + 0.5*x2^2", params={"k": 2.0}))
print("spring with energy candidate:   ", rep.conclusion.value,
      f"(derivative {rep.vdot_verdict.value})")

# a better candidate for the damped version upgrades the verdict
damped = bundled_system("damped_spring").build()
rep = ly.check_candidate(damped, ly.CandidateV("7*x1^2 + 2*x1*x2 + 3*x2^2"))
print("damped spring, tuned candidate: ", rep.conclusion.value,
      f"(derivative {rep.vdot_verdict.value})")

# the matrix-equation route builds that candidate automatically
osc = bundled_system("damped_oscillator").build()
p = ly.solve_lyapunov(osc.rhs.a, np.eye(2))
print("matrix-equation candidate P =", p.tolist(),
      "->", linalg.definiteness(p).kind.value)
rep = ly.check_candidate(osc, ly.CandidateV.quadratic(p))
print("quadratic-candidate conclusion: ", rep.conclusion.value)

# instability has witnesses too
growth = bundled_system("uniform_growth").build()
w = ly.check_instability(growth, ly.CandidateV("x1^2 + x2^2"))
print("repeller witness says unstable: ", w.unstable)
