"""stabkit: stability analysis of dynamical systems.

Eigenvalue classification of linear autonomous systems, linearization of
nonlinear ones, the Lyapunov direct method with user-supplied candidates,
alpha-stability certificates for linear multi-delay systems, Floquet
analysis of periodic systems, and the discrete-time direct method, with a
deterministic fixed-step integrator underneath and a small expression
language for file-defined systems.
"""

from . import alpha, autonomous, discrete, expr, floquet, linalg, lyapunov, odeint
from .errors import StabkitError

__all__ = [
    "alpha", "autonomous", "discrete", "expr", "floquet", "linalg",
    "lyapunov", "odeint", "StabkitError", "__version__",
]

__version__ = "0.1.0"
