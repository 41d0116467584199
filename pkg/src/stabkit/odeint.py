"""Deterministic fixed-step integration.

Classical RK4 for vector ODEs and fundamental-matrix ODEs, plus the method
of steps for linear multi-delay equations.  Fixed step, no adaptivity: the
point is bit-reproducible trajectories, not efficiency.  A state component
beyond ``ESCAPE_THRESHOLD`` (or non-finite) aborts the run with
:class:`NonFiniteStateError`, which doubles as the finite-time-escape verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from . import expr as ex
from .errors import (
    DimensionMismatchError,
    HistoryGapError,
    NonFiniteStateError,
    SampleCapError,
)

__all__ = [
    "LinearConstant", "LinearTimeVarying", "Nonlinear", "Delay", "SystemDef",
    "Trajectory", "HistoryFn", "integrate", "integrate_matrix", "integrate_dde",
    "compile_matrix", "dde_step",
]

ESCAPE_THRESHOLD = 1e12
SAMPLE_CAP = 10_000_000


# --- system definitions --------------------------------------------------------

ExprEntry = Union[ex.Expr, float, int, str]


def _expr_grid(entries, params) -> tuple[tuple[ex.Expr, ...], ...]:
    return tuple(tuple(ex.as_expr(e, params) for e in row) for row in entries)


def compile_matrix(entries: Sequence[Sequence[ExprEntry]],
                   params: Mapping[str, float] | None = None,
                   ) -> Callable[[float], np.ndarray]:
    """Compile a grid of expression entries to a fast ``t -> ndarray``."""
    grid = _expr_grid(entries, set(params or ()))
    fns = [[ex.compile_expr(e, params) for e in row] for row in grid]
    empty: tuple[float, ...] = ()

    def at(t: float) -> np.ndarray:
        return np.array([[f(empty, t) for f in row] for row in fns])

    return at


def fold_constant_grid(entries, params: Mapping[str, float]):
    """Evaluate an expression grid to floats when no entry depends on time.

    Lets definition files spell constants exactly ("exp(-0.4)/3") while the
    system is still recognized as time-invariant.  Returns an ndarray, or
    None when some entry genuinely varies with t.
    """
    grid = _expr_grid(entries, set(params))
    names = set()
    for row in grid:
        for e in row:
            names |= ex.free_vars(e)
    if (names - set(params)) & {"t", "k"} or \
            any(name.startswith("x") for name in names - set(params)):
        return None
    fn = compile_matrix(grid, params)
    return fn(0.0)


@dataclass(frozen=True)
class LinearConstant:
    """Right-hand side ``x' = a x`` (``b`` kept for equilibrium analysis)."""
    a: np.ndarray
    b: np.ndarray | None = None


@dataclass(frozen=True)
class LinearTimeVarying:
    """Right-hand side ``x' = P(t) x`` with expression entries."""
    entries: tuple[tuple[ex.Expr, ...], ...]


@dataclass(frozen=True)
class Nonlinear:
    """Right-hand side ``x_i' = f_i(x, t)``, one expression per component."""
    components: tuple[ex.Expr, ...]


@dataclass(frozen=True)
class Delay:
    """One delayed feedback term ``coeff * x(t - lag)``.

    ``coeff`` is a constant matrix or a grid of expressions of ``t``.
    """
    lag: float
    coeff: object


@dataclass
class SystemDef:
    """A continuous system: undelayed right-hand side plus optional delays.

    Construction normalizes entries (strings parse, numbers wrap) and
    validates dimensions; instances are treated as immutable after that.
    """

    dimension: int
    rhs: LinearConstant | LinearTimeVarying | Nonlinear
    delays: tuple[Delay, ...] = ()
    period: float | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        n = self.dimension
        if n < 1:
            raise DimensionMismatchError("dimension must be >= 1")
        self.params = dict(self.params)
        rhs = self.rhs
        if isinstance(rhs, LinearConstant):
            a = np.asarray(rhs.a, dtype=float)
            if a.shape != (n, n):
                raise DimensionMismatchError(f"A must be {n}x{n}, got {a.shape}")
            b = None if rhs.b is None else np.asarray(rhs.b, dtype=float)
            if b is not None and b.shape[0] != n:
                raise DimensionMismatchError("B must have n rows")
            self.rhs = LinearConstant(a, b)
        elif isinstance(rhs, LinearTimeVarying):
            grid = _expr_grid(rhs.entries, set(self.params))
            if len(grid) != n or any(len(row) != n for row in grid):
                raise DimensionMismatchError(f"coefficient grid must be {n}x{n}")
            self.rhs = LinearTimeVarying(grid)
        elif isinstance(rhs, Nonlinear):
            comps = tuple(ex.as_expr(c, set(self.params)) for c in rhs.components)
            if len(comps) != n:
                raise DimensionMismatchError(
                    f"need {n} component expressions, got {len(comps)}")
            for c in comps:
                if ex.max_state_index(c) > n:
                    raise DimensionMismatchError(
                        f"expression {ex.to_string(c)!r} references a state "
                        f"variable beyond dimension {n}")
            self.rhs = Nonlinear(comps)
        else:
            raise TypeError(f"unsupported rhs {rhs!r}")

        delays = []
        last = 0.0
        for d in self.delays:
            if d.lag <= 0:
                raise DimensionMismatchError("delay lags must be positive")
            if d.lag < last:
                raise DimensionMismatchError("delays must be sorted ascending")
            last = d.lag
            delays.append(Delay(float(d.lag), self._coerce_coeff(d.coeff)))
        self.delays = tuple(delays)

    def _coerce_coeff(self, coeff):
        n = self.dimension
        if isinstance(coeff, np.ndarray) and coeff.dtype != object:
            arr = np.asarray(coeff, dtype=float)
            if arr.shape != (n, n):
                raise DimensionMismatchError("delay coefficient must be n x n")
            return arr
        if isinstance(coeff, (list, tuple)) and coeff and \
                not isinstance(coeff[0], (list, tuple)):
            raise DimensionMismatchError("delay coefficient must be a matrix")
        if isinstance(coeff, (list, tuple)):
            if all(isinstance(v, (int, float)) for row in coeff for v in row):
                arr = np.asarray(coeff, dtype=float)
                if arr.shape != (n, n):
                    raise DimensionMismatchError("delay coefficient must be n x n")
                return arr
            grid = _expr_grid(coeff, set(self.params))
            if len(grid) != n or any(len(row) != n for row in grid):
                raise DimensionMismatchError("delay coefficient must be n x n")
            folded = fold_constant_grid(grid, self.params)
            return grid if folded is None else folded
        arr = np.asarray(coeff, dtype=float)
        if arr.shape != (n, n):
            raise DimensionMismatchError("delay coefficient must be n x n")
        return arr

    # -- helpers ---------------------------------------------------------------

    @property
    def max_lag(self) -> float:
        return self.delays[-1].lag if self.delays else 0.0

    def is_autonomous(self) -> bool:
        if self.delays:
            return False
        if isinstance(self.rhs, LinearConstant):
            return True
        if isinstance(self.rhs, LinearTimeVarying):
            return not any("t" in ex.free_vars(e) and "t" not in self.params
                           for row in self.rhs.entries for e in row)
        return not any("t" in ex.free_vars(c) and "t" not in self.params
                       for c in self.rhs.components)

    def rhs_callable(self) -> Callable[[np.ndarray, float], np.ndarray]:
        """Compiled evaluator of the undelayed right-hand side."""
        rhs = self.rhs
        if isinstance(rhs, LinearConstant):
            a = rhs.a

            def f(x: np.ndarray, t: float) -> np.ndarray:
                return a @ x

            return f
        if isinstance(rhs, LinearTimeVarying):
            p = compile_matrix(rhs.entries, self.params)

            def f(x: np.ndarray, t: float) -> np.ndarray:
                return p(t) @ x

            return f
        fns = [ex.compile_expr(c, self.params) for c in rhs.components]

        def f(x: np.ndarray, t: float) -> np.ndarray:
            return np.array([fn(x, t) for fn in fns])

        return f

    def rhs_vectorized(self) -> Callable[[np.ndarray, float], np.ndarray]:
        """Batch evaluator ``F(X, t) -> (N, n)`` over rows of sample points."""
        rhs = self.rhs
        if isinstance(rhs, LinearConstant):
            a = rhs.a

            def fv(X: np.ndarray, t: float) -> np.ndarray:
                return X @ a.T

            return fv
        if isinstance(rhs, LinearTimeVarying):
            p = compile_matrix(rhs.entries, self.params)

            def fv(X: np.ndarray, t: float) -> np.ndarray:
                return X @ p(t).T

            return fv
        fns = [ex.compile_expr_vec(c, self.params) for c in rhs.components]

        def fv(X: np.ndarray, t: float) -> np.ndarray:
            return np.column_stack([fn(X, t) for fn in fns])

        return fv

    def delay_coeff_callables(self) -> list[Callable[[float], np.ndarray]]:
        out = []
        for d in self.delays:
            if isinstance(d.coeff, np.ndarray):
                const = d.coeff
                out.append(lambda t, _c=const: _c)
            else:
                out.append(compile_matrix(d.coeff, self.params))
        return out


# --- trajectories ---------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    """Dense solution samples on a uniform grid (trailing partial step allowed)."""

    times: np.ndarray
    states: np.ndarray
    step: float

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def at_end(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, target) -> None:
        """Write ``t,x1,...,xn`` rows at full precision."""
        close = False
        if isinstance(target, (str, bytes)) or hasattr(target, "__fspath__"):
            fh = open(target, "w", encoding="utf-8")
            close = True
        else:
            fh = target
        try:
            names = ",".join(f"x{i + 1}" for i in range(self.dimension))
            fh.write(f"t,{names}\n")
            for t, row in zip(self.times, self.states):
                cells = ",".join(repr(float(v)) for v in row)
                fh.write(f"{float(t)!r},{cells}\n")
        finally:
            if close:
                fh.close()


@dataclass(frozen=True)
class HistoryFn:
    """Sampled history on ``[-span, 0]`` with piecewise-linear interpolation."""

    times: np.ndarray
    values: np.ndarray

    @classmethod
    def constant(cls, value, span: float) -> "HistoryFn":
        v = np.atleast_1d(np.asarray(value, dtype=float))
        times = np.array([-float(span), 0.0])
        return cls(times, np.vstack([v, v]))

    @classmethod
    def from_callable(cls, fn, span: float, samples: int = 256) -> "HistoryFn":
        times = np.linspace(-float(span), 0.0, samples)
        return cls(times, np.vstack([np.atleast_1d(fn(t)) for t in times]))

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 2 or np.any(np.diff(t) <= 0):
            raise HistoryGapError("history times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def span(self) -> float:
        return -float(self.times[0])

    def __call__(self, t: float) -> np.ndarray:
        ts = self.times
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise HistoryGapError(f"history not defined at t={t!r}")
        j = int(np.searchsorted(ts, t, side="right")) - 1
        j = min(max(j, 0), len(ts) - 2)
        w = (t - ts[j]) / (ts[j + 1] - ts[j])
        w = min(max(w, 0.0), 1.0)
        return (1.0 - w) * self.values[j] + w * self.values[j + 1]


# --- integrators ----------------------------------------------------------------

def _grid(t0: float, t1: float, h: float) -> tuple[int, float]:
    """Number of full steps and the (possibly zero) trailing remainder."""
    if h <= 0:
        raise ValueError("step must be positive")
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    span = t1 - t0
    n_full = int(math.floor(span / h + 1e-9))
    rem = span - n_full * h
    if rem < 1e-9 * max(1.0, abs(t1)):
        rem = 0.0
    if n_full + 2 > SAMPLE_CAP:
        raise SampleCapError(f"trajectory would exceed {SAMPLE_CAP} samples")
    return n_full, rem


def _check_state(x: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > ESCAPE_THRESHOLD):
        raise NonFiniteStateError(t)


def _rk4_step(f, x, t, h):
    k1 = f(x, t)
    k2 = f(x + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(x + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(x + h * k3, t + h)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(sys: SystemDef, x0, t0: float, t1: float, h: float) -> Trajectory:
    """Classical RK4 on ``[t0, t1]`` with fixed step ``h``.

    Fourth-order accurate on smooth systems: halving ``h`` cuts the endpoint
    error roughly 16x.  Raises :class:`NonFiniteStateError` at the first
    escaping step (cf. finite-time escape systems).
    """
    if sys.delays:
        raise ValueError("system has delays; use integrate_dde")
    x = np.asarray(x0, dtype=float)
    if x.shape != (sys.dimension,):
        raise DimensionMismatchError(
            f"x0 must have length {sys.dimension}, got shape {x.shape}")
    f = sys.rhs_callable()
    n_full, rem = _grid(t0, t1, h)
    times = [t0]
    states = [x]
    t = t0
    for i in range(n_full):
        x = _rk4_step(f, x, t, h)
        t = t0 + (i + 1) * h
        _check_state(x, t)
        times.append(t)
        states.append(x)
    if rem > 0.0:
        x = _rk4_step(f, x, t, rem)
        t = t1
        _check_state(x, t)
        times.append(t)
        states.append(x)
    return Trajectory(np.array(times), np.vstack(states), h)


def integrate_matrix(sys: SystemDef, t0: float, t1: float, h: float) -> np.ndarray:
    """Fundamental matrix ``X(t1)`` with ``X(t0) = I`` for a linear system.

    Columns are the fundamental system of solutions (unit initial
    conditions), advanced together by matrix-valued RK4.
    """
    rhs = sys.rhs
    if isinstance(rhs, LinearConstant):
        a = rhs.a

        def f(X: np.ndarray, t: float) -> np.ndarray:
            return a @ X
    elif isinstance(rhs, LinearTimeVarying):
        p = compile_matrix(rhs.entries, sys.params)

        def f(X: np.ndarray, t: float) -> np.ndarray:
            return p(t) @ X
    else:
        raise ValueError("integrate_matrix requires a linear system")
    n_full, rem = _grid(t0, t1, h)
    X = np.eye(sys.dimension)
    t = t0
    for i in range(n_full):
        X = _rk4_step(f, X, t, h)
        t = t0 + (i + 1) * h
        _check_state(X, t)
    if rem > 0.0:
        X = _rk4_step(f, X, t, rem)
        _check_state(X, t1)
    return X


def dde_step(lags: Sequence[float], target: float = 1e-3) -> float:
    """A step near ``target`` that divides every lag to within 1e-9."""
    smallest = min(lags)
    m = max(1, round(smallest / target))
    for extra in range(0, 1000):
        h = smallest / (m + extra)
        if all(abs(lag - round(lag / h) * h) <= 1e-9 for lag in lags):
            return h
    raise ValueError(f"no common step near {target} divides lags {lags}")


def integrate_dde(sys: SystemDef, history: HistoryFn, t1: float,
                  h: float) -> Trajectory:
    """Method of steps for ``x'(t) = f(x, t) + sum_i A_i(t) x(t - lag_i)``.

    Starts at ``t = 0`` with ``x(t) = history(t)`` on ``[-max lag, 0]``.
    Delayed values are read from the accumulating grid by linear
    interpolation; ``h`` must divide every lag (within 1e-9) so lookups at
    whole steps land on grid nodes.
    """
    if not sys.delays:
        raise ValueError("system has no delays; use integrate")
    lags = [d.lag for d in sys.delays]
    for lag in lags:
        if abs(lag - round(lag / h) * h) > 1e-9:
            raise ValueError(f"step {h} does not divide delay lag {lag}")
    if history.span < sys.max_lag - 1e-12:
        raise HistoryGapError(
            f"history covers [{-history.span}, 0] but max lag is {sys.max_lag}")

    f0 = sys.rhs_callable()
    coeffs = sys.delay_coeff_callables()
    lag_steps = [round(lag / h) for lag in lags]

    n_hist = round(sys.max_lag / h)
    buf: list[np.ndarray] = [history(-(n_hist - j) * h) for j in range(n_hist)]
    buf.append(history(0.0))
    base = len(buf) - 1  # index of the t=0 grid node

    def delayed(node: int, cfrac: float, steps_back: int) -> np.ndarray:
        # value at (node + cfrac)*h - lag; cfrac in units of h within [0, 1]
        pos = base + node - steps_back
        if cfrac <= 0.0:
            return buf[pos]
        if cfrac >= 1.0:
            return buf[pos + 1]
        return (1.0 - cfrac) * buf[pos] + cfrac * buf[pos + 1]

    def rhs(x: np.ndarray, node: int, cfrac: float) -> np.ndarray:
        t = (node + cfrac) * h
        dx = f0(x, t)
        for fn, sb in zip(coeffs, lag_steps):
            dx = dx + fn(t) @ delayed(node, cfrac, sb)
        return dx

    def step(x: np.ndarray, node: int, hh: float) -> np.ndarray:
        half = 0.5 * hh / h
        full = hh / h
        k1 = rhs(x, node, 0.0)
        k2 = rhs(x + 0.5 * hh * k1, node, half)
        k3 = rhs(x + 0.5 * hh * k2, node, half)
        k4 = rhs(x + hh * k3, node, full)
        return x + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    n_full, rem = _grid(0.0, t1, h)
    times = [0.0]
    states = [buf[-1]]
    x = buf[-1]
    for i in range(n_full):
        x = step(x, i, h)
        t = (i + 1) * h
        _check_state(x, t)
        buf.append(x)
        times.append(t)
        states.append(x)
        if len(buf) > SAMPLE_CAP:
            raise SampleCapError(f"trajectory would exceed {SAMPLE_CAP} samples")
    if rem > 0.0:
        # trailing partial step: delayed lookups interpolate inside the last
        # grid cell, and the off-grid result never enters the lookup buffer
        x = step(x, n_full, rem)
        _check_state(x, t1)
        times.append(t1)
        states.append(x)
    return Trajectory(np.array(times), np.vstack(states), h)
