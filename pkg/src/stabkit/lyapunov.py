"""Lyapunov's direct method.

Candidate functions are user supplied (there is no general construction
rule); the toolkit checks them.  All definiteness findings here come from
deterministic Halton scans, so they are one-sided by design: a "definite"
verdict means *definite on the sampled points, with margin*, while a single
violating sample is conclusive for "not definite".  Conclusions only ever
claim what the sufficient conditions support; a failed candidate yields
``NO_CONCLUSION``, never "unstable".

The module also owns the continuous Lyapunov matrix equation (solved by
Kronecker vectorization), the generalized time-varying Sylvester scan for
quadratic forms, instability witnesses, and sublevel-set estimation of the
domain of attraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import expr as ex
from . import linalg
from .errors import (
    DimensionMismatchError,
    DomainError,
    InvalidCandidateError,
    NoRegionError,
    NotAnEquilibriumError,
    SingularLyapunovOperatorError,
)
from .odeint import SystemDef
from .sampling import ball_points, halton, sphere_directions

__all__ = [
    "solve_lyapunov", "CandidateV", "vdot_along", "ScanConfig",
    "SignVerdict", "Probe", "Conclusion", "LyapunovReport", "check_candidate",
    "InstabilityReport", "check_instability", "QuadraticFormTV",
    "SylvesterReport", "sylvester_tv", "attraction_region",
]

#: sampled-definiteness margin: min ratio must reach this fraction of the max
MARGIN = 1e-4
#: probes on time windows must keep at least this fraction of their bound
TREND_FLOOR = 0.5


def solve_lyapunov(a, q) -> np.ndarray:
    """Solve the continuous Lyapunov matrix equation ``A'P + PA = -Q``.

    Vectorized as ``(I (x) A' + A' (x) I) vec(P) = -vec(Q)`` and solved
    densely; fine for the n <= ~50 systems this toolkit targets.  Raises
    :class:`SingularLyapunovOperatorError` when A and -A share an eigenvalue
    (the operator is singular and no unique solution exists).  The result is
    symmetrized before return.
    """
    am = linalg.as_matrix(a, square=True)
    qm = linalg.as_matrix(q, square=True)
    n = am.shape[0]
    if qm.shape != (n, n):
        raise DimensionMismatchError("A and Q must have equal size")
    eye = np.eye(n)
    op = np.kron(eye, am.T) + np.kron(am.T, eye)
    sv = np.linalg.svd(op, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= 1e-12 * sv[0]:
        raise SingularLyapunovOperatorError(
            "A and -A share an eigenvalue: no unique Lyapunov solution")
    vec_p = np.linalg.solve(op, -qm.reshape(-1, order="F"))
    p = vec_p.reshape((n, n), order="F")
    return 0.5 * (p + p.T)


# --- candidate functions ---------------------------------------------------------

@dataclass
class CandidateV:
    """A candidate scalar function V(x) or V(x, t).

    ``expression`` may be a tree, source text, or a number; gradients are
    taken by central differences with step ``fd_step``.
    """

    expression: ex.Expr
    params: dict = field(default_factory=dict)
    fd_step: float = 1e-5

    def __post_init__(self):
        self.expression = ex.as_expr(self.expression, set(self.params))
        self._fn = ex.compile_expr(self.expression, self.params)
        self._vec = None
        self.time_dependent = "t" in ex.free_vars(self.expression) \
            and "t" not in self.params

    @classmethod
    def quadratic(cls, p) -> "CandidateV":
        """Build V(x) = x' P x as an expression tree."""
        m = linalg.as_matrix(p, square=True)
        n = m.shape[0]
        terms = None
        for i in range(n):
            for j in range(n):
                if m[i, j] == 0.0:
                    continue
                term = ex.Binary("*", ex.Binary("*", ex.Number(float(m[i, j])),
                                                ex.Var(f"x{i + 1}")),
                                 ex.Var(f"x{j + 1}"))
                terms = term if terms is None else ex.Binary("+", terms, term)
        return cls(terms if terms is not None else ex.Number(0.0))

    def value(self, x, t: float = 0.0) -> float:
        return self._fn(np.asarray(x, dtype=float), t)

    def values(self, X: np.ndarray, t) -> np.ndarray:
        if self._vec is None:
            self._vec = ex.compile_expr_vec(self.expression, self.params)
        return self._vec(X, t)

    def max_state_index(self) -> int:
        return ex.max_state_index(self.expression)


def vdot_along(sys: SystemDef, v: CandidateV):
    """Evaluator of the derivative of V along trajectories of ``sys``.

    ``Vdot(x, t) = grad_x V . f(x, t) + dV/dt``, with both the gradient and
    the time partial taken by central differences (the time term only when
    V actually mentions t).
    """
    if v.max_state_index() > sys.dimension:
        raise DimensionMismatchError(
            "candidate references state variables beyond the system dimension")
    f = sys.rhs_callable()
    n = sys.dimension
    h = v.fd_step
    has_t = v.time_dependent

    def vdot(x, t: float = 0.0) -> float:
        x = np.asarray(x, dtype=float)
        fx = f(x, t)
        total = 0.0
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            total += (v.value(x + e, t) - v.value(x - e, t)) / (2.0 * h) * fx[i]
        if has_t:
            total += (v.value(x, t + h) - v.value(x, t - h)) / (2.0 * h)
        return float(total)

    return vdot


# --- scan reports ----------------------------------------------------------------

@dataclass(frozen=True)
class ScanConfig:
    """Scan resolution: Halton points in the ball x a time window."""

    points: int = 4096
    time_samples: int = 32
    t0: float = 0.0
    time_span: float = 50.0


class SignVerdict(Enum):
    NEGATIVE_DEFINITE = "negative-definite"
    NEGATIVE_SEMIDEFINITE = "negative-semidefinite"
    INDEFINITE = "indefinite"


class Conclusion(Enum):
    STABLE = "stable"
    UNIFORMLY_STABLE = "uniformly-stable"
    UNIFORMLY_ASYMPTOTICALLY_STABLE = "uniformly-asymptotically-stable"
    EXPONENTIALLY_STABLE = "exponentially-stable"
    NO_CONCLUSION = "no-conclusion"


_LEVELS = {
    Conclusion.STABLE: ("stable",),
    Conclusion.UNIFORMLY_STABLE: ("stable", "uniformly-stable"),
    Conclusion.UNIFORMLY_ASYMPTOTICALLY_STABLE:
        ("stable", "uniformly-stable", "uniformly-asymptotically-stable"),
    Conclusion.EXPONENTIALLY_STABLE:
        ("stable", "uniformly-stable", "uniformly-asymptotically-stable",
         "exponentially-stable"),
    Conclusion.NO_CONCLUSION: (),
}

_THEOREM = {
    Conclusion.STABLE: "direct-method:stability",
    Conclusion.UNIFORMLY_STABLE: "direct-method:uniform-stability",
    Conclusion.UNIFORMLY_ASYMPTOTICALLY_STABLE:
        "direct-method:uniform-asymptotic-stability",
    Conclusion.EXPONENTIALLY_STABLE: "direct-method:exponential-stability",
    Conclusion.NO_CONCLUSION: "",
}


@dataclass(frozen=True)
class Probe:
    """Outcome of one sampled bound fit.

    ``coefficient`` is the fitted constant of a ``coefficient * ||x||^exponent``
    bound; ``trend`` compares the bound over the late half of the time window
    against the early half (1.0 = steady; values well below 1 mean the bound
    decays with time and cannot hold on an unbounded window).
    """

    established: bool
    exponent: int | None = None
    coefficient: float | None = None
    trend: float = 1.0
    worst_point: tuple[float, ...] | None = None
    note: str = ""


@dataclass(frozen=True)
class LyapunovReport:
    conclusion: Conclusion
    levels: tuple[str, ...]
    theorem: str
    v_positive: Probe
    vdot_verdict: SignVerdict
    vdot_margin: Probe | None
    decrescent: Probe
    radially_unbounded: bool
    global_claim: bool
    w3_minors: tuple[float, ...] | None
    samples: int
    radius: float
    time_window: tuple[float, float]
    worst_vdot: float
    notes: tuple[str, ...] = ()


# --- scan machinery ---------------------------------------------------------------

def _scan_points(sys: SystemDef, v: CandidateV, radius: float,
                 scan: ScanConfig):
    """Joint (x, t) samples: ball points paired with Halton times."""
    n = sys.dimension
    X = ball_points(scan.points, n, radius, exclude=1e-9 * radius)
    time_dep = (not sys.is_autonomous()) or v.time_dependent
    if time_dep:
        u = halton(scan.points, 1, start=11)[:, 0]
        T = scan.t0 + scan.time_span * u
    else:
        T = np.full(scan.points, scan.t0)
    return X, T, time_dep


def _fit_lower_bound(values: np.ndarray, norms: np.ndarray, T: np.ndarray,
                     time_dep: bool, scan: ScanConfig, X: np.ndarray,
                     exponents=(2, 4)) -> Probe:
    """Fit values >= kappa * ||x||^p on samples, with margin and time trend."""
    best: Probe | None = None
    mid = scan.t0 + 0.5 * scan.time_span
    for p in exponents:
        ratios = values / norms**p
        kappa = float(ratios.min())
        # compare the worst ratio against the typical one: ratios can be
        # unbounded above near the origin, so the max is no reference
        typical = float(np.median(ratios))
        if kappa <= 0.0 or typical <= 0.0 or kappa <= MARGIN * typical:
            continue
        trend = 1.0
        if time_dep:
            early = ratios[T <= mid]
            late = ratios[T > mid]
            if len(early) and len(late):
                trend = float(late.min() / early.min()) if early.min() > 0 else 0.0
        candidate = Probe(trend >= TREND_FLOOR, p, kappa, trend,
                          tuple(X[int(ratios.argmin())]),
                          "" if trend >= TREND_FLOOR else
                          "bound decays across the time window")
        if candidate.established:
            return candidate
        best = best or candidate
    if best is not None:
        return best
    worst = int((values / norms**2).argmin())
    return Probe(False, None, None, 1.0, tuple(X[worst]),
                 "no sampled power bound with margin")


def _check_origin_equilibrium(sys: SystemDef, scan: ScanConfig,
                              tol: float = 1e-9) -> None:
    f = sys.rhs_callable()
    zero = np.zeros(sys.dimension)
    times = np.linspace(scan.t0, scan.t0 + scan.time_span, 16) \
        if not sys.is_autonomous() else [scan.t0]
    worst = max(float(np.linalg.norm(f(zero, t))) for t in times)
    if worst >= tol:
        raise NotAnEquilibriumError(
            f"||f(0, t)|| reaches {worst:.3e}; origin is not an equilibrium")


def _check_candidate_zero(v: CandidateV, n: int, scan: ScanConfig) -> None:
    zero = np.zeros(n)
    for t in np.linspace(scan.t0, scan.t0 + scan.time_span, 16):
        if abs(v.value(zero, t)) > 1e-9:
            raise InvalidCandidateError("candidate must satisfy V(0, t) = 0")


def _w3_quadratic_minors(vdot, n: int, t0: float,
                         step: float = 1e-3) -> tuple[float, ...] | None:
    """Leading minors of the quadratic form fitted to -Vdot(., t0) at 0."""
    h = step
    hess = np.empty((n, n))
    try:
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h
            f0 = vdot(np.zeros(n), t0)
            hess[i, i] = (vdot(ei, t0) - 2.0 * f0 + vdot(-ei, t0)) / h**2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h
                hess[i, j] = hess[j, i] = (
                    vdot(ei + ej, t0) - vdot(ei - ej, t0)
                    - vdot(-ei + ej, t0) + vdot(-ei - ej, t0)) / (4.0 * h**2)
    except DomainError:
        return None
    m = -0.5 * hess
    return tuple(float(v) for v in linalg.principal_minors(m))


def _decrescent_probe(sys: SystemDef, v: CandidateV, radius: float,
                      scan: ScanConfig) -> Probe:
    """Is sup_t V(x, t) dominated by a time-free quadratic on the ball?"""
    if not v.time_dependent:
        return Probe(True, 2, None, 1.0, None, "time-invariant candidate")
    n = sys.dimension
    X = ball_points(min(256, scan.points), n, radius, exclude=1e-6 * radius)
    times = scan.t0 + np.linspace(0.0, scan.time_span, scan.time_samples + 1)
    mid = scan.t0 + 0.5 * scan.time_span
    vals = np.empty((len(times), len(X)))
    for i, t in enumerate(times):
        vals[i] = v.values(X, t)
    norms2 = np.einsum("ij,ij->i", X, X)
    sup_all = np.abs(vals).max(axis=0)
    coefficient = float((sup_all / norms2).max())
    early = np.abs(vals[times <= mid]).max(axis=0)
    late = np.abs(vals[times > mid]).max(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.where(early > 0, late / np.maximum(early, 1e-300), 1.0)
    worst = float(growth.max())
    established = worst <= 1.2
    note = "" if established else \
        "sup_t V grows across the time window; no time-free upper bound"
    return Probe(established, 2, coefficient, worst,
                 tuple(X[int(growth.argmax())]), note)


def _radial_probe(v: CandidateV, n: int, t0: float, radius: float) -> bool:
    """Does V grow without bound along rays out to radius 1e3?"""
    dirs = sphere_directions(32, n)
    radii = [max(radius, 1.0), 10.0, 100.0, 1000.0]
    for d in dirs:
        vals = []
        overflow = False
        for r in radii:
            try:
                vals.append(v.value(r * d, t0))
            except DomainError:
                overflow = True  # blew past float range while growing
                break
        if overflow and len(vals) >= 2 and vals[-1] > vals[0]:
            continue
        if overflow:
            return False
        if any(vals[i + 1] < vals[i] for i in range(len(vals) - 1)):
            return False
        if vals[-1] < 100.0 * max(vals[0], 1e-12):
            return False
    return True


def check_candidate(sys: SystemDef, v: CandidateV, radius: float = 1.0,
                    scan: ScanConfig = ScanConfig()) -> LyapunovReport:
    """Check a candidate V on a ball around the origin.

    Requires the origin to be an equilibrium and V(0, t) = 0.  The verdict
    ladder (stable / uniformly stable / uniformly asymptotically stable /
    exponentially stable) follows the classical sufficient conditions:
    sampled positive definiteness of V, the sign of Vdot along trajectories,
    the decrescence probe, and a power-bound fit for the exponential upgrade.
    Uniform labels are only used when the dynamics are time-dependent;
    for autonomous systems uniformity is vacuous and the plain labels of the
    autonomous theory are reported.
    """
    _check_origin_equilibrium(sys, scan)
    _check_candidate_zero(v, sys.dimension, scan)
    X, T, time_dep = _scan_points(sys, v, radius, scan)
    norms = np.linalg.norm(X, axis=1)
    vdot = vdot_along(sys, v)

    v_vals = np.array([v.value(x, t) for x, t in zip(X, T)])
    vd_vals = np.array([vdot(x, t) for x, t in zip(X, T)])

    v_positive = _fit_lower_bound(v_vals, norms, T, time_dep, scan, X)
    notes: list[str] = []
    if time_dep:
        notes.append("definiteness over unbounded t approximated on a "
                     f"finite window [{scan.t0}, {scan.t0 + scan.time_span}]")

    worst_vdot = float(vd_vals.max())
    scale = float(np.abs(vd_vals).max())
    nsd_tol = 1e-9 * (1.0 + scale)
    vdot_margin = None
    if worst_vdot > nsd_tol:
        vdot_verdict = SignVerdict.INDEFINITE
    else:
        margin = _fit_lower_bound(-vd_vals, norms, T, time_dep, scan, X)
        if margin.established:
            vdot_verdict = SignVerdict.NEGATIVE_DEFINITE
            vdot_margin = margin
        else:
            vdot_verdict = SignVerdict.NEGATIVE_SEMIDEFINITE

    decrescent = _decrescent_probe(sys, v, radius, scan)
    radial = _radial_probe(v, sys.dimension, scan.t0, radius)

    nonautonomous = not sys.is_autonomous()
    conclusion = Conclusion.NO_CONCLUSION
    if v_positive.established and vdot_verdict is not SignVerdict.INDEFINITE:
        if vdot_verdict is SignVerdict.NEGATIVE_SEMIDEFINITE:
            conclusion = (Conclusion.UNIFORMLY_STABLE
                          if nonautonomous and decrescent.established
                          else Conclusion.STABLE)
        else:
            # the asymptotic upgrade needs decrescence (automatic for a
            # time-free candidate); a negative derivative alone only pins
            # plain stability
            if not decrescent.established:
                conclusion = Conclusion.STABLE
            else:
                conclusion = Conclusion.UNIFORMLY_ASYMPTOTICALLY_STABLE
                if _exponential_fit(v_vals, vd_vals, norms, vdot_margin,
                                    v_positive):
                    conclusion = Conclusion.EXPONENTIALLY_STABLE

    w3 = None
    if vdot_verdict is SignVerdict.NEGATIVE_DEFINITE:
        w3 = _w3_quadratic_minors(vdot, sys.dimension, scan.t0)

    return LyapunovReport(
        conclusion=conclusion,
        levels=_LEVELS[conclusion],
        theorem=_THEOREM[conclusion],
        v_positive=v_positive,
        vdot_verdict=vdot_verdict,
        vdot_margin=vdot_margin,
        decrescent=decrescent,
        radially_unbounded=radial,
        global_claim=bool(radial and conclusion is not Conclusion.NO_CONCLUSION),
        w3_minors=w3,
        samples=scan.points,
        radius=radius,
        time_window=(scan.t0, scan.t0 + scan.time_span),
        worst_vdot=worst_vdot,
        notes=tuple(notes),
    )


def _exponential_fit(v_vals, vd_vals, norms, vdot_margin, v_positive) -> bool:
    """Power bounds K1 ||x||^2 <= V <= K2 ||x||^2 and Vdot <= -K3 ||x||^2."""
    if vdot_margin is None or vdot_margin.exponent != 2:
        return False
    ratios = v_vals / norms**2
    k1 = float(ratios.min())
    return k1 > 0.0 and k1 > MARGIN * float(np.median(ratios))


@dataclass(frozen=True)
class InstabilityReport:
    unstable: bool
    w_zero_at_origin: bool
    w_nonnegative: bool
    w_nontrivial: bool
    wdot_positive_definite: bool
    worst_wdot: float
    samples: int
    radius: float


def check_instability(sys: SystemDef, w: CandidateV, radius: float = 1.0,
                      scan: ScanConfig = ScanConfig()) -> InstabilityReport:
    """Instability witness: W(0)=0, W >= 0, and Wdot > 0 away from the origin.

    All three conditions sampled on the ball; ``unstable=True`` only when
    every one holds with margin.  The conditions are sufficient, not
    necessary: a False result does not certify stability.
    """
    _check_origin_equilibrium(sys, scan)
    X, T, time_dep = _scan_points(sys, w, radius, scan)
    norms = np.linalg.norm(X, axis=1)
    wdot = vdot_along(sys, w)
    w_vals = np.array([w.value(x, t) for x, t in zip(X, T)])
    wd_vals = np.array([wdot(x, t) for x, t in zip(X, T)])

    zero = np.zeros(sys.dimension)
    w_zero = all(abs(w.value(zero, t)) <= 1e-9
                 for t in np.linspace(scan.t0, scan.t0 + scan.time_span, 8))
    scale = float(np.abs(w_vals).max()) if len(w_vals) else 0.0
    w_nonneg = bool(w_vals.min() >= -1e-9 * (1.0 + scale))
    w_nontrivial = bool(w_vals.max() > 1e-9 * (1.0 + scale))
    margin = _fit_lower_bound(wd_vals, norms, T, time_dep, scan, X)
    wdot_pd = margin.established
    return InstabilityReport(
        unstable=bool(w_zero and w_nonneg and w_nontrivial and wdot_pd),
        w_zero_at_origin=w_zero,
        w_nonnegative=w_nonneg,
        w_nontrivial=w_nontrivial,
        wdot_positive_definite=wdot_pd,
        worst_wdot=float(wd_vals.min()),
        samples=scan.points,
        radius=radius,
    )


# --- generalized Sylvester criterion ----------------------------------------------

@dataclass
class QuadraticFormTV:
    """Quadratic form ``V(x, t) = x' M(x, t) x`` with expression entries.

    The coefficient grid is symmetrized structurally: entries are read from
    the upper triangle and mirrored, so the form is symmetric by
    construction.
    """

    entries: tuple[tuple[ex.Expr, ...], ...]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = [[ex.as_expr(e, set(self.params)) for e in row]
                for row in self.entries]
        n = len(grid)
        if any(len(row) != n for row in grid):
            raise DimensionMismatchError("coefficient grid must be square")
        for i in range(n):
            for j in range(i + 1, n):
                grid[j][i] = grid[i][j]
        self.entries = tuple(tuple(row) for row in grid)
        self._fns = [[ex.compile_expr(e, self.params) for e in row]
                     for row in self.entries]

    @property
    def dimension(self) -> int:
        return len(self.entries)

    def matrix_at(self, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([[f(x, t) for f in row] for row in self._fns])


@dataclass(frozen=True)
class SylvesterReport:
    positive_definite: bool
    min_minors: tuple[float, ...]
    deltas: tuple[float, ...]
    worst_point: tuple[float, ...]
    worst_time: float
    samples: int


def sylvester_tv(q: QuadraticFormTV, t0: float, time_span: float = 50.0,
                 mu: float = 1.0, deltas=1e-6, x_points: int = 256,
                 time_samples: int = 128) -> SylvesterReport:
    """Generalized Sylvester criterion scan for a time-varying quadratic form.

    Positive definite iff every leading minor of the coefficient matrix
    stays at or above its delta across the sampled region
    ``sum x_j^2 < mu, t in [t0, t0 + time_span]``.
    """
    n = q.dimension
    if np.isscalar(deltas):
        deltas_t = tuple(float(deltas) for _ in range(n))
    else:
        deltas_t = tuple(float(d) for d in deltas)
        if len(deltas_t) != n:
            raise DimensionMismatchError("need one delta per minor")
    X = ball_points(x_points, n, np.sqrt(mu) * (1.0 - 1e-12))
    times = t0 + np.linspace(0.0, time_span, time_samples)
    min_minors = np.full(n, np.inf)
    worst_x = tuple(X[0])
    worst_t = float(times[0])
    for x in X:
        for t in times:
            minors = linalg.principal_minors(q.matrix_at(x, t))
            k = int(np.argmin(minors - min_minors))
            if minors[k] < min_minors[k]:
                worst_x, worst_t = tuple(x), float(t)
            min_minors = np.minimum(min_minors, minors)
    ok = bool(np.all(min_minors >= np.asarray(deltas_t)))
    return SylvesterReport(ok, tuple(float(v) for v in min_minors), deltas_t,
                           worst_x, worst_t, x_points * time_samples)


# --- domain of attraction -----------------------------------------------------------

def attraction_region(sys: SystemDef, p, cmax: float, levels: int = 48,
                      directions: int = 512, t: float = 0.0,
                      iterations: int = 40) -> float:
    """Largest c <= cmax whose sublevel set {x'Px <= c} has Vdot < 0 throughout.

    Every level set {V = c'} on a ladder below c is sampled along Halton
    directions (points within 1e-6 of the origin excluded); bisection runs
    ``iterations`` rounds.  The region certified by one quadratic V is in
    general only part of the true domain of attraction.  Raises
    :class:`NoRegionError` when violations appear arbitrarily close to the
    origin.
    """
    pm = linalg.as_matrix(p, square=True)
    verdict = linalg.definiteness(pm)
    if not verdict.is_positive_definite:
        raise ValueError("P must be positive definite")
    f = sys.rhs_callable()
    zero = np.zeros(sys.dimension)
    if float(np.linalg.norm(f(zero, t))) >= 1e-9:
        raise NotAnEquilibriumError("origin is not an equilibrium")
    fv = sys.rhs_vectorized()
    dirs = sphere_directions(directions, sys.dimension)
    quad = np.einsum("ij,jk,ik->i", dirs, pm, dirs)  # d'Pd per direction

    def passes(c: float) -> bool:
        for j in range(1, levels + 1):
            cj = c * j / levels
            X = dirs * np.sqrt(cj / quad)[:, None]
            keep = np.linalg.norm(X, axis=1) > 1e-6
            if not np.any(keep):
                continue
            pts = X[keep]
            vdot = 2.0 * np.einsum("ij,ij->i", pts @ pm, fv(pts, t))
            if not np.all(vdot < 0.0):
                return False
        return True

    if passes(cmax):
        return float(cmax)
    tiny = cmax * 1e-9
    if not passes(tiny):
        raise NoRegionError("Vdot >= 0 on level sets arbitrarily close to 0")
    lo, hi = tiny, cmax
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)
