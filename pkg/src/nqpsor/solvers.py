"""Iteration schemes for box-constrained quadratic programming.

The projected SOR sweep updates one component at a time, clamping each to
its box immediately, which keeps every iterate feasible and makes the
objective decrease monotonically for any relaxation parameter in (0, 2).
Through the change of variables h = 2*omega / (2 - omega) the sweep is the
Itoh-Abe discrete gradient integrator with preconditioner diag(A)^-1 and
step size h, so relaxation-parameter control becomes step-size control:
the adaptive solvers grow or shrink h multiplicatively from Wolfe-style
tests on the completed step and convert back to omega each iteration.  The
tests only decide the *next* step size; the current iterate is always kept,
which is safe precisely because of the monotone dissipation.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _backend as kernels
from .diagnostics import IterationTrace, check_dissipation
from .linalg import as_vector, matvec
from .model import NnlsProblem, shift


class NumericalError(RuntimeError):
    """A non-finite value appeared in an iterate."""


class Status(Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"


def h_to_omega(h):
    """Relaxation parameter 2h / (2 + h) in (0, 2) for step size h > 0."""
    if not h > 0:
        raise ValueError("h must be positive")
    return 2.0 * h / (2.0 + h)


def omega_to_h(omega):
    """Step size 2*omega / (2 - omega) > 0 for omega in (0, 2)."""
    if not 0.0 < omega < 2.0:
        raise ValueError("omega must lie in (0, 2)")
    return 2.0 * omega / (2.0 - omega)


@dataclass(frozen=True)
class StepSize:
    """Paired step size and relaxation parameter.

    The step size is canonical; the relaxation parameter is derived through
    the bijection omega = 2h / (2 + h), with h = 2 pairing with omega = 1.
    """

    h: float
    omega: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not 0.0 < self.omega < 2.0:
            raise ValueError("omega must lie in (0, 2)")
        if not math.isclose(self.omega, h_to_omega(self.h), rel_tol=1e-13):
            raise ValueError("h and omega are not related by omega = 2h/(2+h)")

    @classmethod
    def from_h(cls, h):
        return cls(h=float(h), omega=h_to_omega(float(h)))

    @classmethod
    def from_omega(cls, omega):
        return cls(h=omega_to_h(float(omega)), omega=float(omega))


@dataclass(frozen=True)
class WolfeParams:
    """Step-size control constants.

    c1 and c2 weigh the sufficient-decrease and curvature tests, lambda1 and
    lambda2 are the growth factors (lambda2 applies when the step looks too
    small), rho is the shrink factor, and (eps_omega, max_omega) is the open
    interval the relaxation parameter must stay inside; leaving it resets
    the step size to h = 2.
    """

    c1: float = 0.89
    c2: float = 0.95
    lambda1: float = 1.15
    lambda2: float = 1.4
    rho: float = 0.85
    eps_omega: float = 0.05
    max_omega: float = 1.99

    def __post_init__(self):
        if not 0.0 < self.c1 < 1.0:
            raise ValueError("c1 must lie in (0, 1)")
        if not self.c1 < self.c2 < 1.0:
            raise ValueError("c2 must lie in (c1, 1)")
        if not self.lambda1 > 1.0:
            raise ValueError("lambda1 must exceed 1")
        if not self.lambda2 > self.lambda1:
            raise ValueError("lambda2 must exceed lambda1")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not 0.0 < self.eps_omega < 2.0:
            raise ValueError("eps_omega must lie in (0, 2)")
        if not self.eps_omega < self.max_omega < 2.0:
            raise ValueError("max_omega must lie in (eps_omega, 2)")


@dataclass
class SolverConfig:
    """Tolerances, iteration caps, and adaptive-control parameters.

    The stopping test is ||x_new - x_old||_2 <= tolerance.  freeze_m is the
    statistics window of the parameter-freezing solver and freeze_threshold
    the log10 decrement gate that opens its statistics phase; shift_sigma
    is the diagonal shift of the two-stage solver ("auto" uses min(diag A)).
    record_iterates additionally stores every iterate on the trace, which
    the equivalence tests use.
    """

    tolerance: float = 1e-10
    max_iterations: int = 100_000
    wolfe: WolfeParams = field(default_factory=WolfeParams)
    freeze_m: int = 10
    freeze_threshold: float = -2.0
    shift_sigma: object = "auto"
    record_trace: bool = True
    record_iterates: bool = False
    kkt_every: int = 10
    verify_dissipation: bool = False

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.freeze_m < 1:
            raise ValueError("freeze_m must be >= 1")
        if isinstance(self.shift_sigma, str):
            if self.shift_sigma != "auto":
                raise ValueError("shift_sigma must be positive or 'auto'")
        elif not self.shift_sigma > 0:
            raise ValueError("shift_sigma must be positive or 'auto'")
        if self.kkt_every < 0:
            raise ValueError("kkt_every must be >= 0")


@dataclass
class SolveResult:
    """Final iterate, termination status, and per-iteration records."""

    x: np.ndarray
    status: Status
    iterations: int
    trace: IterationTrace = None
    frozen_omega: float = None
    shift_iterations: int = None
    shift_sigma: float = None

    @property
    def converged(self):
        return self.status is Status.CONVERGED


def wolfe_update(h, V_new, V_old, g_old_dot_dx, g_new_dot_dx, wp):
    """Next step size from the sufficient-decrease and curvature tests.

    Returns lambda1*h when both tests pass, lambda2*h when the decrease test
    passes but the curvature test flags the step as too small, and rho*h
    when the decrease test fails.  Pure; the caller applies the safeguard.
    """
    if V_new <= V_old + wp.c1 * g_old_dot_dx:
        if wp.c2 * g_old_dot_dx <= g_new_dot_dx:
            return wp.lambda1 * h
        return wp.lambda2 * h
    return wp.rho * h


def _wolfe_next(h, V_new, V_old, g_old_dx, g_new_dx, wp):
    """Apply wolfe_update plus the safeguard reset; returns (h, omega, reset)."""
    h_next = wolfe_update(h, V_new, V_old, g_old_dx, g_new_dx, wp)
    omega_next = h_to_omega(h_next)
    if not wp.eps_omega < omega_next < wp.max_omega:
        return 2.0, 1.0, True
    return h_next, omega_next, False


# ---------------------------------------------------------------------------
# sweep engines: one per problem representation, common interface


class _CsrEngine:
    """Sweep state for an explicit sparse symmetric system.

    Maintains w = A @ x across sweeps through incremental column updates, so
    objective values and gradient-direction products cost O(n) dot products
    per iteration instead of extra matrix-vector multiplications.
    """

    REFRESH_EVERY = 1000  # periodic w recomputation bounds drift

    def __init__(self, problem, x0=None):
        p = problem
        if x0 is None:
            x = np.clip(np.zeros(p.n), p.lower, p.upper)
        else:
            x = as_vector(x0, p.n, "x0").copy()
            if np.any(x < p.lower) or np.any(x > p.upper):
                raise ValueError("initial guess violates the box constraints")
        self.p = p
        self.x = x
        self.w = matvec(p.A, x)
        self.min_diag = float(p.A.diag.min())
        self._sweeps = 0

    def objective(self):
        return 0.5 * float(self.x @ self.w) - float(self.x @ self.p.b)

    def sweep(self, omega, need_wolfe):
        p = self.p
        if need_wolfe:
            x_old = self.x.copy()
            w_old = self.w.copy()
        dsq = kernels.psor_sweep(
            p.A.row_starts, p.A.col_indices, p.A.values, p.A.diag,
            p.b, p.lower, p.upper, float(omega), self.x, self.w,
        )
        self._sweeps += 1
        if self._sweeps % self.REFRESH_EVERY == 0:
            self.w = matvec(p.A, self.x)
        V = self.objective()
        if need_wolfe:
            dx = self.x - x_old
            g_old_dx = float((w_old - p.b) @ dx)
            g_new_dx = float((self.w - p.b) @ dx)
            return math.sqrt(dsq), V, g_old_dx, g_new_dx
        return math.sqrt(dsq), V, math.nan, math.nan

    def kkt_norm(self, h=2.0):
        p = self.p
        alpha = h / (1.0 + 0.5 * h)
        step = np.clip(
            self.x - alpha * (self.w - p.b) / p.A.diag, p.lower, p.upper
        )
        return float(np.linalg.norm(step - self.x))


class _CscEngine:
    """Sweep state for normal-equation SOR driven by column actions.

    Maintains the residual r = d - C @ x; the normal matrix is never formed.
    Objective values are reported in the quadratic form, i.e.
    (1/2)||r||^2 - (1/2)||d||^2, so the dissipation bookkeeping matches the
    explicit-matrix solvers.
    """

    REFRESH_EVERY = 1000

    def __init__(self, problem, x0=None):
        q = problem
        if x0 is None:
            x = np.clip(np.zeros(q.n), q.lower, q.upper)
        else:
            x = as_vector(x0, q.n, "x0").copy()
            if np.any(x < q.lower) or np.any(x > q.upper):
                raise ValueError("initial guess violates the box constraints")
        self.q = q
        self.x = x
        self.r = q.d - q.C.apply(x)
        self._half_dd = 0.5 * float(q.d @ q.d)
        self.min_diag = float(q.C.col_sq_norms.min())
        self._sweeps = 0

    def objective(self):
        return 0.5 * float(self.r @ self.r) - self._half_dd

    def sweep(self, omega, need_wolfe):
        q = self.q
        if need_wolfe:
            r_old = self.r.copy()
        dsq = kernels.csc_normal_sweep(
            q.C.col_starts, q.C.row_indices, q.C.values, q.C.col_sq_norms,
            q.lower, q.upper, float(omega), self.x, self.r,
        )
        self._sweeps += 1
        if self._sweeps % self.REFRESH_EVERY == 0:
            self.r = q.d - q.C.apply(self.x)
        V = self.objective()
        if need_wolfe:
            cdx = r_old - self.r  # equals C @ (x_new - x_old)
            g_new_dx = -float(self.r @ cdx)
            g_old_dx = -float(r_old @ cdx)
            return math.sqrt(dsq), V, g_old_dx, g_new_dx
        return math.sqrt(dsq), V, math.nan, math.nan

    def kkt_norm(self, h=2.0):
        q = self.q
        alpha = h / (1.0 + 0.5 * h)
        g = -q.C.rmatvec(self.r)
        step = np.clip(
            self.x - alpha * g / q.C.col_sq_norms, q.lower, q.upper
        )
        return float(np.linalg.norm(step - self.x))


# ---------------------------------------------------------------------------
# solve loops, engine-agnostic


def _new_trace(cfg, engine):
    if not (cfg.record_trace or cfg.record_iterates):
        return None
    trace = IterationTrace()
    trace.start_segment(engine.objective())
    if cfg.record_iterates:
        trace.record_iterate(engine.x)
    return trace


def _record(trace, cfg, engine, k, dn, V, omega, h):
    if trace is None:
        return
    kkt = math.nan
    if cfg.kkt_every > 0 and k % cfg.kkt_every == 0:
        kkt = engine.kkt_norm()
    trace.append(dn, V, omega, h, kkt)
    if cfg.record_iterates:
        trace.record_iterate(engine.x)


def _check_finite(dn, k):
    if not math.isfinite(dn):
        raise NumericalError(f"non-finite value in iterate at iteration {k}")


def _verify_dissipation(cfg, engine, V, V_prev, dn, h, k):
    if cfg.verify_dissipation and math.isfinite(h) and h > 0:
        if not check_dissipation(V, V_prev, dn, h, engine.min_diag):
            raise NumericalError(
                f"dissipation bound violated at iteration {k}: "
                f"V went from {V_prev!r} to {V!r} with step norm {dn!r}"
            )


def _solve_fixed(engine, omega, cfg, trace, start_iter=0, V_prev=None,
                 first_event=None):
    """Plain projected SOR at a fixed relaxation parameter."""
    h = omega_to_h(omega) if 0.0 < omega < 2.0 else math.nan
    V_prev = engine.objective() if V_prev is None else V_prev
    status = Status.MAX_ITERATIONS
    k = start_iter
    while k < cfg.max_iterations:
        dn, V, _, _ = engine.sweep(omega, False)
        k += 1
        _check_finite(dn, k)
        _record(trace, cfg, engine, k, dn, V, omega, h)
        if trace is not None and first_event is not None and k == start_iter + 1:
            trace.add_event(first_event)
        _verify_dissipation(cfg, engine, V, V_prev, dn, h, k)
        V_prev = V
        if dn <= cfg.tolerance:
            status = Status.CONVERGED
            break
    return status, k, trace


def _solve_wolfe(engine, cfg):
    """Adaptive projected SOR: Wolfe-style tests pick the next step size."""
    trace = _new_trace(cfg, engine)
    wp = cfg.wolfe
    h, omega = 2.0, 1.0
    V_prev = engine.objective()
    status = Status.MAX_ITERATIONS
    k = 0
    while k < cfg.max_iterations:
        dn, V, g_old_dx, g_new_dx = engine.sweep(omega, True)
        k += 1
        _check_finite(dn, k)
        _record(trace, cfg, engine, k, dn, V, omega, h)
        _verify_dissipation(cfg, engine, V, V_prev, dn, h, k)
        h, omega, reset = _wolfe_next(h, V, V_prev, g_old_dx, g_new_dx, wp)
        if reset and trace is not None:
            trace.add_event("reset")
        V_prev = V
        if dn <= cfg.tolerance:
            status = Status.CONVERGED
            break
    return status, k, trace


def _solve_freeze(engine, cfg):
    """Adaptive solver that fixes the relaxation parameter once the windowed
    mean convergence slope stops improving.

    Runs adaptively until the latest log10 decrement drops below the
    threshold, fills an (m+1)-iteration statistics window, keeps adapting
    while the windowed mean slope improves, and then freezes the parameter
    at the mean of the last m+1 recorded values for the remaining sweeps.
    """
    trace = _new_trace(cfg, engine)
    wp = cfg.wolfe
    m = cfg.freeze_m
    state = {"h": 2.0, "omega": 1.0, "V_prev": engine.objective(), "k": 0}
    dn_hist = []
    om_hist = []

    def adaptive_step():
        dn, V, g_old_dx, g_new_dx = engine.sweep(state["omega"], True)
        state["k"] += 1
        _check_finite(dn, state["k"])
        _record(trace, cfg, engine, state["k"], dn, V, state["omega"], state["h"])
        _verify_dissipation(cfg, engine, V, state["V_prev"], dn, state["h"], state["k"])
        dn_hist.append(dn)
        om_hist.append(state["omega"])
        h2, omega2, reset = _wolfe_next(
            state["h"], V, state["V_prev"], g_old_dx, g_new_dx, wp
        )
        if reset and trace is not None:
            trace.add_event("reset")
        state["h"], state["omega"], state["V_prev"] = h2, omega2, V
        return dn

    def exhausted():
        return state["k"] >= cfg.max_iterations

    def unfrozen_result(status):
        return status, state["k"], trace, None

    # adapt until the latest decrement crosses the threshold
    last_d = 0.0
    while last_d > cfg.freeze_threshold:
        if exhausted():
            return unfrozen_result(Status.MAX_ITERATIONS)
        dn = adaptive_step()
        if dn <= cfg.tolerance:
            return unfrozen_result(Status.CONVERGED)
        last_d = math.log10(dn) if dn > 0.0 else -math.inf

    # fill the statistics window
    first_window_step = True
    for _ in range(m + 1):
        if exhausted():
            return unfrozen_result(Status.MAX_ITERATIONS)
        dn = adaptive_step()
        if first_window_step:
            if trace is not None:
                trace.add_event("stats-window")
            first_window_step = False
        if dn <= cfg.tolerance:
            return unfrozen_result(Status.CONVERGED)
    # two windowed slopes must be comparable before the check can run
    while len(dn_hist) < m + 2:
        if exhausted():
            return unfrozen_result(Status.MAX_ITERATIONS)
        dn = adaptive_step()
        if dn <= cfg.tolerance:
            return unfrozen_result(Status.CONVERGED)

    # keep adapting while the windowed mean slope improves
    def mean_slope(t):
        return (math.log10(dn_hist[t]) - math.log10(dn_hist[t - m])) / m

    while True:
        t = len(dn_hist) - 1
        if mean_slope(t) > mean_slope(t - 1):
            break
        if exhausted():
            return unfrozen_result(Status.MAX_ITERATIONS)
        dn = adaptive_step()
        if dn <= cfg.tolerance:
            return unfrozen_result(Status.CONVERGED)

    # freeze at the windowed mean and finish with plain sweeps
    frozen = float(np.mean(om_hist[-(m + 1):]))
    status, k, trace = _solve_fixed(
        engine, frozen, cfg, trace, start_iter=state["k"],
        V_prev=state["V_prev"], first_event="freeze",
    )
    return status, k, trace, frozen


# ---------------------------------------------------------------------------
# public solver fronts


def psor_sweep(p, x, omega):
    """One projected SOR pass over problem ``p`` from iterate ``x``.

    Returns the new iterate and ||x_new - x||_2.  The iterate stays inside
    the box componentwise; clamping is the last write of each component.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    x = as_vector(x, p.n, "x")
    if np.any(x < p.lower) or np.any(x > p.upper):
        raise ValueError("x violates the box constraints")
    x_new = x.copy()
    w = matvec(p.A, x)
    dsq = kernels.psor_sweep(
        p.A.row_starts, p.A.col_indices, p.A.values, p.A.diag,
        p.b, p.lower, p.upper, float(omega), x_new, w,
    )
    return x_new, math.sqrt(dsq)


def sor_sweep(A, b, x, omega):
    """One unprojected SOR pass for the linear system A x = b."""
    b = as_vector(b, A.n, "b")
    x = as_vector(x, A.n, "x")
    x_new = x.copy()
    w = matvec(A, x)
    unbounded = np.full(A.n, np.inf)
    kernels.psor_sweep(
        A.row_starts, A.col_indices, A.values, A.diag,
        b, -unbounded, unbounded, float(omega), x_new, w,
    )
    return x_new


def itoh_abe_step(A, b, x, h):
    """One sweep of the Itoh-Abe discrete gradient scheme, step size h.

    Uses the preconditioner diag(A)^-1 and no projection; with
    h = 2*omega / (2 - omega) it reproduces the unprojected SOR sweep, and
    it dissipates the quadratic objective for every h > 0.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    b = as_vector(b, A.n, "b")
    x = as_vector(x, A.n, "x")
    xn = x.copy()
    half = 0.5 * h
    for i in range(A.n):
        cols, vals = A.row(i)
        aii = A.diag[i]
        rowdot = float(vals @ xn[cols])  # new values left of i, old right
        numer = h * (rowdot - aii * xn[i]) - (1.0 - half) * aii * xn[i] - h * b[i]
        xn[i] = -numer / (aii * (1.0 + half))
    return xn


def psor_solve(p, omega, cfg=None, x0=None):
    """Projected SOR at fixed relaxation parameter until tolerance.

    Convergence to the solution set holds exactly for omega in (0, 2);
    values outside are accepted (the run simply will not converge) so that
    boundary behaviour can be exercised.
    """
    cfg = cfg or SolverConfig()
    if not omega > 0:
        raise ValueError("omega must be positive")
    engine = _CsrEngine(p, x0)
    trace = _new_trace(cfg, engine)
    status, k, trace = _solve_fixed(engine, float(omega), cfg, trace)
    return SolveResult(x=engine.x, status=status, iterations=k, trace=trace)


def apsor_wolfe_solve(p, cfg=None, x0=None):
    """Adaptive projected SOR; starts at h = 2 (omega = 1).

    Each iteration performs one projected sweep, evaluates the
    sufficient-decrease and curvature tests with quantities accumulated
    during the sweep, scales the step size accordingly for the next
    iteration, and resets to h = 2 whenever the derived relaxation
    parameter leaves the safeguard interval.
    """
    cfg = cfg or SolverConfig()
    engine = _CsrEngine(p, x0)
    status, k, trace = _solve_wolfe(engine, cfg)
    return SolveResult(x=engine.x, status=status, iterations=k, trace=trace)


def apsor_freeze_solve(p, cfg=None, x0=None):
    """Adaptive projected SOR that freezes the relaxation parameter.

    Identical to :func:`apsor_wolfe_solve` until the windowed mean of the
    log10-decrement slope stops improving; from then on the parameter is
    fixed at the mean of the last m+1 recorded values.  ``frozen_omega`` is
    set on the result only if the freeze happened before convergence.
    """
    cfg = cfg or SolverConfig()
    engine = _CsrEngine(p, x0)
    status, k, trace, frozen = _solve_freeze(engine, cfg)
    return SolveResult(
        x=engine.x, status=status, iterations=k, trace=trace,
        frozen_omega=frozen,
    )


def apsor_shift_solve(p, cfg=None, x0=None):
    """Two-stage adaptive solve seeded through a diagonal shift.

    Stage 1 solves the problem with A replaced by A + sigma*I to produce an
    initial guess; stage 2 solves the original problem from that guess.
    ``iterations`` counts both stages; ``shift_iterations`` counts stage 1.
    """
    cfg = cfg or SolverConfig()
    if cfg.shift_sigma == "auto":
        sigma = float(p.A.diag.min())
    else:
        sigma = float(cfg.shift_sigma)
    stage1 = apsor_wolfe_solve(shift(p, sigma), cfg, x0)
    stage2 = apsor_wolfe_solve(p, cfg, x0=stage1.x)
    trace = stage1.trace
    if trace is not None and stage2.trace is not None:
        trace.extend(stage2.trace, boundary_event="shift-stage-2")
    return SolveResult(
        x=stage2.x,
        status=stage2.status,
        iterations=stage1.iterations + stage2.iterations,
        trace=trace,
        shift_iterations=stage1.iterations,
        shift_sigma=sigma,
    )


def _naive_sweep(A, b, x, omega):
    """Unprojected SOR pass that reuses unprojected intermediate values."""
    xt = x.copy()
    for i in range(A.n):
        cols, vals = A.row(i)
        aii = A.diag[i]
        s = float(vals @ xt[cols]) - aii * xt[i]
        xt[i] = (1.0 - omega) * xt[i] + omega * (b[i] - s) / aii
    return xt


def naive_psor_solve(p, omega, cfg=None, x0=None):
    """Whole-vector projection variant, kept for counterexample study.

    Each iteration runs a full unprojected SOR sweep and projects the whole
    vector afterwards.  The map loses the fixed-point and dissipation
    properties of the componentwise projection: its limit, when one exists,
    depends on omega and need not solve the program, and the iteration can
    fall into a two-cycle.  A detected two-cycle stops the run with status
    MAX_ITERATIONS and a "cycle" trace event.  Only nonnegativity boxes
    (lower = 0, upper = +inf) are supported.
    """
    cfg = cfg or SolverConfig()
    if not omega > 0:
        raise ValueError("omega must be positive")
    if np.any(p.lower != 0.0) or np.any(np.isfinite(p.upper)):
        raise ValueError("naive projection variant requires lower = 0, upper = +inf")
    if x0 is None:
        x = np.zeros(p.n)
    else:
        x = as_vector(x0, p.n, "x0").copy()
        if np.any(x < 0.0):
            raise ValueError("initial guess violates the box constraints")
    cfg_trace = cfg.record_trace or cfg.record_iterates
    trace = IterationTrace() if cfg_trace else None
    h = omega_to_h(omega) if 0.0 < omega < 2.0 else math.nan
    if trace is not None:
        w = matvec(p.A, x)
        trace.start_segment(0.5 * float(x @ w) - float(x @ p.b))
        if cfg.record_iterates:
            trace.record_iterate(x)
    status = Status.MAX_ITERATIONS
    x_prev = None
    k = 0
    while k < cfg.max_iterations:
        x_new = np.maximum(_naive_sweep(p.A, p.b, x, omega), 0.0)
        k += 1
        dn = float(np.linalg.norm(x_new - x))
        _check_finite(dn, k)
        if trace is not None:
            w = matvec(p.A, x_new)
            V = 0.5 * float(x_new @ w) - float(x_new @ p.b)
            trace.append(dn, V, omega, h)
            if cfg.record_iterates:
                trace.record_iterate(x_new)
        if dn <= cfg.tolerance:
            x = x_new
            status = Status.CONVERGED
            break
        if (
            x_prev is not None
            and dn > cfg.tolerance
            and np.max(np.abs(x_new - x_prev)) <= 1e-14
        ):
            if trace is not None:
                trace.add_event("cycle")
            x = x_new
            break
        x_prev = x
        x = x_new
    return SolveResult(x=x, status=status, iterations=k, trace=trace)


def normal_psor_solve(q, mode, cfg=None, x0=None):
    """Normal-equation SOR for least squares, matrix-free.

    ``mode`` is either a fixed relaxation parameter or the string "wolfe"
    for adaptive step-size control.  The iterates coincide (to rounding)
    with projected SOR applied to the explicitly formed normal equations;
    only the arithmetic route differs, acting on columns of C and the
    residual d - C @ x instead of on C'C.
    """
    cfg = cfg or SolverConfig()
    if not isinstance(q, NnlsProblem):
        raise TypeError("q must be an NnlsProblem")
    engine = _CscEngine(q, x0)
    if isinstance(mode, str):
        if mode != "wolfe":
            raise ValueError("mode must be a relaxation parameter or 'wolfe'")
        status, k, trace = _solve_wolfe(engine, cfg)
    else:
        if not mode > 0:
            raise ValueError("omega must be positive")
        trace = _new_trace(cfg, engine)
        status, k, trace = _solve_fixed(engine, float(mode), cfg, trace)
    return SolveResult(x=engine.x, status=status, iterations=k, trace=trace)
