"""Optimality measurement, dissipation verification, and iteration traces.

The optimality residual uses the projected-step characterization: x solves
the box-constrained program iff clamp(x - alpha * D^-1 (Ax - b)) == x for
some (equivalently all) alpha > 0, where D is the diagonal of A.  The
default alpha = 1 corresponds to step size h = 2 through
alpha = h / (1 + h/2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_vector, matvec
from .model import objective


class IterationTrace:
    """Per-iteration records shared by all solvers.

    One row per sweep: the iterate change norm, objective value, relaxation
    parameter and step size used, an optionally sampled optimality residual,
    the log10 decrement ``d`` and its slope ``s``, and event markers such as
    safeguard resets or a frozen parameter.  Rows are appended during a
    solve; the array properties return snapshots safe to keep.
    """

    def __init__(self):
        self._delta_norm = []
        self._objective = []
        self._omega = []
        self._h = []
        self._kkt = []
        self._d = []
        self._s = []
        self._events = []
        self.initial_objective = math.nan
        # (row index, objective at segment start); a second segment appears
        # when a solve restarts on a different objective (shifted stage)
        self.segment_starts = []
        self.iterates = None

    def __len__(self):
        return len(self._delta_norm)

    def start_segment(self, initial_objective):
        if not self.segment_starts:
            self.initial_objective = initial_objective
        self.segment_starts.append((len(self._delta_norm), initial_objective))

    def append(self, delta_norm, objective, omega, h, kkt=math.nan):
        if delta_norm > 0.0:
            d = math.log10(delta_norm)
        else:
            d = -math.inf
        if self._d:
            prev = self._d[-1]
            s = d - prev if math.isfinite(prev) and math.isfinite(d) else math.nan
        else:
            s = math.nan
        self._delta_norm.append(delta_norm)
        self._objective.append(objective)
        self._omega.append(omega)
        self._h.append(h)
        self._kkt.append(kkt)
        self._d.append(d)
        self._s.append(s)
        self._events.append("")

    def add_event(self, label):
        """Attach an event marker to the most recent row."""
        if not self._events:
            raise ValueError("no rows recorded yet")
        if self._events[-1]:
            self._events[-1] += ";" + label
        else:
            self._events[-1] = label

    def record_iterate(self, x):
        if self.iterates is None:
            self.iterates = []
        self.iterates.append(np.array(x, copy=True))

    @property
    def delta_norm(self):
        return np.asarray(self._delta_norm)

    @property
    def objective(self):
        return np.asarray(self._objective)

    @property
    def omega(self):
        return np.asarray(self._omega)

    @property
    def h(self):
        return np.asarray(self._h)

    @property
    def kkt_residual(self):
        return np.asarray(self._kkt)

    @property
    def d(self):
        return np.asarray(self._d)

    @property
    def s(self):
        return np.asarray(self._s)

    @property
    def events(self):
        return list(self._events)

    def extend(self, other, boundary_event=None):
        """Append another trace's rows, recording a new segment start."""
        self.start_segment(other.initial_objective)
        first = len(self._delta_norm)
        self._delta_norm.extend(other._delta_norm)
        self._objective.extend(other._objective)
        self._omega.extend(other._omega)
        self._h.extend(other._h)
        self._kkt.extend(other._kkt)
        self._d.extend(other._d)
        self._s.extend(other._s)
        self._events.extend(other._events)
        if boundary_event is not None and len(self._events) > first:
            if self._events[first]:
                self._events[first] = boundary_event + ";" + self._events[first]
            else:
                self._events[first] = boundary_event
        if other.iterates is not None:
            if self.iterates is None:
                self.iterates = []
            self.iterates.extend(other.iterates)


@dataclass
class KktReport:
    """Projected-step optimality residual and the raw first-order triple."""

    residual_norm: float
    slack: np.ndarray
    complementarity: float
    min_slack: float
    min_x: float


def kkt_residual(p, x, h=2.0):
    """Optimality report for iterate ``x`` of problem ``p``.

    The residual is ``|| clamp(x - alpha * (Ax - b) / diag, lower, upper) - x ||``
    with ``alpha = h / (1 + h/2)``; it is zero exactly at solutions, for any
    h > 0.  The slack ``Ax - b`` and the complementarity product are reported
    alongside for nonnegativity-constrained problems.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = as_vector(x, p.n, "x")
    slack = matvec(p.A, x) - p.b
    alpha = h / (1.0 + 0.5 * h)
    step = np.clip(x - alpha * slack / p.A.diag, p.lower, p.upper)
    residual = float(np.linalg.norm(step - x))
    return KktReport(
        residual_norm=residual,
        slack=slack,
        complementarity=float(x @ slack),
        min_slack=float(slack.min()),
        min_x=float(x.min()),
    )


def check_dissipation(V_new, V_old, delta_norm, h, min_diag):
    """True iff one iteration dissipated the objective by at least the bound.

    The bound is V_new - V_old <= -(min_diag / h) * delta_norm^2 up to a
    rounding slack of 1e-10 * (1 + |V_old|).
    """
    if not (h > 0 and min_diag > 0):
        raise ValueError("h and min_diag must be positive")
    gamma = min_diag / h
    tau = 1e-10 * (1.0 + abs(V_old))
    return V_new - V_old <= -gamma * delta_norm * delta_norm + tau


def trace_dissipation_violations(trace, min_diag):
    """Row indices where the recorded run violates the dissipation bound.

    Rows with a non-finite recorded step size (fixed relaxation outside
    (0, 2)) are skipped; segment boundaries restart the objective chain.
    """
    violations = []
    starts = dict(trace.segment_starts) if trace.segment_starts else {0: trace.initial_objective}
    V_prev = math.nan
    dn = trace.delta_norm
    obj = trace.objective
    hs = trace.h
    for k in range(len(trace)):
        if k in starts:
            V_prev = starts[k]
        if math.isfinite(hs[k]) and hs[k] > 0:
            if not check_dissipation(obj[k], V_prev, dn[k], hs[k], min_diag):
                violations.append(k)
        V_prev = obj[k]
    return violations


def componentwise_dissipation_report(p, x, omega):
    """Per-component dissipation audit of one projected sweep.

    Replays a single Gauss-Seidel-order pass in plain arithmetic and
    evaluates the objective after every component update.  Each update,
    clamped or not, must decrease the objective by at least
    (a_ii / h) * delta_i^2 up to rounding slack, where h is the step size
    equivalent to ``omega``.  Returns the swept iterate and the list of
    component indices that violated the bound (empty in exact arithmetic
    for any omega in (0, 2)).  Costs O(n * nnz); intended as a diagnostic,
    not as part of a solve.
    """
    if not 0.0 < omega < 2.0:
        raise ValueError("omega must lie in (0, 2)")
    h = 2.0 * omega / (2.0 - omega)
    x = as_vector(x, p.n, "x")
    z = x.copy()
    violations = []
    V_before = objective(p, z)
    for i in range(p.n):
        cols, vals = p.A.row(i)
        aii = p.A.diag[i]
        s = float(vals @ z[cols]) - aii * z[i]
        xhat = (1.0 - omega) * z[i] + omega * (p.b[i] - s) / aii
        xnew = min(max(xhat, p.lower[i]), p.upper[i])
        delta = xnew - z[i]
        z[i] = xnew
        V_after = objective(p, z)
        bound = -(aii / h) * delta * delta + 1e-10 * (1.0 + abs(V_before))
        if V_after - V_before > bound:
            violations.append(i)
        V_before = V_after
    return z, violations


def decrement_stats(trace, k, m):
    """Windowed decrement statistics at row ``k``.

    Returns the telescoped mean slope (d[k] - d[k-m]) / m and the mean of
    the m+1 relaxation parameters recorded at rows k-m-1 through k-1.
    """
    if m < 1:
        raise ValueError("window m must be >= 1")
    if k < m + 1 or k >= len(trace):
        raise ValueError(f"insufficient history: need rows {k - m - 1}..{k}")
    d = trace.d
    s_bar = (d[k] - d[k - m]) / m
    omega_bar = float(np.mean(trace.omega[k - m - 1:k]))
    return float(s_bar), omega_bar
