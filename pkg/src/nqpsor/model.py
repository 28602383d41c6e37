"""Problem definitions: box-constrained quadratic programs and least squares.

The quadratic program minimizes V(x) = (1/2) x'Ax - x'b over a box
[lower, upper]; the defaults lower = 0, upper = +inf give the nonnegative
program.  The least-squares form minimizes ||Cx - d||^2 over the same kind
of box and converts to the quadratic form through the normal equations.
"""

import numpy as np

from .linalg import (
    ColumnOperator,
    SparseSymMatrix,
    as_vector,
    build_explicit_normal,
    matvec,
)


def _check_box(n, lower, upper):
    if lower is None:
        lower = np.zeros(n)
    if upper is None:
        upper = np.full(n, np.inf)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if lower.shape != (n,) or upper.shape != (n,):
        raise ValueError("box bounds must have length n")
    if not np.all(np.isfinite(lower)):
        raise ValueError("lower bounds must be finite")
    if np.any(np.isnan(upper)):
        raise ValueError("upper bounds must not be NaN")
    if np.any(lower > upper):
        raise ValueError("lower bound exceeds upper bound")
    lower.setflags(write=False)
    upper.setflags(write=False)
    return lower, upper


class NqpProblem:
    """Quadratic objective data (A, b) with a feasible box.

    Bounds are per component so masked entries can be pinned later without
    an API change; ``upper`` entries may be +inf.
    """

    def __init__(self, A, b, lower=None, upper=None):
        if not isinstance(A, SparseSymMatrix):
            raise TypeError("A must be a SparseSymMatrix")
        self.A = A
        self.b = as_vector(b, A.n, "b")
        self.b.setflags(write=False)
        self.lower, self.upper = _check_box(A.n, lower, upper)

    @property
    def n(self):
        return self.A.n

    def project(self, x):
        """Componentwise projection of ``x`` onto the box."""
        return np.clip(np.asarray(x, dtype=np.float64), self.lower, self.upper)


class NnlsProblem:
    """Least-squares operator C, data d, and a feasible box for x."""

    def __init__(self, C, d, lower=None, upper=None):
        if not isinstance(C, ColumnOperator):
            raise TypeError("C must be a ColumnOperator")
        self.C = C
        self.d = as_vector(d, C.rows, "d")
        self.d.setflags(write=False)
        self.lower, self.upper = _check_box(C.cols, lower, upper)

    @property
    def n(self):
        return self.C.cols

    def project(self, x):
        return np.clip(np.asarray(x, dtype=np.float64), self.lower, self.upper)

    def residual(self, x):
        """d - C @ x."""
        return self.d - self.C.apply(x)


def objective(p, x):
    """V(x) = (1/2) x'Ax - x'b."""
    x = as_vector(x, p.n, "x")
    return 0.5 * float(x @ matvec(p.A, x)) - float(x @ p.b)


def gradient(p, x):
    """grad V(x) = Ax - b."""
    x = as_vector(x, p.n, "x")
    return matvec(p.A, x) - p.b


def shift(p, sigma):
    """Problem with A replaced by A + sigma*I; b and box unchanged."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return NqpProblem(p.A.shifted(float(sigma)), p.b, p.lower, p.upper)


def nnls_to_nqp(q):
    """Convert a least-squares problem to its normal-equation quadratic form.

    Returns the problem with A = C'C and b = C'd; the box carries over.  The
    quadratic objective equals (1/2)||Cx - d||^2 - (1/2)||d||^2, i.e. the two
    formulations differ only by a constant and a factor of two.
    """
    A = build_explicit_normal(q.C)
    b = q.C.rmatvec(q.d)
    return NqpProblem(A, b, q.lower, q.upper)
