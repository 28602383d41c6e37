import numpy as np
import pytest

import nqpsor as nq


@pytest.fixture
def cycle3_problem():
    """3x3 instance with solution [0.8, 0, 0.8] on which whole-vector
    projection stagnates in a two-cycle at large relaxation parameters."""
    A = nq.SparseSymMatrix.from_dense(
        [[2.0, -1.0, 0.5], [-1.0, 2.0, -1.0], [0.5, -1.0, 2.0]]
    )
    return nq.NqpProblem(A, np.array([2.0, -2.0, 2.0]))


@pytest.fixture
def two_by_two_matrix():
    return nq.SparseSymMatrix.from_dense([[2.0, -1.0], [-1.0, 2.0]])


def projected_gradient_oracle(A_dense, b, lower, upper, iters=40000):
    """Dense projected-gradient reference minimizer (independent route)."""
    L = float(np.linalg.eigvalsh(A_dense)[-1])
    x = np.clip(np.zeros(len(b)), lower, upper)
    for _ in range(iters):
        x = np.clip(x - (A_dense @ x - b) / L, lower, upper)
    return x
