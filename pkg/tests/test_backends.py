"""The compiled extension and the pure-Python fallback must agree.

Summation order inside a row/column is identical in both kernels, so
results agree to a few ulp; the tolerance below covers dot-product
reassociation in the numpy-based fallback.
"""

import numpy as np
import pytest

import nqpsor as nq
from nqpsor import _kernels_py

compiled = pytest.importorskip(
    "nqpsor._kernels", reason="compiled kernels not built"
)


def _problem(n=60, seed=70):
    A = nq.gen_matrix(nq.GenSpec(n, 0.15, nq.spd_spectrum(n, 1e3), seed=seed))
    rng = np.random.default_rng(seed + 1)
    b = rng.standard_normal(n)
    lower = np.zeros(n)
    upper = np.full(n, np.inf)
    upper[::3] = 0.8  # exercise the two-sided clamp
    return A, b, lower, upper, rng


def test_psor_sweep_backends_agree():
    A, b, lower, upper, rng = _problem()
    x0 = np.clip(rng.standard_normal(A.n), lower, upper)
    for omega in (0.4, 1.0, 1.7):
        xc = x0.copy()
        wc = nq.matvec(A, xc)
        xp = x0.copy()
        wp = nq.matvec(A, xp)
        for _ in range(30):
            dc = compiled.psor_sweep(A.row_starts, A.col_indices, A.values,
                                     A.diag, b, lower, upper, omega, xc, wc)
            dp = _kernels_py.psor_sweep(A.row_starts, A.col_indices, A.values,
                                        A.diag, b, lower, upper, omega, xp, wp)
            assert abs(dc - dp) <= 1e-13 * (1.0 + abs(dc))
        assert np.max(np.abs(xc - xp)) <= 1e-12 * (1.0 + np.max(np.abs(xc)))


def test_csc_normal_sweep_backends_agree():
    rng = np.random.default_rng(73)
    dense = rng.standard_normal((40, 25))
    C = nq.ColumnOperator.from_dense(dense)
    d = rng.standard_normal(40)
    lower = np.zeros(25)
    upper = np.full(25, np.inf)
    xc = np.zeros(25)
    rc = d.copy()
    xp = np.zeros(25)
    rp = d.copy()
    for _ in range(30):
        compiled.csc_normal_sweep(C.col_starts, C.row_indices, C.values,
                                  C.col_sq_norms, lower, upper, 1.2, xc, rc)
        _kernels_py.csc_normal_sweep(C.col_starts, C.row_indices, C.values,
                                     C.col_sq_norms, lower, upper, 1.2, xp, rp)
    assert np.max(np.abs(xc - xp)) <= 1e-12
    assert np.max(np.abs(rc - rp)) <= 1e-12


def test_stamp_sweep_backends_agree():
    from nqpsor import imaging

    op = imaging.BlurOperator.gaussian(16, 16, 2.0)
    truth = imaging.synthetic_image(16)
    noisy = imaging.add_noise(np.clip(op.apply(truth), 0, 1), 0.1, seed=4)
    lower = np.zeros((16, 16))
    upper = np.ones((16, 16))
    xc = noisy.copy()
    rc = noisy - op.apply(xc)
    xp = noisy.copy()
    rp = rc.copy()
    args = (op._v_start, op._v_len, op._v_wts, op._h_start, op._h_len,
            op._h_wts, op._v_sq, op._h_sq, lower, upper, 0.9)
    for _ in range(20):
        compiled.stamp_normal_sweep(*args, xc, rc)
        _kernels_py.stamp_normal_sweep(*args, xp, rp)
    assert np.max(np.abs(xc - xp)) <= 1e-11
    assert np.max(np.abs(rc - rp)) <= 1e-11


def test_backend_reports_name():
    assert nq.BACKEND in ("compiled", "python")
