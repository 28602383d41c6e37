"""Pure-Python sweep kernels, the fallback when the extension is not built.

Signatures and update order match ``_kernels.pyx`` exactly; only speed
differs.  All kernels update ``x`` (and the companion state ``w`` or ``r``)
in place and return the squared 2-norm of the iterate change.
"""

import numpy as np


def psor_sweep(row_starts, col_indices, values, diag, b, lower, upper, omega, x, w):
    """One projected Gauss-Seidel-order pass over all rows.

    ``w`` must hold A @ x on entry and holds A @ x for the updated ``x`` on
    exit; the incremental column updates via symmetry are what keep the
    adaptive step-size bookkeeping free of extra matrix-vector products.
    """
    n = x.shape[0]
    dsq = 0.0
    for i in range(n):
        xi = x[i]
        xhat = xi + omega * (b[i] - w[i]) / diag[i]
        lo = lower[i]
        hi = upper[i]
        if xhat < lo:
            xhat = lo
        elif xhat > hi:
            xhat = hi
        delta = xhat - xi
        if delta != 0.0:
            x[i] = xhat
            start, end = row_starts[i], row_starts[i + 1]
            w[col_indices[start:end]] += delta * values[start:end]
            dsq += delta * delta
    return dsq


def csc_normal_sweep(col_starts, row_indices, values, col_sq_norms,
                     lower, upper, omega, x, r):
    """One projected pass of normal-equation SOR through column actions.

    ``r`` must hold d - C @ x on entry and is kept consistent on exit; the
    normal matrix C'C is never formed.
    """
    n = x.shape[0]
    dsq = 0.0
    for i in range(n):
        start, end = col_starts[i], col_starts[i + 1]
        rows = row_indices[start:end]
        vals = values[start:end]
        s = float(vals @ r[rows])
        xi = x[i]
        xhat = xi + omega * s / col_sq_norms[i]
        lo = lower[i]
        hi = upper[i]
        if xhat < lo:
            xhat = lo
        elif xhat > hi:
            xhat = hi
        delta = xhat - xi
        if delta != 0.0:
            x[i] = xhat
            r[rows] -= delta * vals
            dsq += delta * delta
    return dsq


def stamp_normal_sweep(v_start, v_len, v_wts, h_start, h_len, h_wts,
                       v_sq, h_sq, lower, upper, omega, x, r):
    """Normal-equation SOR sweep for a separable convolution operator.

    Pixels are visited in row-major order.  The operator column for pixel
    (y, x) is the outer product of the vertical stamp for y and the
    horizontal stamp for x, so each update touches an O(stamp area) block
    of the residual image ``r``.
    """
    height, width = x.shape
    dsq = 0.0
    for y in range(height):
        vs = v_start[y]
        vw = v_wts[y, :v_len[y]]
        for xx in range(width):
            hs = h_start[xx]
            hw = h_wts[xx, :h_len[xx]]
            block = r[vs:vs + vw.shape[0], hs:hs + hw.shape[0]]
            s = float(vw @ block @ hw)
            xi = x[y, xx]
            xhat = xi + omega * s / (v_sq[y] * h_sq[xx])
            lo = lower[y, xx]
            hi = upper[y, xx]
            if xhat < lo:
                xhat = lo
            elif xhat > hi:
                xhat = hi
            delta = xhat - xi
            if delta != 0.0:
                x[y, xx] = xhat
                block -= delta * np.outer(vw, hw)
                dsq += delta * delta
    return dsq
