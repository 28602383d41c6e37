# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sweep kernels; see _kernels_py.py for the reference semantics.

Update order matches the pure-Python twin.  All kernels release the GIL so
independent solves can run on real threads.
"""


cpdef double psor_sweep(const long long[::1] row_starts,
                        const long long[::1] col_indices,
                        const double[::1] values,
                        const double[::1] diag,
                        const double[::1] b,
                        const double[::1] lower,
                        const double[::1] upper,
                        double omega,
                        double[::1] x,
                        double[::1] w):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, k, start, end
    cdef double xi, xhat, delta, lo, hi
    cdef double dsq = 0.0
    with nogil:
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
                start = row_starts[i]
                end = row_starts[i + 1]
                for k in range(start, end):
                    w[col_indices[k]] += delta * values[k]
                dsq += delta * delta
    return dsq


cpdef double csc_normal_sweep(const long long[::1] col_starts,
                              const long long[::1] row_indices,
                              const double[::1] values,
                              const double[::1] col_sq_norms,
                              const double[::1] lower,
                              const double[::1] upper,
                              double omega,
                              double[::1] x,
                              double[::1] r):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, k, start, end
    cdef double s, xi, xhat, delta, lo, hi
    cdef double dsq = 0.0
    with nogil:
        for i in range(n):
            start = col_starts[i]
            end = col_starts[i + 1]
            s = 0.0
            for k in range(start, end):
                s += values[k] * r[row_indices[k]]
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
                for k in range(start, end):
                    r[row_indices[k]] -= delta * values[k]
                dsq += delta * delta
    return dsq


cpdef double stamp_normal_sweep(const long long[::1] v_start,
                                const long long[::1] v_len,
                                const double[:, ::1] v_wts,
                                const long long[::1] h_start,
                                const long long[::1] h_len,
                                const double[:, ::1] h_wts,
                                const double[::1] v_sq,
                                const double[::1] h_sq,
                                const double[:, ::1] lower,
                                const double[:, ::1] upper,
                                double omega,
                                double[:, ::1] x,
                                double[:, ::1] r):
    cdef Py_ssize_t height = x.shape[0]
    cdef Py_ssize_t width = x.shape[1]
    cdef Py_ssize_t y, xx, p, q, vs, hs, vl, hl
    cdef double s, row_sum, xi, xhat, delta, t, lo, hi
    cdef double dsq = 0.0
    with nogil:
        for y in range(height):
            vs = v_start[y]
            vl = v_len[y]
            for xx in range(width):
                hs = h_start[xx]
                hl = h_len[xx]
                s = 0.0
                for p in range(vl):
                    row_sum = 0.0
                    for q in range(hl):
                        row_sum += h_wts[xx, q] * r[vs + p, hs + q]
                    s += v_wts[y, p] * row_sum
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
                    for p in range(vl):
                        t = delta * v_wts[y, p]
                        for q in range(hl):
                            r[vs + p, hs + q] -= t * h_wts[xx, q]
                    dsq += delta * delta
    return dsq
