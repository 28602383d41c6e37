"""Sparse symmetric storage and matrix-free column operators.

Matrices are stored with the full symmetric pattern (both triangles) so a
Gauss-Seidel-style sweep can read each row in one pass, with the diagonal
cached separately because every sweep divides by it.
"""

import numpy as np
from scipy import sparse


def as_vector(x, n=None, name="vector"):
    """Coerce to a 1-D float64 array, checking length and finiteness."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


class SparseSymMatrix:
    """Sparse symmetric matrix with full row storage.

    Both triangles are stored so each row is fully iterable.  Construction
    rejects asymmetric input, unsorted or duplicate column indices, and any
    missing or nonpositive diagonal entry; the solvers divide by the diagonal
    and rely on these checks instead of repairing input silently.

    Attributes
    ----------
    n : int
        Dimension.
    row_starts : ndarray of int64, length n+1
        Row pointer array.
    col_indices : ndarray of int64
        Column indices, strictly increasing within each row.
    values : ndarray of float64
        Stored entries.
    diag : ndarray of float64, length n
        Cached diagonal, all entries strictly positive.
    """

    def __init__(self, n, row_starts, col_indices, values):
        n = int(n)
        row_starts = np.ascontiguousarray(row_starts, dtype=np.int64)
        col_indices = np.ascontiguousarray(col_indices, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if n < 1:
            raise ValueError("dimension must be >= 1")
        if row_starts.shape != (n + 1,):
            raise ValueError("row_starts must have length n+1")
        if row_starts[0] != 0 or row_starts[-1] != col_indices.shape[0]:
            raise ValueError("row_starts is not a valid pointer array")
        if np.any(np.diff(row_starts) < 0):
            raise ValueError("row_starts must be nondecreasing")
        if col_indices.shape != values.shape:
            raise ValueError("col_indices and values must have equal length")
        if col_indices.size and (col_indices.min() < 0 or col_indices.max() >= n):
            raise ValueError("column index out of range")
        for i in range(n):
            cols = col_indices[row_starts[i]:row_starts[i + 1]]
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError(
                    f"row {i}: column indices must be strictly increasing"
                )
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")

        self.n = n
        self.row_starts = row_starts
        self.col_indices = col_indices
        self.values = values
        self._sp = sparse.csr_matrix(
            (values, col_indices, row_starts), shape=(n, n)
        )

        # full-pattern storage implies A equals its transpose entry for entry
        t = self._sp.T.tocsr()
        t.sort_indices()
        if not (
            np.array_equal(t.indptr, row_starts)
            and np.array_equal(t.indices, col_indices)
            and np.array_equal(t.data, values)
        ):
            raise ValueError("matrix is not symmetric (pattern and values)")

        diag = self._sp.diagonal()
        if not np.all(diag > 0.0):
            raise ValueError("positive diagonal required (every a_ii present and > 0)")
        self.diag = diag

        # diagonal position within each row, used by shifted copies
        pos = np.empty(n, dtype=np.int64)
        for i in range(n):
            start, end = row_starts[i], row_starts[i + 1]
            k = np.searchsorted(col_indices[start:end], i)
            pos[i] = start + k
        self._diag_pos = pos

        for a in (self.row_starts, self.col_indices, self.values, self.diag):
            a.setflags(write=False)

    @property
    def nnz(self):
        return int(self.values.shape[0])

    @classmethod
    def from_coo(cls, n, rows, cols, vals):
        """Build from coordinate triplets covering both triangles.

        Duplicate (i, j) pairs are rejected rather than summed.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size > 1:
            same = (np.diff(rows) == 0) & (np.diff(cols) == 0)
            if np.any(same):
                raise ValueError("duplicate (i, j) entry in coordinate input")
        counts = np.bincount(rows, minlength=n)
        row_starts = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=row_starts[1:])
        return cls(n, row_starts, cols, vals)

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("expected a square 2-D array")
        rows, cols = np.nonzero(arr)
        return cls.from_coo(arr.shape[0], rows, cols, arr[rows, cols])

    def toarray(self):
        return self._sp.toarray()

    def to_scipy(self):
        return self._sp

    def row(self, i):
        """(column indices, values) of row ``i`` as views."""
        start, end = self.row_starts[i], self.row_starts[i + 1]
        return self.col_indices[start:end], self.values[start:end]

    def shifted(self, sigma):
        """Copy with ``sigma`` added to every diagonal entry (pattern kept)."""
        vals = self.values.copy()
        vals[self._diag_pos] += sigma
        return SparseSymMatrix(self.n, self.row_starts, self.col_indices, vals)


class ColumnOperator:
    """General sparse matrix stored column-major for column-action sweeps.

    Houses the least-squares operator; ``col_sq_norms`` caches the squared
    column norms that play the role of the normal-equation diagonal.  A zero
    column would make that diagonal zero, so construction rejects it.
    """

    def __init__(self, rows, cols, col_starts, row_indices, values):
        rows, cols = int(rows), int(cols)
        col_starts = np.ascontiguousarray(col_starts, dtype=np.int64)
        row_indices = np.ascontiguousarray(row_indices, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if rows < 1 or cols < 1:
            raise ValueError("operator must have at least one row and column")
        if col_starts.shape != (cols + 1,):
            raise ValueError("col_starts must have length cols+1")
        if col_starts[0] != 0 or col_starts[-1] != row_indices.shape[0]:
            raise ValueError("col_starts is not a valid pointer array")
        if row_indices.shape != values.shape:
            raise ValueError("row_indices and values must have equal length")
        if row_indices.size and (row_indices.min() < 0 or row_indices.max() >= rows):
            raise ValueError("row index out of range")
        for j in range(cols):
            rr = row_indices[col_starts[j]:col_starts[j + 1]]
            if rr.size > 1 and np.any(np.diff(rr) <= 0):
                raise ValueError(
                    f"column {j}: row indices must be strictly increasing"
                )
        if not np.all(np.isfinite(values)):
            raise ValueError("operator values must be finite")

        self.rows = rows
        self.cols = cols
        self.col_starts = col_starts
        self.row_indices = row_indices
        self.values = values

        sq = np.empty(cols, dtype=np.float64)
        for j in range(cols):
            v = values[col_starts[j]:col_starts[j + 1]]
            sq[j] = np.dot(v, v)
        if not np.all(sq > 0.0):
            raise ValueError("zero column: every column must be nonzero")
        self.col_sq_norms = sq
        self._sp = sparse.csc_matrix(
            (values, row_indices, col_starts), shape=(rows, cols)
        )
        for a in (self.col_starts, self.row_indices, self.values, self.col_sq_norms):
            a.setflags(write=False)

    @classmethod
    def from_dense(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        sp = sparse.csc_matrix(arr)
        sp.sort_indices()
        return cls(arr.shape[0], arr.shape[1], sp.indptr, sp.indices, sp.data)

    @classmethod
    def from_scipy(cls, sp):
        sp = sparse.csc_matrix(sp)
        sp.sort_indices()
        return cls(sp.shape[0], sp.shape[1], sp.indptr, sp.indices, sp.data)

    def toarray(self):
        return self._sp.toarray()

    def to_scipy(self):
        return self._sp

    def apply(self, x):
        """C @ x."""
        x = as_vector(x, self.cols, "x")
        return self._sp @ x

    def rmatvec(self, y):
        """C.T @ y."""
        y = as_vector(y, self.rows, "y")
        return self._sp.T @ y


def matvec(A, x):
    """Product ``A @ x`` for a SparseSymMatrix.

    Each component is the stored-pattern sum in ascending column order; no
    compensated summation is used, so results are reproducible across runs.
    """
    x = as_vector(x, A.n, "x")
    return A.to_scipy() @ x


def normal_matvec(C, x):
    """Product ``C.T @ (C @ x)`` without forming the normal matrix."""
    x = as_vector(x, C.cols, "x")
    return C._sp.T @ (C._sp @ x)


def build_explicit_normal(C):
    """Explicitly assembled normal matrix ``C.T @ C`` as a SparseSymMatrix.

    Intended for small-scale equivalence testing; large problems should use
    :func:`normal_matvec` instead, since the normal matrix fills in.  The
    diagonal is set to ``col_sq_norms`` so the explicit and matrix-free
    paths divide by bit-identical numbers.
    """
    G = (C._sp.T @ C._sp).tocsr()
    G.sort_indices()
    upper = sparse.triu(G, k=1).tocoo()
    rows = np.concatenate([upper.row, upper.col, np.arange(C.cols)])
    cols = np.concatenate([upper.col, upper.row, np.arange(C.cols)])
    vals = np.concatenate([upper.data, upper.data, C.col_sq_norms])
    return SparseSymMatrix.from_coo(C.cols, rows, cols, vals)
