"""Bit-exact external formats.

Matrix Market coordinate files for symmetric matrices (plus rectangular
general files for least-squares operators), one-value-per-line vector
files, CSV iteration traces, and a JSON file for solver parameters.  All
writers are deterministic: floats are rendered with 17 significant digits
(shortest round-trip form in the JSON case), which round-trips float64
exactly.
"""

import dataclasses
import json
import math

import numpy as np
from scipy import sparse

from .linalg import ColumnOperator, SparseSymMatrix
from .solvers import SolverConfig, WolfeParams


class FormatError(ValueError):
    """Malformed or unsupported file content."""


def _fmt(value):
    return f"{value:.17g}"


TRACE_CSV_HEADER = "iter,delta_norm,objective,omega,h,kkt_residual,d,s,event"


# ---------------------------------------------------------------------------
# Matrix Market


def _parse_mm_header(line):
    parts = line.strip().split()
    if len(parts) != 5 or parts[0] != "%%MatrixMarket":
        raise FormatError("malformed MatrixMarket header line")
    obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise FormatError("only coordinate-format matrices are supported")
    if field != "real":
        raise FormatError(f"unsupported field {field!r}; expected real")
    return symmetry


def _read_mm_entries(path, expected_symmetry):
    with open(path, "r", encoding="ascii") as f:
        first = f.readline()
        if not first:
            raise FormatError("empty file")
        symmetry = _parse_mm_header(first)
        if symmetry != expected_symmetry:
            raise FormatError(
                f"symmetry {symmetry!r} not supported here; "
                f"expected {expected_symmetry!r}"
            )
        size_line = None
        for line in f:
            if line.startswith("%") or not line.strip():
                continue
            size_line = line
            break
        if size_line is None:
            raise FormatError("missing size line")
        parts = size_line.split()
        if len(parts) != 3:
            raise FormatError("malformed size line")
        rows, cols, nnz = int(parts[0]), int(parts[1]), int(parts[2])
        ii = np.empty(nnz, dtype=np.int64)
        jj = np.empty(nnz, dtype=np.int64)
        vv = np.empty(nnz, dtype=np.float64)
        count = 0
        for line in f:
            if line.startswith("%") or not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"malformed entry line: {line.strip()!r}")
            if count >= nnz:
                raise FormatError("more entries than the size line declares")
            ii[count] = int(parts[0]) - 1
            jj[count] = int(parts[1]) - 1
            vv[count] = float(parts[2])
            count += 1
        if count != nnz:
            raise FormatError(f"expected {nnz} entries, found {count}")
    if nnz and (ii.min() < 0 or jj.min() < 0 or ii.max() >= rows or jj.max() >= cols):
        raise FormatError("entry index out of range")
    return rows, cols, ii, jj, vv


def read_matrix_market(path):
    """Read a coordinate real symmetric file into a SparseSymMatrix.

    Entries may be given in either triangle; off-diagonal entries are
    mirrored to full storage.  Diagonal positivity is validated by the
    matrix constructor.
    """
    rows, cols, ii, jj, vv = _read_mm_entries(path, "symmetric")
    if rows != cols:
        raise FormatError("symmetric matrix must be square")
    off = ii != jj
    rr = np.concatenate([ii, jj[off]])
    cc = np.concatenate([jj, ii[off]])
    data = np.concatenate([vv, vv[off]])
    return SparseSymMatrix.from_coo(rows, rr, cc, data)


def write_matrix_market(path, A):
    """Write a SparseSymMatrix as coordinate real symmetric (lower triangle)."""
    if not isinstance(A, SparseSymMatrix):
        raise TypeError("expected a SparseSymMatrix")
    lower = sparse.tril(A.to_scipy()).tocoo()
    order = np.lexsort((lower.col, lower.row))
    with open(path, "w", encoding="ascii") as f:
        f.write("%%MatrixMarket matrix coordinate real symmetric\n")
        f.write(f"{A.n} {A.n} {lower.nnz}\n")
        for k in order:
            f.write(f"{lower.row[k] + 1} {lower.col[k] + 1} "
                    f"{_fmt(lower.data[k])}\n")


def read_matrix_market_rect(path):
    """Read a coordinate real general file into a ColumnOperator."""
    rows, cols, ii, jj, vv = _read_mm_entries(path, "general")
    sp = sparse.csc_matrix((vv, (ii, jj)), shape=(rows, cols))
    sp.sum_duplicates()
    sp.sort_indices()
    return ColumnOperator(rows, cols, sp.indptr, sp.indices, sp.data)


def write_matrix_market_rect(path, C):
    """Write a ColumnOperator as coordinate real general (column order)."""
    if not isinstance(C, ColumnOperator):
        raise TypeError("expected a ColumnOperator")
    with open(path, "w", encoding="ascii") as f:
        f.write("%%MatrixMarket matrix coordinate real general\n")
        f.write(f"{C.rows} {C.cols} {C.values.shape[0]}\n")
        for j in range(C.cols):
            for k in range(C.col_starts[j], C.col_starts[j + 1]):
                f.write(f"{C.row_indices[k] + 1} {j + 1} {_fmt(C.values[k])}\n")


# ---------------------------------------------------------------------------
# vectors


def write_vector(path, x):
    """One decimal value per line, preceded by a '# n=<dim>' comment."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a 1-D array")
    with open(path, "w", encoding="ascii") as f:
        f.write(f"# n={x.shape[0]}\n")
        for v in x:
            f.write(_fmt(v) + "\n")


def read_vector(path):
    values = []
    with open(path, "r", encoding="ascii") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            values.append(float(line))
    return np.array(values, dtype=np.float64)


# ---------------------------------------------------------------------------
# solver configuration


def write_solver_config(path, cfg):
    """Write a SolverConfig as sorted-key JSON (deterministic bytes)."""
    payload = dataclasses.asdict(cfg)
    with open(path, "w", encoding="ascii") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_solver_config(path):
    """Read a SolverConfig written by :func:`write_solver_config`.

    Unknown keys are rejected so that typos do not silently fall back to
    defaults; missing keys take their defaults.
    """
    with open(path, "r", encoding="ascii") as f:
        payload = json.load(f)
    if not isinstance(payload, dict):
        raise FormatError("solver config must be a JSON object")
    wolfe_fields = {f.name for f in dataclasses.fields(WolfeParams)}
    cfg_fields = {f.name for f in dataclasses.fields(SolverConfig)}
    wolfe_payload = payload.pop("wolfe", {})
    unknown = (set(payload) - cfg_fields) | (set(wolfe_payload) - wolfe_fields)
    if unknown:
        raise FormatError(f"unknown solver config keys: {sorted(unknown)}")
    return SolverConfig(wolfe=WolfeParams(**wolfe_payload), **payload)


# ---------------------------------------------------------------------------
# iteration traces


def _csv_float(value):
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return _fmt(value)


def write_trace_csv(trace, path):
    """One CSV row per iteration; blank kkt_residual when unsampled."""
    dn = trace.delta_norm
    obj = trace.objective
    om = trace.omega
    hs = trace.h
    kkt = trace.kkt_residual
    d = trace.d
    s = trace.s
    events = trace.events
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(TRACE_CSV_HEADER + "\n")
        for k in range(len(trace)):
            kk = "" if math.isnan(kkt[k]) else _fmt(kkt[k])
            f.write(
                f"{k},{_csv_float(dn[k])},{_csv_float(obj[k])},"
                f"{_csv_float(om[k])},{_csv_float(hs[k])},{kk},"
                f"{_csv_float(d[k])},{_csv_float(s[k])},{events[k]}\n"
            )
