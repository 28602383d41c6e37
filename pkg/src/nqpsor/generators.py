"""Random test-problem generators with prescribed spectra.

Matrices are synthesized by applying seeded random Givens rotations to a
diagonal matrix holding the requested eigenvalues, so the spectrum is
preserved exactly (up to rounding) while the sparsity fills in toward the
requested density.  Right-hand sides are built around a constructed
solution/slack pair with disjoint supports, which satisfies the first-order
optimality conditions by construction.

The RNG is numpy's seeded PCG64 generator, so the same spec and seed
reproduce the same problem bytes across platforms.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SparseSymMatrix, matvec
from .model import NqpProblem


def spd_spectrum(n, kappa):
    """Eigenvalues 1 .. kappa, linearly spaced (condition number kappa)."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return np.linspace(1.0, float(kappa), n)


def spsd_spectrum(n, kappa):
    """Eigenvalues 0 .. kappa, linearly spaced (rank n-1)."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return np.linspace(0.0, float(kappa), n)


def rank_deficient_spectrum(n, r, kappa):
    """n - r - 1 zeros followed by 0 .. kappa over r + 1 points (rank r)."""
    if not 0 <= r < n:
        raise ValueError("rank r must satisfy 0 <= r < n")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return np.concatenate([np.zeros(n - r - 1), np.linspace(0.0, float(kappa), r + 1)])


@dataclass
class GenSpec:
    """Matrix synthesis parameters: size, target density, spectrum, seed."""

    n: int
    density: float
    spectrum: np.ndarray
    seed: object = 0

    def __post_init__(self):
        self.spectrum = np.asarray(self.spectrum, dtype=np.float64)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 < self.density <= 1.0:
            raise ValueError("density must lie in (0, 1]")
        if self.spectrum.shape != (self.n,):
            raise ValueError("spectrum must have length n")
        if np.any(self.spectrum < 0):
            raise ValueError("spectrum must be nonnegative")
        if self.density * self.n * self.n < self.n:
            raise ValueError("density too small to hold the diagonal")


@dataclass
class GeneratedProblem:
    """A problem together with its constructed solution and slack."""

    problem: NqpProblem
    x_true: np.ndarray
    y_true: np.ndarray
    label: str = ""


class _RotationWorkspace:
    """Symmetric matrix held as per-row dicts while rotations are applied."""

    def __init__(self, diag_values):
        n = diag_values.shape[0]
        self.n = n
        self.rows = [dict() for _ in range(n)]
        self.nnz = 0
        for i in range(n):
            v = float(diag_values[i])
            if v != 0.0:
                self.rows[i][i] = v
                self.nnz += 1

    def _set(self, i, j, value):
        row = self.rows[i]
        if value == 0.0:
            if j in row:
                del row[j]
                self.nnz -= 1
        else:
            if j not in row:
                self.nnz += 1
            row[j] = value

    def rotate(self, i, j, theta):
        """Two-sided rotation in the (i, j) plane; preserves the spectrum."""
        c = math.cos(theta)
        s = math.sin(theta)
        row_i, row_j = self.rows[i], self.rows[j]
        a_ii = row_i.get(i, 0.0)
        a_jj = row_j.get(j, 0.0)
        a_ij = row_i.get(j, 0.0)
        others = (set(row_i) | set(row_j)) - {i, j}
        for k in others:
            a_ik = row_i.get(k, 0.0)
            a_jk = row_j.get(k, 0.0)
            b_ik = c * a_ik - s * a_jk
            b_jk = s * a_ik + c * a_jk
            self._set(i, k, b_ik)
            self._set(k, i, b_ik)
            self._set(j, k, b_jk)
            self._set(k, j, b_jk)
        b_ii = c * c * a_ii - 2.0 * c * s * a_ij + s * s * a_jj
        b_jj = s * s * a_ii + 2.0 * c * s * a_ij + c * c * a_jj
        b_ij = c * s * (a_ii - a_jj) + (c * c - s * s) * a_ij
        self._set(i, i, b_ii)
        self._set(j, j, b_jj)
        self._set(i, j, b_ij)
        self._set(j, i, b_ij)

    def diag(self):
        return np.array([self.rows[i].get(i, 0.0) for i in range(self.n)])

    def to_matrix(self):
        counts = np.array([len(r) for r in self.rows], dtype=np.int64)
        row_starts = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=row_starts[1:])
        cols = np.empty(row_starts[-1], dtype=np.int64)
        vals = np.empty(row_starts[-1], dtype=np.float64)
        pos = 0
        for i in range(self.n):
            for j in sorted(self.rows[i]):
                cols[pos] = j
                vals[pos] = self.rows[i][j]
                pos += 1
        return SparseSymMatrix(self.n, row_starts, cols, vals)


_MAX_ROTATIONS = 2_000_000
_DIAG_FIX_ROUNDS = 8


def gen_matrix(spec):
    """Sparse symmetric matrix with the eigenvalues of ``spec.spectrum``.

    Rotations are applied until the stored nonzero count reaches
    density * n**2, so the density is approximate while the spectrum is
    exact.  Diagonal positivity is verified afterwards; spectra containing
    zeros can leave nonpositive diagonal entries, which are repaired with
    further targeted rotations or reported as an error if a bounded number
    of repair rounds fails.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    diag_values = spec.spectrum[rng.permutation(n)]
    ws = _RotationWorkspace(diag_values)

    # pair each nonpositive diagonal with a strictly positive partner first
    def fix_diagonal():
        bad = [i for i in range(n) if ws.rows[i].get(i, 0.0) <= 0.0]
        good = [i for i in range(n) if ws.rows[i].get(i, 0.0) > 0.0]
        if not good:
            return False
        for i in bad:
            j = int(good[rng.integers(len(good))])
            theta = rng.uniform(0.5, 1.0)  # keeps both mixing weights large
            ws.rotate(min(i, j), max(i, j), theta)
        return True

    for _ in range(_DIAG_FIX_ROUNDS):
        if np.all(ws.diag() > 0.0):
            break
        if not fix_diagonal():
            break
    if not np.all(ws.diag() > 0.0):
        raise RuntimeError(
            "could not reach a positive diagonal; adjust the spec "
            "(spectrum has too little positive mass)"
        )

    if n > 1:
        target = int(math.ceil(spec.density * n * n))
        rotations = 0
        while ws.nnz < target:
            if rotations >= _MAX_ROTATIONS:
                raise RuntimeError("density target not reached within budget")
            i, j = rng.choice(n, size=2, replace=False)
            theta = rng.uniform(0.1, math.pi - 0.1)
            ws.rotate(min(i, j), max(i, j), theta)
            rotations += 1
            if ws.rows[i].get(i, 0.0) <= 0.0 or ws.rows[j].get(j, 0.0) <= 0.0:
                fixed = False
                for _ in range(_DIAG_FIX_ROUNDS):
                    if fix_diagonal():
                        if np.all(ws.diag() > 0.0):
                            fixed = True
                            break
                    else:
                        break
                if not fixed and not np.all(ws.diag() > 0.0):
                    raise RuntimeError(
                        "could not keep the diagonal positive while rotating"
                    )

    return ws.to_matrix()


def gen_rhs(A, seed=0):
    """Problem with a constructed solution for matrix ``A``.

    Draws the solution as max(g, 0) for standard normal g, places positive
    slack exactly on the zero components, and sets b = A x_true - y_true.
    The pair then satisfies A x - b = y >= 0, x >= 0, x'y = 0 exactly.
    """
    rng = np.random.default_rng(seed)
    n = A.n
    x_true = np.maximum(rng.standard_normal(n), 0.0)
    zero_idx = np.flatnonzero(x_true == 0.0)
    y_true = np.zeros(n)
    y_true[zero_idx] = np.abs(rng.standard_normal(zero_idx.size))
    b = matvec(A, x_true) - y_true
    return GeneratedProblem(
        problem=NqpProblem(A, b), x_true=x_true, y_true=y_true
    )


_PRESETS = ("toy-spd", "toy-spsd-small", "toy-spsd-large")


def gen_suite(preset, n=None, density=None, seed=1):
    """Deterministic problem lists for the named preset.

    "toy-spd" gives four positive definite problems with condition numbers
    10**(2i-1), i = 1..4; "toy-spsd-small" one semidefinite problem of rank
    n-1 with top eigenvalue 1e5 (n defaults to 100); "toy-spsd-large" one
    semidefinite problem of rank n-5 with top eigenvalue 1e10.  Sizes and
    densities default to desk scale (n = 1000 or 100, about ten stored
    entries per row) and can be raised to full scale through the arguments.
    """
    if preset == "toy-spd":
        n = 1000 if n is None else int(n)
        density = 10.0 / n if density is None else float(density)
        problems = []
        for i in (1, 2, 3, 4):
            kappa = 10.0 ** (2 * i - 1)
            spec = GenSpec(n, density, spd_spectrum(n, kappa), seed=[seed, i, 0])
            gp = gen_rhs(gen_matrix(spec), seed=[seed, i, 1])
            gp.label = f"spd-kappa1e{2 * i - 1:02d}"
            problems.append(gp)
        return problems
    if preset == "toy-spsd-small":
        n = 100 if n is None else int(n)
        density = 10.0 / n if density is None else float(density)
        spec = GenSpec(n, density, spsd_spectrum(n, 1e5), seed=[seed, 1, 0])
        gp = gen_rhs(gen_matrix(spec), seed=[seed, 1, 1])
        gp.label = f"spsd-rank{n - 1}"
        return [gp]
    if preset == "toy-spsd-large":
        n = 1000 if n is None else int(n)
        density = min(1.0, 50.0 / n) if density is None else float(density)
        r = n - 5
        spec = GenSpec(
            n, density, rank_deficient_spectrum(n, r, 1e10), seed=[seed, 1, 0]
        )
        gp = gen_rhs(gen_matrix(spec), seed=[seed, 1, 1])
        gp.label = f"spsd-rank{r}"
        return [gp]
    raise ValueError(f"unknown preset {preset!r}; expected one of {_PRESETS}")
