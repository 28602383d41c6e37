"""Grayscale deblurring as box-constrained least squares.

The blur is a separable Gaussian filter with replicate boundary handling
(border pixels extend beyond the image edge).  It is applied through the
explicit one-dimensional filter matrices of each axis, and its operator
columns are outer products of one-dimensional column stamps; the deblurring
sweep exploits that to update the residual with an O(stamp area) stencil
per pixel while never forming the normal matrix.

Images are 2-D float64 arrays with values in [0, 1]; 8-bit quantization
happens only at PGM input/output.
"""

import math

import numpy as np

from . import _backend as kernels
from .linalg import ColumnOperator
from .solvers import SolveResult, SolverConfig, _new_trace, _solve_fixed, _solve_wolfe


def as_image(img, name="image"):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"{name} must be a nonempty 2-D array")
    if not np.all(np.isfinite(img)):
        raise ValueError(f"{name} contains non-finite values")
    return img


def gaussian_kernel(length_param):
    """Normalized Gaussian taps with standard deviation ``length_param``.

    The radius is ceil(4 * sigma), giving 2*ceil(4*sigma) + 1 taps that sum
    to one; the taps are even-symmetric about the center.
    """
    sigma = float(length_param)
    if not sigma > 0:
        raise ValueError("length_param must be positive")
    radius = math.ceil(4.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (offsets / sigma) ** 2)
    return taps / taps.sum()


def _line_operator(size, taps):
    """Dense matrix of the 1-D replicate-boundary correlation of ``taps``."""
    radius = (taps.shape[0] - 1) // 2
    H = np.zeros((size, size))
    positions = np.arange(size)
    for o in range(-radius, radius + 1):
        src = np.clip(positions + o, 0, size - 1)
        np.add.at(H, (positions, src), taps[o + radius])
    return H


def _column_stamps(H):
    """Contiguous nonzero support of every column: (start, length, weights)."""
    size = H.shape[0]
    starts = np.zeros(size, dtype=np.int64)
    lengths = np.zeros(size, dtype=np.int64)
    max_len = 0
    supports = []
    for j in range(size):
        nz = np.flatnonzero(H[:, j])
        first, last = int(nz[0]), int(nz[-1])
        starts[j] = first
        lengths[j] = last - first + 1
        max_len = max(max_len, last - first + 1)
        supports.append(H[first:last + 1, j])
    wts = np.zeros((size, max_len))
    for j, sup in enumerate(supports):
        wts[j, :sup.shape[0]] = sup
    return starts, lengths, wts


class BlurOperator:
    """Separable replicate-boundary filter for width x height images."""

    def __init__(self, width, height, taps):
        width, height = int(width), int(height)
        if width < 1 or height < 1:
            raise ValueError("image dimensions must be positive")
        taps = np.asarray(taps, dtype=np.float64)
        if taps.ndim != 1 or taps.shape[0] % 2 != 1:
            raise ValueError("taps must be a 1-D array of odd length")
        if np.any(taps <= 0):
            raise ValueError("taps must be positive")
        if not np.allclose(taps, taps[::-1], rtol=0, atol=0):
            raise ValueError("taps must be symmetric about the center")
        if abs(taps.sum() - 1.0) > 1e-12:
            raise ValueError("taps must sum to one")
        self.width = width
        self.height = height
        self.taps = taps
        self._H = _line_operator(width, taps)
        self._V = _line_operator(height, taps)
        self._h_start, self._h_len, self._h_wts = _column_stamps(self._H)
        self._v_start, self._v_len, self._v_wts = _column_stamps(self._V)
        self._h_sq = np.einsum("ij,ij->i", self._h_wts, self._h_wts)
        self._v_sq = np.einsum("ij,ij->i", self._v_wts, self._v_wts)

    @classmethod
    def gaussian(cls, width, height, sigma):
        return cls(width, height, gaussian_kernel(sigma))

    def _check(self, img):
        img = as_image(img)
        if img.shape != (self.height, self.width):
            raise ValueError(
                f"image shape {img.shape} does not match operator "
                f"({self.height}, {self.width})"
            )
        return img

    def apply(self, img):
        """Forward blur; linear, so the output is not clamped."""
        img = self._check(img)
        return self._V @ img @ self._H.T

    def transpose_apply(self, img):
        """Exact adjoint of :meth:`apply` for the Euclidean inner product.

        Replicate boundary handling makes the filter matrix asymmetric near
        the border, so the adjoint mirrors the boundary accumulation rather
        than re-applying the forward filter.
        """
        img = self._check(img)
        return self._V.T @ img @ self._H

    def column_sq_norms(self):
        """Squared operator-column norms as an image-shaped array."""
        return np.outer(self._v_sq, self._h_sq)

    def to_column_operator(self):
        """Explicit ColumnOperator with columns in row-major pixel order.

        Intended for small images; column (y, x) is the outer product of
        the vertical stamp of y and the horizontal stamp of x.
        """
        w, h = self.width, self.height
        n = w * h
        lengths = np.empty(n, dtype=np.int64)
        for y in range(h):
            lengths[y * w:(y + 1) * w] = self._v_len[y] * self._h_len
        col_starts = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(lengths, out=col_starts[1:])
        row_indices = np.empty(col_starts[-1], dtype=np.int64)
        values = np.empty(col_starts[-1])
        pos = 0
        for y in range(h):
            vs, vl = self._v_start[y], self._v_len[y]
            vw = self._v_wts[y, :vl]
            for x in range(w):
                hs, hl = self._h_start[x], self._h_len[x]
                hw = self._h_wts[x, :hl]
                stamp = np.outer(vw, hw)
                rows = ((vs + np.arange(vl))[:, None] * w
                        + (hs + np.arange(hl))[None, :])
                count = vl * hl
                row_indices[pos:pos + count] = rows.ravel()
                values[pos:pos + count] = stamp.ravel()
                pos += count
        return ColumnOperator(n, n, col_starts, row_indices, values)


def blur_apply(op, img):
    """Forward blur of ``img`` by ``op``."""
    return op.apply(img)


def transpose_apply(op, img):
    """Adjoint blur of ``img`` by ``op``."""
    return op.transpose_apply(img)


def add_noise(img, sigma, seed=0):
    """Add i.i.d. Gaussian noise of standard deviation ``sigma``, clamped."""
    img = as_image(img)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return img.copy()
    rng = np.random.default_rng(seed)
    return np.clip(img + sigma * rng.standard_normal(img.shape), 0.0, 1.0)


def synthetic_image(size):
    """Deterministic binary test pattern: block checkerboard plus a disk.

    Saturated (0/1) values matter: under the [0, 1] box the bounds clamp
    most of the noise that unregularized deblurring amplifies, so the
    restoration of a high-contrast pattern improves on the degraded input
    the way natural high-contrast photographs do.
    """
    size = int(size)
    if size < 8:
        raise ValueError("size must be at least 8")
    block = size // 4
    yy, xx = np.mgrid[0:size, 0:size]
    img = (((yy // block) + (xx // block)) % 2).astype(np.float64)
    cy = cx = (size - 1) / 2.0
    disk = (yy - cy) ** 2 + (xx - cx) ** 2 <= (size / 4.0) ** 2
    img[disk] = 1.0
    img[size - block:, :block] = 0.0
    return img


class _StampEngine:
    """Normal-equation sweep state for a separable blur operator.

    The counterpart of the generic column-action engine, with the residual
    held as an image and operator columns realized as stamp outer products.
    """

    REFRESH_EVERY = 1000

    def __init__(self, op, data, lower, upper, x0):
        self.op = op
        self.d = data
        self.lower = lower
        self.upper = upper
        x = np.clip(np.array(x0, dtype=np.float64), lower, upper)
        self.x = x
        self.r = data - op.apply(x)
        self._half_dd = 0.5 * float((data * data).sum())
        self.min_diag = float(op._v_sq.min() * op._h_sq.min())
        self._sweeps = 0

    def objective(self):
        return 0.5 * float((self.r * self.r).sum()) - self._half_dd

    def sweep(self, omega, need_wolfe):
        op = self.op
        if need_wolfe:
            r_old = self.r.copy()
        dsq = kernels.stamp_normal_sweep(
            op._v_start, op._v_len, op._v_wts,
            op._h_start, op._h_len, op._h_wts,
            op._v_sq, op._h_sq,
            self.lower, self.upper, float(omega), self.x, self.r,
        )
        self._sweeps += 1
        if self._sweeps % self.REFRESH_EVERY == 0:
            self.r = self.d - op.apply(self.x)
        V = self.objective()
        if need_wolfe:
            cdx = r_old - self.r
            g_new_dx = -float((self.r * cdx).sum())
            g_old_dx = -float((r_old * cdx).sum())
            return math.sqrt(dsq), V, g_old_dx, g_new_dx
        return math.sqrt(dsq), V, math.nan, math.nan

    def kkt_norm(self, h=2.0):
        alpha = h / (1.0 + 0.5 * h)
        g = -self.op.transpose_apply(self.r)
        step = np.clip(
            self.x - alpha * g / self.op.column_sq_norms(),
            self.lower, self.upper,
        )
        return float(np.linalg.norm(step - self.x))


def deblur_solve(blurred, op, cfg=None, mode="wolfe", x0=None):
    """Box-constrained least-squares restoration; returns (image, result).

    Minimizes ||C x - d||^2 over 0 <= x <= 1 by matrix-free normal-equation
    SOR, where d is the blurred (and typically noisy) input.  ``mode`` is a
    fixed relaxation parameter or "wolfe" for adaptive control; the initial
    guess defaults to the blurred input itself.
    """
    cfg = cfg or SolverConfig()
    blurred = op._check(blurred)
    lower = np.zeros_like(blurred)
    upper = np.ones_like(blurred)
    engine = _StampEngine(op, blurred, lower, upper,
                          blurred if x0 is None else op._check(x0))
    if isinstance(mode, str):
        if mode != "wolfe":
            raise ValueError("mode must be a relaxation parameter or 'wolfe'")
        status, k, trace = _solve_wolfe(engine, cfg)
    else:
        if not mode > 0:
            raise ValueError("omega must be positive")
        trace = _new_trace(cfg, engine)
        status, k, trace = _solve_fixed(engine, float(mode), cfg, trace)
    result = SolveResult(x=engine.x, status=status, iterations=k, trace=trace)
    return engine.x, result


def deblur(blurred, op, cfg=None, mode="wolfe", x0=None):
    """Restored image for the blurred input; see :func:`deblur_solve`."""
    img, _ = deblur_solve(blurred, op, cfg=cfg, mode=mode, x0=x0)
    return img


def relative_error(img, truth):
    """||img - truth|| / ||truth|| over all pixels."""
    img = as_image(img)
    truth = as_image(truth, "truth")
    return float(np.linalg.norm(img - truth) / np.linalg.norm(truth))


# ---------------------------------------------------------------------------
# PGM input/output (P5 binary and P2 ASCII, maxval 255)


def write_pgm(path, img, binary=True):
    """Write an image as 8-bit PGM; quantization happens only here."""
    img = as_image(img)
    q = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    height, width = q.shape
    if binary:
        with open(path, "wb") as f:
            f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
            f.write(q.tobytes())
    else:
        with open(path, "w", encoding="ascii") as f:
            f.write(f"P2\n{width} {height}\n255\n")
            for row in q:
                f.write(" ".join(str(v) for v in row) + "\n")


def read_pgm(path):
    """Read a P5 or P2 PGM file into a float image in [0, 1]."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:2] not in (b"P5", b"P2"):
        raise ValueError("not a PGM file (expected P5 or P2 magic)")
    magic = data[:2]
    # header tokens: magic, width, height, maxval, with # comments allowed
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        tokens.append(data[start:pos])
    width, height, maxval = (int(t) for t in tokens)
    if maxval < 1 or maxval > 255:
        raise ValueError("only 8-bit PGM is supported")
    if magic == b"P5":
        pos += 1  # single whitespace after maxval
        raster = np.frombuffer(data, dtype=np.uint8, count=width * height,
                               offset=pos)
    else:
        values = data[pos:].split()
        if len(values) < width * height:
            raise ValueError("truncated P2 raster")
        raster = np.array(values[:width * height], dtype=np.uint8)
    img = raster.reshape(height, width).astype(np.float64) / maxval
    return img
