"""Determinants, transvection decompositions, and volume rescaling by linear maps."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .geometry import Box, Norm, as_vector, box_volume
from .sampling import SeededSampler

PIVOT_TOL = 1e-12


def as_matrix(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidParameterError(f"expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidParameterError("matrix has non-finite entries")
    return a


def determinant(m) -> float:
    """Determinant by Gaussian elimination with partial pivoting."""
    a = as_matrix(m).copy()
    d = a.shape[0]
    det = 1.0
    for k in range(d):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if a[p, k] == 0.0:
            return 0.0
        if p != k:
            a[[k, p]] = a[[p, k]]
            det = -det
        det *= a[k, k]
        a[k + 1 :, k:] -= np.outer(a[k + 1 :, k] / a[k, k], a[k, k:])
    return float(det)


@dataclass(frozen=True)
class Transvection:
    """The matrix ``I + coeff * E[row, col]`` with ``row != col``."""

    row: int
    col: int
    coeff: float

    def __post_init__(self):
        if self.row == self.col:
            raise InvalidParameterError("a transvection needs distinct row and column")

    def matrix(self, d: int) -> np.ndarray:
        t = np.eye(d)
        t[self.row, self.col] = self.coeff
        return t

    def inverse(self) -> Transvection:
        return Transvection(self.row, self.col, -self.coeff)


@dataclass
class TransvectionDecomposition:
    left: list[Transvection] = field(default_factory=list)
    diag: list[float] = field(default_factory=list)
    right: list[Transvection] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.diag)

    def reconstruct(self) -> np.ndarray:
        d = self.dim
        out = np.eye(d)
        for t in self.left:
            out = out @ t.matrix(d)
        out = out * np.asarray(self.diag)  # right-multiplication by Diagonal(diag)
        for t in self.right:
            out = out @ t.matrix(d)
        return out

    def to_dict(self) -> dict:
        as_list = lambda ts: [{"row": t.row, "col": t.col, "coeff": t.coeff} for t in ts]
        return {"left": as_list(self.left), "diag": list(self.diag), "right": as_list(self.right)}


def transvection_decompose(m) -> TransvectionDecomposition:
    """Write ``m`` as (product of transvections) . diagonal . (product of transvections).

    Two-sided Gaussian elimination where only transvections are applied. A
    pivot is never moved by a permutation: the row holding the largest entry
    of the column is added (with a sign) to the pivot row, giving a pivot at
    least as large as any entry below it, so multipliers stay within [-1, 1].
    When a column is numerically zero the largest entry of the remaining block
    is first brought into it by a column transvection. A remaining block below
    ``PIVOT_TOL`` is treated as zero and contributes zeros to the diagonal.
    """
    a = as_matrix(m).copy()
    d = a.shape[0]
    row_ops: list[Transvection] = []  # applied as a <- T a, in order
    col_ops: list[Transvection] = []  # applied as a <- a T, in order

    def add_rows(target, source, c):
        a[target] += c * a[source]
        row_ops.append(Transvection(target, source, c))

    def add_cols(target, source, c):
        a[:, target] += c * a[:, source]
        col_ops.append(Transvection(source, target, c))

    rank = d
    for k in range(d):
        block = np.abs(a[k:, k:])
        if block.max() < PIVOT_TOL:
            rank = k
            break
        if np.abs(a[k:, k]).max() < PIVOT_TOL:
            q = k + int(np.argmax(block.max(axis=0)))
            sign = 1.0 if a[k:, k] @ a[k:, q] >= 0 else -1.0
            add_cols(k, q, sign)
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            sign = 1.0 if a[k, k] * a[p, k] >= 0 else -1.0
            add_rows(k, p, sign)
        pivot = a[k, k]
        for i in range(k + 1, d):
            if a[i, k] != 0.0:
                add_rows(i, k, -a[i, k] / pivot)
        a[k + 1 :, k] = 0.0
    for k in range(rank):
        for j in range(k + 1, d):
            if a[k, j] != 0.0:
                add_cols(j, k, -a[k, j] / a[k, k])
        a[k, k + 1 :] = 0.0

    diag = [float(a[i, i]) if i < rank else 0.0 for i in range(d)]
    # (T_r ... T_1) m (S_1 ... S_c) = D  =>  m = T_1^-1 ... T_r^-1 D S_c^-1 ... S_1^-1
    left = [t.inverse() for t in row_ops]
    right = [t.inverse() for t in reversed(col_ops)]
    return TransvectionDecomposition(left, diag, right)


def linear_image_measure_check(m, b: Box, sampler: SeededSampler, n: int) -> tuple[float, float]:
    """Estimate ``Leb(m(b)) / Leb(b)`` and return it with ``|det m|``.

    The image box is the bounding box of the mapped corners; a point ``y`` of
    it belongs to ``m(b)`` iff ``m^-1 y`` lies in ``b``.
    """
    if n < 10**4:
        raise InvalidParameterError("linear_image_measure_check needs at least 1e4 samples")
    a = as_matrix(m)
    if a.shape[0] != b.dim:
        raise InvalidParameterError("matrix and box differ in dimension")
    abs_det = abs(determinant(a))
    vol = box_volume(b)
    if abs_det < PIVOT_TOL or vol == 0.0:
        return 0.0, abs_det
    inv = np.linalg.inv(a)
    image = b.corners() @ a.T
    lo, hi = image.min(axis=0), image.max(axis=0)
    image_vol = float(np.prod(hi - lo))

    def draw(rng, size):
        y = lo + rng.random((size, a.shape[0])) * (hi - lo)
        return b.contains(y @ inv.T).astype(float)

    frac = sampler.mean(n, draw).mean
    return image_vol * frac / vol, abs_det


def ball_volume_scaling(mu_scale: float, d: int, norm: Norm, x, radii, sampler: SeededSampler,
                        n: int = 200_000) -> list[tuple[float, float]]:
    """Estimated ``mu(B(x, r)) / r^d`` for each radius, ``mu = mu_scale * Lebesgue``.

    One set of uniform points in ``[-1, 1]^d`` is reused for every ball (common
    random numbers), each ball's bounding cube being an affine image of that
    cube. Translation and dilation invariance of Lebesgue measure then show up
    as identical ratios.
    """
    x = as_vector(x)
    if x.size != d:
        raise InvalidParameterError("point dimension does not match d")
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii):
        raise InvalidParameterError("radii must be positive")
    unit = sampler.uniform(-np.ones(d), np.ones(d), n)
    out = []
    for r in radii:
        pts = x + r * unit
        frac = float(np.mean(norm(pts - x) <= r))
        # (2r)^d * frac / r^d, written to avoid rounding in the power ratio
        out.append((r, mu_scale * 2.0**d * frac))
    return out
