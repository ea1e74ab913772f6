"""Quadratic objectives on the product manifold.

The Burer-Monteiro relaxation replaces a unit-diagonal PSD matrix variable
with a factor whose rows are unit vectors, one sphere per row.  Maximizing
<x, A x> over those rows is then a smooth problem on the product manifold,
and the solver minimizes F(x) = -<x, A x>.  The additive constant that
would make F a true suboptimality gap is unknown at runtime; values are
reported without it, and an upper bound on it is kept separately for the
planner only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse

from .errors import ShapeMismatchError
from .geometry import ManifoldShape, PointOnM, TangentVector

__all__ = [
    "SymmetricCostMatrix",
    "LipschitzEstimates",
    "ObjectiveHandle",
    "BurerMonteiroObjective",
    "bm_value",
    "bm_riemannian_grad",
    "lipschitz_estimates",
]


class SymmetricCostMatrix:
    """Sparse symmetric matrix stored as its upper triangle.

    Entries are (i, j, weight) with 1-based indices and i <= j, matching
    the edge-list convention of the graph files.  The full symmetric CSR
    form is built once at construction; duplicates are an input error, not
    an accumulation.
    """

    __slots__ = ("n", "entries", "_csr", "_sigma")

    def __init__(self, n, entries):
        n = int(n)
        if n < 1:
            raise ValueError("n must be a positive integer")
        seen = set()
        clean = []
        for entry in entries:
            try:
                i, j, w = entry
            except (TypeError, ValueError):
                raise ValueError(
                    "each entry must be a triple (i, j, weight)") from None
            i = int(i)
            j = int(j)
            w = float(w)
            if not (1 <= i <= j <= n):
                raise ValueError(
                    "entry (%d, %d) out of range: need 1 <= i <= j <= %d"
                    % (i, j, n))
            if not math.isfinite(w):
                raise ValueError("entry (%d, %d) has non-finite weight" % (i, j))
            if (i, j) in seen:
                raise ValueError("duplicate entry (%d, %d)" % (i, j))
            seen.add((i, j))
            clean.append((i, j, w))
        clean.sort()
        self.n = n
        self.entries = tuple(clean)

        rows = []
        cols = []
        vals = []
        for i, j, w in clean:
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(w)
            if i != j:
                rows.append(j - 1)
                cols.append(i - 1)
                vals.append(w)
        self._csr = scipy.sparse.csr_matrix(
            (np.asarray(vals, dtype=np.float64),
             (np.asarray(rows, dtype=np.int64),
              np.asarray(cols, dtype=np.int64))),
            shape=(n, n))
        if vals:
            self._sigma = float(np.abs(self._csr).sum(axis=1).max())
        else:
            self._sigma = 0.0

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    def matmat(self, x: np.ndarray) -> np.ndarray:
        """Dense product A @ x for x with n rows."""
        return self._csr @ x

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def sigma_max(self) -> float:
        """Max absolute row sum: a one-pass upper bound on the 2-norm."""
        return self._sigma

    def scaled(self, c: float) -> "SymmetricCostMatrix":
        c = float(c)
        return SymmetricCostMatrix(
            self.n, [(i, j, c * w) for i, j, w in self.entries])

    def __repr__(self):
        return "SymmetricCostMatrix(n=%d, nnz=%d)" % (self.n, self.nnz)


@dataclass(frozen=True)
class LipschitzEstimates:
    """Conservative smoothness constants fed to the planner.

    Derived from the operator-norm bound sigma, never below 1.  These are
    upper bounds by construction, which is what the planner's formulas
    assume; they are not sharp.
    """

    k1: float
    k2: float
    k3: float
    sigma: float


class ObjectiveHandle:
    """Interface the chain driver consumes: values and ambient gradients.

    Subclasses must set .shape and implement value_rows and
    value_and_gradient_rows on raw (n, d+1) factor arrays; the public
    PointOnM-typed methods and the tangent projection are provided here.
    """

    shape: ManifoldShape

    def value_rows(self, rows: np.ndarray) -> float:
        raise NotImplementedError

    def value_and_gradient_rows(self, rows: np.ndarray):
        raise NotImplementedError

    def _check(self, x: PointOnM) -> np.ndarray:
        if not isinstance(x, PointOnM):
            raise TypeError("expected a PointOnM")
        if x.shape != self.shape:
            raise ShapeMismatchError(
                "point shape %r does not match objective shape %r"
                % (x.shape, self.shape))
        return x.factors

    def value(self, x: PointOnM) -> float:
        return self.value_rows(self._check(x))

    def euclidean_gradient(self, x: PointOnM) -> np.ndarray:
        return self.value_and_gradient_rows(self._check(x))[1]

    def riemannian_gradient(self, x: PointOnM) -> TangentVector:
        rows = self._check(x)
        grad = self.value_and_gradient_rows(rows)[1]
        dots = np.einsum("ij,ij->i", grad, rows)
        return TangentVector(x, grad - dots[:, None] * rows)


class BurerMonteiroObjective(ObjectiveHandle):
    """F(x) = -<x, A x> on n spheres S^d.

    The one sparse product A @ x serves both the value and the ambient
    gradient -2(A x), so chain steps pay a single matvec.
    """

    __slots__ = ("matrix", "shape", "offset_bound")

    def __init__(self, matrix: SymmetricCostMatrix, shape: ManifoldShape,
                 offset_bound: float = None):
        if not isinstance(matrix, SymmetricCostMatrix):
            raise TypeError("matrix must be a SymmetricCostMatrix")
        if not isinstance(shape, ManifoldShape):
            raise TypeError("shape must be a ManifoldShape")
        if matrix.n != shape.n:
            raise ShapeMismatchError(
                "matrix is %d x %d but the manifold has %d factors"
                % (matrix.n, matrix.n, shape.n))
        self.matrix = matrix
        self.shape = shape
        if offset_bound is None:
            offset_bound = shape.n * matrix.sigma_max()
        self.offset_bound = float(offset_bound)

    def value_rows(self, rows: np.ndarray) -> float:
        ax = self.matrix.matmat(rows)
        return -float(np.einsum("ij,ij->", rows, ax))

    def value_and_gradient_rows(self, rows: np.ndarray):
        ax = self.matrix.matmat(rows)
        return -float(np.einsum("ij,ij->", rows, ax)), -2.0 * ax

    def quadratic_value(self, x: PointOnM) -> float:
        """The maximized form <x, A x> (the negative of value)."""
        return -self.value(x)

    def lipschitz_estimates(self) -> LipschitzEstimates:
        return lipschitz_estimates(self.matrix, self.shape)


def bm_value(matrix: SymmetricCostMatrix, x: PointOnM) -> float:
    """-<x, A x>, the quantity the Langevin chain minimizes."""
    return BurerMonteiroObjective(matrix, x.shape).value(x)


def bm_riemannian_grad(matrix: SymmetricCostMatrix,
                       x: PointOnM) -> TangentVector:
    """Tangent projection of the ambient gradient -2(A x)."""
    return BurerMonteiroObjective(matrix, x.shape).riemannian_gradient(x)


def lipschitz_estimates(matrix: SymmetricCostMatrix,
                        shape: ManifoldShape) -> LipschitzEstimates:
    """Gradient, Hessian, and third-derivative bounds from the row-sum norm.

    K1 bounds the Riemannian gradient norm over the whole product (hence
    the sqrt(n) factor), K2 the Hessian operator norm, K3 the third
    derivative along unit tangents.  All are clamped to at least 1.
    """
    if matrix.n != shape.n:
        raise ShapeMismatchError(
            "matrix size %d does not match manifold factors %d"
            % (matrix.n, shape.n))
    sigma = matrix.sigma_max()
    return LipschitzEstimates(
        k1=max(1.0, 2.0 * sigma * math.sqrt(shape.n)),
        k2=max(1.0, 4.0 * sigma),
        k3=max(1.0, 6.0 * sigma),
        sigma=sigma,
    )
