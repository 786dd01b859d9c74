"""Dense/sparse matrix primitives: norms, soft thresholding, singular value
thresholding, observed-entry projections and a truncated SVD with a pluggable
Lanczos/full backend."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, svds

__all__ = [
    "SvdConvergenceError",
    "ObservedSet",
    "TruncatedSVD",
    "MatrixNorms",
    "SparsePlusLowRank",
    "as_matrix",
    "shrink",
    "truncated_svd",
    "svt",
    "svt_triplets",
    "norms",
    "nuclear_norm",
    "spectral_norm",
    "dual_gauge",
    "project_omega",
]

# Below this dimension a Lanczos run costs more than LAPACK on the dense array.
_FULL_SVD_DIM = 150
# Partial SVD stops paying off once the requested rank passes this fraction of
# the small dimension; switch to a full decomposition instead.
_FULL_SVD_FRACTION = 0.2


class SvdConvergenceError(RuntimeError):
    """Raised when the iterative SVD backend fails to converge.

    Carries the number of Lanczos iterations completed in ``iterations``.
    """

    def __init__(self, message, iterations=0):
        super().__init__(message)
        self.iterations = iterations


def as_matrix(a, name="matrix"):
    """Coerce ``a`` to a 2-D float64 array, rejecting NaN/Inf entries."""
    w = np.asarray(a, dtype=np.float64)
    if w.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {w.shape}")
    if w.size and not np.isfinite(w).all():
        raise ValueError(f"{name} contains non-finite entries")
    return w


@dataclass(frozen=True)
class ObservedSet:
    """An index set over an ``rows x cols`` grid, kept sorted row-major.

    ``row_idx``/``col_idx`` are parallel int64 arrays, strictly increasing
    lexicographically (no duplicates), all 0-based.
    """

    rows: int
    cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("ObservedSet dimensions must be positive")
        ri = np.asarray(self.row_idx, dtype=np.int64)
        ci = np.asarray(self.col_idx, dtype=np.int64)
        if ri.shape != ci.shape or ri.ndim != 1:
            raise ValueError("row/col index arrays must be 1-D and parallel")
        if ri.size:
            if ri.min() < 0 or ri.max() >= self.rows or ci.min() < 0 or ci.max() >= self.cols:
                raise ValueError("index out of range")
            lin = ri * self.cols + ci
            if not (np.diff(lin) > 0).all():
                raise ValueError("indices must be strictly sorted with no duplicates")
        object.__setattr__(self, "row_idx", ri)
        object.__setattr__(self, "col_idx", ci)

    @classmethod
    def from_pairs(cls, rows, cols, pairs):
        """Build from an iterable of (i, j) pairs; sorts, rejects duplicates."""
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        order = np.lexsort((arr[:, 1], arr[:, 0]))
        arr = arr[order]
        return cls(rows, cols, arr[:, 0].copy(), arr[:, 1].copy())

    @classmethod
    def from_linear(cls, rows, cols, linear):
        """Build from row-major linear indices (``i * cols + j``)."""
        lin = np.sort(np.asarray(linear, dtype=np.int64))
        return cls(rows, cols, lin // cols, lin % cols)

    @property
    def size(self):
        return int(self.row_idx.size)

    @property
    def complement_size(self):
        return self.rows * self.cols - self.size

    def linear(self):
        return self.row_idx * self.cols + self.col_idx

    def mask(self):
        """Dense boolean mask of the set (desk scale only)."""
        m = np.zeros((self.rows, self.cols), dtype=bool)
        m[self.row_idx, self.col_idx] = True
        return m

    def extract(self, W):
        """Values of ``W`` on the set, in index order."""
        W = np.asarray(W)
        if W.shape != (self.rows, self.cols):
            raise ValueError("shape mismatch")
        return W[self.row_idx, self.col_idx]

    def scatter(self, values):
        """Dense matrix with ``values`` placed on the set, zeros elsewhere."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.size,):
            raise ValueError("values must align with the index set")
        W = np.zeros((self.rows, self.cols))
        W[self.row_idx, self.col_idx] = values
        return W

    def to_csr(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (self.size,):
            raise ValueError("values must align with the index set")
        return sparse.csr_matrix(
            (values, (self.row_idx, self.col_idx)), shape=(self.rows, self.cols)
        )


@dataclass(frozen=True)
class TruncatedSVD:
    """Top-k singular triplet: ``U`` (m x k), ``s`` descending, ``V`` (n x k)."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    @property
    def k(self):
        return int(self.s.size)

    def compose(self):
        """Materialize ``U @ diag(s) @ V.T``."""
        if self.k == 0:
            return np.zeros((self.U.shape[0], self.V.shape[0]))
        return (self.U * self.s) @ self.V.T


@dataclass(frozen=True)
class MatrixNorms:
    nuclear: float
    l1: float
    frobenius: float
    spectral: float
    max_abs: float


@dataclass
class SparsePlusLowRank:
    """Implicit ``S + L @ R.T`` operator for matrix-free partial SVDs.

    ``S`` is any scipy sparse matrix; ``L``/``R`` are tall factors (may have
    zero columns). Only matvec products are formed in the solver hot path.
    """

    S: sparse.spmatrix
    L: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        m, n = self.S.shape
        if self.L.shape[0] != m or self.R.shape[0] != n or self.L.shape[1] != self.R.shape[1]:
            raise ValueError("factor shapes inconsistent with sparse part")

    @property
    def shape(self):
        return self.S.shape

    def matvec(self, x):
        return self.S @ x + self.L @ (self.R.T @ x)

    def rmatvec(self, y):
        return self.S.T @ y + self.R @ (self.L.T @ y)

    def as_linear_operator(self):
        return LinearOperator(self.shape, matvec=self.matvec, rmatvec=self.rmatvec,
                              dtype=np.float64)

    def to_dense(self):
        return np.asarray(self.S.todense()) + self.L @ self.R.T


def shrink(W, eps):
    """Entrywise soft thresholding: the proximal map of ``eps * |.|_1``.

    Maps w to w - eps for w > eps, w + eps for w < -eps and 0 otherwise.
    Accepts scalars or arrays; ``eps`` must be nonnegative.
    """
    if eps < 0:
        raise ValueError("shrink threshold must be nonnegative")
    W = np.asarray(W, dtype=np.float64)
    return np.sign(W) * np.maximum(np.abs(W) - eps, 0.0)


def _full_svd(W, k):
    U, s, Vt = np.linalg.svd(W, full_matrices=False)
    return TruncatedSVD(U[:, :k].copy(), s[:k].copy(), Vt[:k].T.copy())


def _lanczos_svd(op, k):
    d = min(op.shape)
    v0 = np.full(d, 1.0 / np.sqrt(d))
    try:
        U, s, Vt = svds(op, k=k, v0=v0)
    except ArpackNoConvergence as exc:
        raise SvdConvergenceError(
            f"Lanczos SVD did not converge for k={k}", iterations=len(exc.eigenvalues)
        ) from exc
    except ArpackError as exc:
        raise SvdConvergenceError(f"Lanczos SVD failed: {exc}") from exc
    order = np.argsort(-s)
    return TruncatedSVD(U[:, order], s[order], Vt[order].T)


def truncated_svd(W, k, method="auto"):
    """Top-``k`` singular triplets of a dense matrix or SparsePlusLowRank operator.

    ``method`` is one of ``auto`` (Lanczos with a full-SVD fallback once k
    exceeds a :data:`_FULL_SVD_FRACTION` share of the small dimension),
    ``lanczos`` or ``full``. Dense full decomposition requires a
    materializable input.

    Raises ``ValueError`` for k out of range and :class:`SvdConvergenceError`
    if the iterative backend fails where no fallback is allowed.
    """
    is_op = isinstance(W, SparsePlusLowRank)
    if not is_op:
        W = as_matrix(W)
    m, n = W.shape
    d = min(m, n)
    if not (1 <= k <= d):
        raise ValueError(f"k must be in [1, {d}], got {k}")

    if method not in ("auto", "lanczos", "full"):
        raise ValueError(f"unknown SVD method {method!r}")
    if method == "full":
        return _full_svd(W.to_dense() if is_op else W, k)
    if method == "lanczos":
        if k >= d:
            raise ValueError("Lanczos backend requires k < min(m, n)")
        return _lanczos_svd(W.as_linear_operator() if is_op else W, k)

    # auto: pick the cheaper exact route, falling back to dense on trouble
    want_full = k >= d or k > _FULL_SVD_FRACTION * d or (not is_op and d <= _FULL_SVD_DIM)
    if want_full:
        return _full_svd(W.to_dense() if is_op else W, k)
    try:
        return _lanczos_svd(W.as_linear_operator() if is_op else W, k)
    except SvdConvergenceError:
        return _full_svd(W.to_dense() if is_op else W, k)


def svt_triplets(W, eps, sv_hint, method="auto"):
    """Singular value thresholding, returned in factored form.

    Computes the top ``sv_hint`` triplets of ``W``, keeps those with singular
    value strictly above ``eps`` and subtracts ``eps`` from them. When every
    computed value clears the threshold the computation is repeated with a
    doubled hint (capped at min(m, n)) so nothing above ``eps`` is missed.

    Returns ``(tsvd, svp, s_raw)`` where ``tsvd`` holds the ``svp`` thresholded
    triplets and ``s_raw`` the raw singular values from the final pass.
    """
    if eps < 0:
        raise ValueError("svt threshold must be nonnegative")
    d = min(W.shape)
    sv = int(min(max(sv_hint, 1), d))
    while True:
        t = truncated_svd(W, sv, method=method)
        svp = int((t.s > eps).sum())
        if svp < sv or sv == d:
            break
        sv = min(2 * sv, d)
    kept = TruncatedSVD(t.U[:, :svp].copy(), t.s[:svp] - eps, t.V[:, :svp].copy())
    return kept, svp, t.s


def svt(W, eps, sv_hint, method="auto"):
    """Proximal map of ``eps * ||.||_*`` on dense ``W``.

    Returns ``(A, svp)`` with ``A`` dense and ``svp`` the count of singular
    values strictly above ``eps``; see :func:`svt_triplets` for the hint
    re-expansion contract.
    """
    W = as_matrix(W)
    if not (1 <= sv_hint <= min(W.shape)):
        raise ValueError("sv_hint out of range")
    kept, svp, _ = svt_triplets(W, eps, sv_hint, method=method)
    if svp == 0:
        return np.zeros_like(W), 0
    return kept.compose(), svp


def nuclear_norm(W):
    return float(np.linalg.svd(as_matrix(W), compute_uv=False).sum())


def spectral_norm(W):
    W = as_matrix(W)
    if not W.any():
        return 0.0
    return float(np.linalg.svd(W, compute_uv=False)[0])


def norms(W):
    """All norms used by the solvers, computed from one full SVD."""
    W = as_matrix(W)
    if W.size == 0 or not W.any():
        return MatrixNorms(0.0, 0.0, 0.0, 0.0, 0.0)
    s = np.linalg.svd(W, compute_uv=False)
    return MatrixNorms(
        nuclear=float(s.sum()),
        l1=float(np.abs(W).sum()),
        frobenius=float(np.linalg.norm(W)),
        spectral=float(s[0]),
        max_abs=float(np.abs(W).max()),
    )


def dual_gauge(Y, lam):
    """max(||Y||_2, ||Y||_inf / lam): the gauge whose unit ball is the dual
    feasible set; used to scale multiplier initializations."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    Y = as_matrix(Y)
    if not Y.any():
        return 0.0
    return float(max(np.linalg.svd(Y, compute_uv=False)[0], np.abs(Y).max() / lam))


def project_omega(W, omega, keep="inside"):
    """Projection onto an observed set: zero out entries outside (``inside``)
    or inside (``outside``) the set. The two projections sum to ``W``."""
    W = as_matrix(W)
    if (W.shape[0], W.shape[1]) != (omega.rows, omega.cols):
        raise ValueError("matrix shape does not match the observed set")
    if keep == "inside":
        out = np.zeros_like(W)
        out[omega.row_idx, omega.col_idx] = W[omega.row_idx, omega.col_idx]
        return out
    if keep == "outside":
        out = W.copy()
        out[omega.row_idx, omega.col_idx] = 0.0
        return out
    raise ValueError(f"keep must be 'inside' or 'outside', got {keep!r}")
