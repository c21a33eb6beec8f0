"""Fitting and evaluating the Christoffel function of a moment matrix.

Given a positive definite moment matrix M_d with Cholesky factor L
(M_d = L L^T), the reproducing kernel is kappa(x, y) = v_d(x)^T M_d^{-1}
v_d(y) and the Christoffel function is Lambda(x) = 1 / kappa(x, x).
Evaluation goes through triangular solves against L, never an explicit
inverse.  The rows of D = L^{-1} are the coefficients of the glex-ordered
orthonormal polynomials (D^T D = M_d^{-1}, positive diagonal).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular

from .basis import MonomialBasis, Multidegree, enumerate_basis, eval_monomial_matrix
from .moments import AffineMap, MomentMatrix

RIDGE_BASE_FACTOR = 1e-12
RIDGE_MAX_FACTOR = 1.0
EVAL_CHUNK = 65536


class SingularMomentMatrixError(ValueError):
    """Cholesky failed: the moment matrix is numerically singular."""


class RidgeEscalationError(ValueError):
    """Auto ridge grew past its cap without producing a factorizable matrix."""


def _try_cholesky(values: np.ndarray, eps: float) -> np.ndarray | None:
    A = values if eps == 0.0 else values + eps * np.eye(values.shape[0])
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        return None


@dataclass(frozen=True, eq=False)
class ChristoffelModel:
    """Fitted factorization of a moment matrix, ready for evaluation.

    cholesky is the lower-triangular L with M_d = L L^T (of the ridged
    matrix when ridge > 0).  Points are pushed through the stored
    standardization map before basis evaluation; affine invariance makes
    the reported values refer to the original coordinates.
    """

    basis: MonomialBasis
    cholesky: np.ndarray
    standardization: AffineMap | None
    ridge: float
    source: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    @property
    def degree(self) -> int:
        return self.basis.degree

    @property
    def size(self) -> int:
        return self.basis.size

    @property
    def orthonormal_coeffs(self) -> np.ndarray:
        """Lower-triangular D = L^{-1}; row alpha holds the coefficients of P_alpha."""
        return solve_triangular(self.cholesky, np.eye(self.size), lower=True)

    def _vectors(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.standardization is not None:
            pts = self.standardization.apply(pts)
        return eval_monomial_matrix(self.basis, pts)

    def kernel_diag_batch(self, points, parallel: bool = False) -> np.ndarray:
        """kappa(x_i, x_i) for each row of `points`.

        The parallel flag is accepted for interface stability; evaluation is
        already vectorized and deterministic by node index.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[0] == 0:
            return np.zeros(0)
        out = np.empty(pts.shape[0])
        for start in range(0, pts.shape[0], EVAL_CHUNK):
            V = self._vectors(pts[start : start + EVAL_CHUNK])
            Z = solve_triangular(self.cholesky, V.T, lower=True)
            out[start : start + EVAL_CHUNK] = np.einsum("ij,ij->j", Z, Z)
        return out

    def kappa(self, x, y=None) -> float:
        """Reproducing-kernel value kappa(x, y); kappa(x, x) when y is omitted."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        zx = solve_triangular(self.cholesky, self._vectors(x[None, :]).T, lower=True)
        if y is None:
            return float(np.einsum("ij,ij->j", zx, zx)[0])
        y = np.atleast_1d(np.asarray(y, dtype=float))
        zy = solve_triangular(self.cholesky, self._vectors(y[None, :]).T, lower=True)
        return float(np.einsum("ij,ij->j", zx, zy)[0])

    def lambda_(self, x) -> float:
        """Christoffel function value 1 / kappa(x, x); in (0, 1] for probability moments."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(1.0 / self.kernel_diag_batch(x[None, :])[0])

    def lambda_batch(self, points, parallel: bool = False) -> np.ndarray:
        """Elementwise lambda_ over rows of `points`; same code path as the scalar."""
        return 1.0 / self.kernel_diag_batch(points, parallel=parallel)

    def scaled_lambda_batch(self, points) -> np.ndarray:
        """s(d) * Lambda(x) for each row, the quantity compared to thresholds."""
        return self.size * self.lambda_batch(points)

    def optimal_polynomial(self, xi) -> np.ndarray:
        """Coefficients (standardized coordinates) of the minimizer of the
        squared-mean objective among polynomials with P(xi) = 1.

        The optimizer is Lambda(xi) * kappa(., xi); its coefficient vector is
        M_d^{-1} v_d(xi) / kappa(xi, xi), computed by two triangular solves.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        v = self._vectors(xi[None, :])[0]
        z = solve_triangular(self.cholesky, v, lower=True)
        w = solve_triangular(self.cholesky, z, lower=True, trans="T")
        return w / float(z @ z)

    def orthonormal_polynomial(self, alpha) -> np.ndarray:
        """Coefficient row of P_alpha: orthonormal, positive leading coefficient,
        supported on monomials glex-below alpha."""
        idx = self.basis.index_of(alpha)
        e = np.zeros(self.size)
        e[idx] = 1.0
        row = solve_triangular(self.cholesky, e, lower=True, trans="T")
        row[idx + 1 :] = 0.0
        return row

    def to_dict(self) -> dict:
        tril = np.tril_indices(self.size)
        return {
            "format": "christoffel-model",
            "version": 1,
            "dimension": self.dimension,
            "degree": self.degree,
            "size": self.size,
            "ridge": self.ridge,
            "standardization": (
                self.standardization.to_dict() if self.standardization is not None else None
            ),
            "cholesky_packed": self.cholesky[tril].tolist(),
            "source": self.source,
        }

    def to_json(self, path=None) -> str:
        doc = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(doc + "\n")
        return doc

    @classmethod
    def from_dict(cls, data: dict) -> "ChristoffelModel":
        if data.get("format") != "christoffel-model":
            raise ValueError("not a christoffel-model document")
        p, d, s = data["dimension"], data["degree"], data["size"]
        basis = enumerate_basis(p, d, max_size=max(s, 1))
        L = np.zeros((s, s))
        L[np.tril_indices(s)] = np.asarray(data["cholesky_packed"], dtype=float)
        amap = data.get("standardization")
        return cls(
            basis=basis,
            cholesky=L,
            standardization=AffineMap.from_dict(amap) if amap is not None else None,
            ridge=float(data.get("ridge", 0.0)),
            source=data.get("source", {}),
        )

    @classmethod
    def from_json(cls, text_or_path) -> "ChristoffelModel":
        text = str(text_or_path)
        if not text.lstrip().startswith("{"):
            text = Path(text_or_path).read_text()
        return cls.from_dict(json.loads(text))


def fit(M: MomentMatrix, ridge: float | str = "auto") -> ChristoffelModel:
    """Factor a moment matrix into a ChristoffelModel.

    ridge policy:
      "none"   require the matrix to be numerically positive definite;
               raises SingularMomentMatrixError otherwise.
      float    add exactly ridge * I before factoring.
      "auto"   try without regularization first; on failure add eps * I with
               eps starting at 1e-12 * trace(M) / s(d), escalating tenfold
               until the factorization succeeds.  The final eps is recorded
               on the model.
    """
    values = M.values
    s = M.size
    if isinstance(ridge, str):
        if ridge not in ("none", "auto"):
            raise ValueError(f"unknown ridge policy {ridge!r}")
    elif ridge < 0:
        raise ValueError("fixed ridge must be >= 0")

    if ridge == "none" or (not isinstance(ridge, str) and ridge == 0):
        L = _try_cholesky(values, 0.0)
        if L is None:
            raise SingularMomentMatrixError(
                f"moment matrix of size {s} is numerically singular; "
                "more samples than s(d) are needed (or the support is degenerate); "
                "use ridge='auto' to regularize"
            )
        applied = 0.0
    elif not isinstance(ridge, str):
        L = _try_cholesky(values, float(ridge))
        if L is None:
            raise SingularMomentMatrixError(
                f"moment matrix stayed singular under fixed ridge {ridge:g}"
            )
        applied = float(ridge)
    else:
        L = _try_cholesky(values, 0.0)
        applied = 0.0
        if L is None:
            scale = np.trace(values) / s
            eps = RIDGE_BASE_FACTOR * scale
            cap = RIDGE_MAX_FACTOR * scale
            while L is None:
                if eps > cap:
                    raise RidgeEscalationError(
                        f"auto ridge exceeded cap {cap:g} without a successful factorization"
                    )
                L = _try_cholesky(values, eps)
                if L is not None:
                    applied = eps
                    break
                eps *= 10.0
    return ChristoffelModel(
        basis=M.basis,
        cholesky=L,
        standardization=M.standardization,
        ridge=applied,
        source=dict(M.source),
    )


def lambda_qp(model_or_M: ChristoffelModel | MomentMatrix, x) -> float:
    """Christoffel value through the constrained quadratic program.

    Solves min_c c^T M c subject to c^T v_d(x) = 1 by a direct solve of the
    stationarity system, an evaluation route independent of the Cholesky
    kernel path.  For a fitted model the (possibly ridged) matrix is
    reconstituted from its factor so both routes describe the same measure.
    """
    if isinstance(model_or_M, ChristoffelModel):
        model = model_or_M
        Mv = model.cholesky @ model.cholesky.T
        basis, amap = model.basis, model.standardization
    else:
        Mv = model_or_M.values
        basis, amap = model_or_M.basis, model_or_M.standardization
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pts = x[None, :]
    if amap is not None:
        pts = amap.apply(pts)
    v = eval_monomial_matrix(basis, pts)[0]
    s = basis.size
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = 2.0 * Mv
    K[:s, s] = -v
    K[s, :s] = v
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        raise SingularMomentMatrixError("stationarity system is singular") from None
    c = sol[:s]
    return float(c @ Mv @ c)


def qp_coefficients(model_or_M: ChristoffelModel | MomentMatrix, x) -> np.ndarray:
    """Optimal coefficient vector of the quadratic program behind lambda_qp."""
    if isinstance(model_or_M, ChristoffelModel):
        Mv = model_or_M.cholesky @ model_or_M.cholesky.T
        basis, amap = model_or_M.basis, model_or_M.standardization
    else:
        Mv = model_or_M.values
        basis, amap = model_or_M.basis, model_or_M.standardization
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pts = x[None, :]
    if amap is not None:
        pts = amap.apply(pts)
    v = eval_monomial_matrix(basis, pts)[0]
    s = basis.size
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = 2.0 * Mv
    K[:s, s] = -v
    K[s, :s] = v
    rhs = np.zeros(s + 1)
    rhs[s] = 1.0
    return np.linalg.solve(K, rhs)[:s]


def legendre_kernel_diag(d: int, x, interval=(-1.0, 1.0)) -> np.ndarray:
    """kappa(x, x) of the uniform probability measure on an interval.

    Uses the classical three-term recurrence: for the uniform probability
    measure on [-1, 1] the orthonormal polynomials are sqrt(2k+1) P_k, so
    kappa_d(x, x) = sum_{k<=d} (2k+1) P_k(x)^2.  The recurrence is stable
    well past degree 100, unlike the monomial-basis Cholesky route, and the
    general interval reduces to [-1, 1] by the invariance of the result
    under affine maps.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        raise ValueError("interval needs lo < hi")
    u = (2.0 * np.asarray(x, dtype=float) - (lo + hi)) / (hi - lo)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    prev = np.ones_like(u)
    total = prev * prev
    if d >= 1:
        cur = u.copy()
        for k in range(1, d + 1):
            total = total + (2 * k + 1) * cur * cur
            if k < d:
                prev, cur = cur, ((2 * k + 1) * u * cur - k * prev) / (k + 1)
    return total[0] if scalar else total


def legendre_lambda(d: int, x, interval=(-1.0, 1.0)) -> np.ndarray:
    """Christoffel function of the uniform interval measure via the recurrence."""
    return 1.0 / legendre_kernel_diag(d, x, interval=interval)


class LegendreIntervalModel:
    """Exact uniform-interval reference exposing the batch evaluation API.

    Stands in for a fitted model wherever only lambda values are consumed
    (support grids, threshold checks); usable at degrees far beyond what the
    monomial Cholesky route survives.
    """

    def __init__(self, degree: int, interval=(-1.0, 1.0)):
        self.degree = int(degree)
        self.interval = (float(interval[0]), float(interval[1]))
        self.dimension = 1
        self.size = self.degree + 1
        self.ridge = 0.0

    def lambda_batch(self, points, parallel: bool = False) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return legendre_lambda(self.degree, pts[:, 0], interval=self.interval)

    def lambda_(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(self.lambda_batch(x[None, :])[0])

    def scaled_lambda_batch(self, points) -> np.ndarray:
        return self.size * self.lambda_batch(points)
