"""Moment matrices from point clouds and from uniform box measures.

The moment matrix of a probability measure, indexed by the glex monomial
basis of degree <= d, has entry (alpha, beta) equal to the mixed moment of
x^(alpha+beta).  Empirical matrices average v_d(x_i) v_d(x_i)^T over the
sample; reference matrices use closed-form moments of the uniform
distribution on an axis-aligned box.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import eigvalsh

from .basis import DEFAULT_BASIS_CAP, MonomialBasis, enumerate_basis, eval_monomial_matrix

ACCUMULATION_CHUNK = 4096


@dataclass(frozen=True)
class AffineMap:
    """Invertible affine change of coordinates x -> matrix @ (x - shift)."""

    shift: np.ndarray
    matrix: np.ndarray

    def apply(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return (pts - self.shift) @ self.matrix.T

    def to_dict(self) -> dict:
        return {"shift": self.shift.tolist(), "matrix": self.matrix.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "AffineMap":
        return cls(
            shift=np.asarray(data["shift"], dtype=float),
            matrix=np.asarray(data["matrix"], dtype=float),
        )

    @classmethod
    def standardizing(cls, points: np.ndarray) -> "AffineMap":
        """Map whose image of the data bounding box spans [-1, 1] per axis.

        Degenerate axes (constant coordinate) keep unit scale so the map
        stays invertible.
        """
        pts = np.asarray(points, dtype=float)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        center = 0.5 * (lo + hi)
        halfwidth = 0.5 * (hi - lo)
        halfwidth[halfwidth == 0.0] = 1.0
        return cls(shift=center, matrix=np.diag(1.0 / halfwidth))

    @classmethod
    def box_to_unit(cls, box) -> "AffineMap":
        """Map sending the axis-aligned box onto [-1, 1]^p."""
        box = np.asarray(box, dtype=float)
        center = 0.5 * (box[:, 0] + box[:, 1])
        halfwidth = 0.5 * (box[:, 1] - box[:, 0])
        return cls(shift=center, matrix=np.diag(1.0 / halfwidth))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Point cloud with optional binary ground-truth labels.

    points: (n, p) array, rows are observations.
    labels: optional (n,) array; nonzero marks an outlier / positive.
    """

    points: np.ndarray
    labels: np.ndarray | None = None
    column_names: list[str] | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError(f"points must be a nonempty (n, p) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("non-finite entry in dataset points")
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise ValueError(
                    f"labels must have length {pts.shape[0]}, got shape {lab.shape}"
                )
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    """Symmetric PSD matrix of mixed moments over a glex monomial basis.

    source tags where the moments came from, e.g. {"kind": "empirical",
    "n": 500} or {"kind": "reference_box", "box": [[-1, 1]]}.  When a
    standardization map is present the entries are moments of the pushed-
    forward measure; evaluation points must go through the same map.
    """

    basis: MonomialBasis
    values: np.ndarray
    source: dict = field(default_factory=dict)
    standardization: AffineMap | None = None

    @property
    def size(self) -> int:
        return self.basis.size


def empirical_moment_matrix(
    data: Dataset,
    d: int,
    standardize: bool = True,
    max_size: int = DEFAULT_BASIS_CAP,
) -> MomentMatrix:
    """Moment matrix of the counting measure (1/n) sum_i delta_{x_i}.

    With standardize=True (default) each coordinate is affinely rescaled so
    the cloud spans [-1, 1]; the map is recorded on the result and the
    Christoffel function is unchanged by it.  Accumulation runs over fixed
    chunks in data order, so the result is reproducible for a given file.
    """
    basis = enumerate_basis(data.dimension, d, max_size=max_size)
    amap = AffineMap.standardizing(data.points) if standardize else None
    pts = amap.apply(data.points) if amap is not None else data.points
    n = data.n
    acc = np.zeros((basis.size, basis.size))
    for start in range(0, n, ACCUMULATION_CHUNK):
        chunk = eval_monomial_matrix(basis, pts[start : start + ACCUMULATION_CHUNK])
        acc += chunk.T @ chunk
    values = acc / n
    values.flags.writeable = False
    return MomentMatrix(
        basis=basis,
        values=values,
        source={"kind": "empirical", "n": n},
        standardization=amap,
    )


def _interval_moment_table(lo: float, hi: float, kmax: int) -> np.ndarray:
    """Moments E[t^k], k = 0..kmax, of the uniform distribution on [lo, hi].

    Written as E[(c + h*u)^k] with u uniform on [-1, 1], using
    E[u^j] = 0 for odd j and 1/(j+1) for even j; exact for centered boxes.
    """
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    from math import comb as _comb

    table = np.empty(kmax + 1)
    for k in range(kmax + 1):
        total = 0.0
        for j in range(0, k + 1, 2):
            total += _comb(k, j) * c ** (k - j) * h**j / (j + 1)
        table[k] = total
    return table


def reference_box_moment_matrix(
    p: int,
    d: int,
    box,
    standardize: bool = False,
    max_size: int = DEFAULT_BASIS_CAP,
) -> MomentMatrix:
    """Exact moment matrix of the uniform probability measure on a box.

    `box` is a sequence of p (lo, hi) intervals.  With standardize=True the
    matrix is built for the box mapped onto [-1, 1]^p and the map is
    recorded; this is the numerically preferable form at higher degree.
    """
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape != (p, 2):
        raise ValueError(f"box must be a (p, 2) array of intervals, got shape {box.shape}")
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("degenerate box: every axis needs lo < hi")
    basis = enumerate_basis(p, d, max_size=max_size)
    amap = AffineMap.box_to_unit(box) if standardize else None
    eff_box = np.repeat([[-1.0, 1.0]], p, axis=0) if standardize else box
    tables = [_interval_moment_table(lo, hi, 2 * d) for lo, hi in eff_box]
    E = basis.exponents
    gamma = E[:, None, :] + E[None, :, :]
    values = np.ones((basis.size, basis.size))
    for axis in range(p):
        values *= tables[axis][gamma[:, :, axis]]
    values.flags.writeable = False
    return MomentMatrix(
        basis=basis,
        values=values,
        source={"kind": "reference_box", "box": box.tolist()},
        standardization=amap,
    )


def psd_check(M: MomentMatrix) -> float:
    """Smallest eigenvalue of the moment matrix (diagnostic, never raises)."""
    return float(eigvalsh(M.values)[0])


def load_csv(path, label_column: str | int | None = None) -> Dataset:
    """Read a point cloud from CSV; rows are points, header optional.

    A header row is detected when any cell of the first row fails to parse
    as a number.  `label_column` picks the ground-truth column by name
    (requires a header) or by zero-based index; it is removed from the
    point coordinates.  Non-numeric data cells are an error.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: empty CSV")

    def _is_number(cell: str) -> bool:
        try:
            float(cell)
            return True
        except ValueError:
            return False

    header = None
    if not all(_is_number(cell) for cell in rows[0]):
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: header but no data rows")

    ncol = len(rows[0])
    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None:
                raise ValueError(f"{path}: label column {label_column!r} needs a header row")
            try:
                label_idx = header.index(label_column)
            except ValueError:
                raise ValueError(
                    f"{path}: no column named {label_column!r} in header {header}"
                ) from None
        else:
            label_idx = int(label_column)
            if not (0 <= label_idx < ncol):
                raise ValueError(f"{path}: label column index {label_idx} out of range")

    points, labels = [], []
    for i, row in enumerate(rows):
        if len(row) != ncol:
            raise ValueError(f"{path}: row {i} has {len(row)} cells, expected {ncol}")
        vals = []
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell {cell!r} at row {i}, column {j}"
                ) from None
            if j == label_idx:
                labels.append(v)
            else:
                vals.append(v)
        points.append(vals)

    names = None
    if header is not None:
        names = [h for j, h in enumerate(header) if j != label_idx]
    return Dataset(
        points=np.asarray(points, dtype=float),
        labels=np.asarray(labels) if label_idx is not None else None,
        column_names=names,
    )
