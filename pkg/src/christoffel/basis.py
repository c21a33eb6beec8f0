"""Multivariate monomial basis of bounded degree in graded lexicographic order.

The basis for dimension p and degree d holds all exponent tuples alpha with
deg(alpha) <= d, ordered first by total degree and, within a degree, by
lexicographic comparison with coordinate 1 most significant.  For p = 2,
d = 3 the order is 1, X1, X2, X1^2, X1*X2, X2^2, X1^3, X1^2*X2, X1*X2^2, X2^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import total_ordering
from math import comb

import numpy as np

DEFAULT_BASIS_CAP = 20000


class BasisTooLargeError(ValueError):
    """The requested basis size C(p+d, d) exceeds the configured cap."""


def basis_size(p: int, d: int) -> int:
    """Number of p-variate monomials of degree <= d, C(p+d, d)."""
    return comb(p + d, d)


@total_ordering
@dataclass(frozen=True)
class Multidegree:
    """Exponent tuple of one monomial; ordered by degree, then lexicographically."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        if len(self.exponents) == 0:
            raise ValueError("multidegree needs at least one coordinate")
        if any(e < 0 for e in self.exponents):
            raise ValueError(f"negative exponent in {self.exponents}")

    @property
    def dimension(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def __add__(self, other: "Multidegree") -> "Multidegree":
        if self.dimension != other.dimension:
            raise ValueError("dimension mismatch")
        return Multidegree(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __lt__(self, other: "Multidegree") -> bool:
        return glex_compare(self, other) < 0


def glex_compare(a: Multidegree | tuple[int, ...], b: Multidegree | tuple[int, ...]) -> int:
    """Graded lexicographic comparison; returns -1, 0 or +1.

    Lower total degree comes first.  Within a degree, the monomial whose
    exponent tuple is lexicographically larger comes first (X1^2 before
    X1*X2 before X2^2), so coordinate 1 is the most significant.
    """
    ea = a.exponents if isinstance(a, Multidegree) else tuple(a)
    eb = b.exponents if isinstance(b, Multidegree) else tuple(b)
    if len(ea) != len(eb):
        raise ValueError(f"dimension mismatch: {len(ea)} vs {len(eb)}")
    da, db = sum(ea), sum(eb)
    if da != db:
        return -1 if da < db else 1
    if ea == eb:
        return 0
    return -1 if ea > eb else 1


def _degree_block(p: int, total: int):
    """Exponent tuples of exact degree `total`, glex-ordered within the block."""
    if p == 1:
        yield (total,)
        return
    for lead in range(total, -1, -1):
        for rest in _degree_block(p - 1, total - lead):
            yield (lead,) + rest


@dataclass(frozen=True, eq=False)
class MonomialBasis:
    """All monomials of degree <= d in p variables, glex-ordered.

    `exponents` is an integer array of shape (size, p); row j holds the
    exponent tuple of the j-th basis monomial.  The first row is zero
    (the constant monomial).
    """

    dimension: int
    degree: int
    exponents: np.ndarray
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.exponents.shape[0]

    def multidegrees(self) -> list[Multidegree]:
        return [Multidegree(tuple(int(e) for e in row)) for row in self.exponents]

    def index_of(self, alpha: Multidegree | tuple[int, ...]) -> int:
        """Position of the exponent tuple alpha in the basis."""
        key = alpha.exponents if isinstance(alpha, Multidegree) else tuple(int(a) for a in alpha)
        if len(key) != self.dimension:
            raise ValueError("dimension mismatch")
        if not self._index:
            for j, row in enumerate(self.exponents):
                self._index[tuple(int(e) for e in row)] = j
        try:
            return self._index[key]
        except KeyError:
            raise ValueError(f"multidegree {key} not in basis of degree {self.degree}") from None


def enumerate_basis(p: int, d: int, max_size: int = DEFAULT_BASIS_CAP) -> MonomialBasis:
    """Build the glex-ordered monomial basis of degree <= d in p variables.

    Raises BasisTooLargeError when C(p+d, d) exceeds `max_size`; the cap is
    a guard against accidental huge bases, not a hard limit.
    """
    if p < 1:
        raise ValueError(f"dimension must be >= 1, got {p}")
    if d < 0:
        raise ValueError(f"degree must be >= 0, got {d}")
    size = basis_size(p, d)
    if size > max_size:
        raise BasisTooLargeError(
            f"basis size C({p}+{d},{d}) = {size} exceeds cap {max_size}; "
            "raise max_size to opt in"
        )
    rows = []
    for total in range(d + 1):
        rows.extend(_degree_block(p, total))
    exponents = np.array(rows, dtype=np.int64)
    exponents.flags.writeable = False
    return MonomialBasis(dimension=p, degree=d, exponents=exponents)


def eval_monomial_matrix(basis: MonomialBasis, points: np.ndarray) -> np.ndarray:
    """Evaluate all basis monomials at each row of `points`.

    Args:
        basis: glex basis of degree d in p variables.
        points: array of shape (n, p).

    Returns:
        Array of shape (n, size) with entry (i, j) = prod_k points[i,k]**alpha_j[k].
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != basis.dimension:
        raise ValueError(
            f"points must have shape (n, {basis.dimension}), got {pts.shape}"
        )
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite coordinate in evaluation points")
    n, p = pts.shape
    d = basis.degree
    # power table pw[i, k, c] = points[i, c] ** k, filled by repeated multiply
    pw = np.ones((n, d + 1, p))
    for k in range(1, d + 1):
        pw[:, k, :] = pw[:, k - 1, :] * pts
    cols = np.arange(p)
    return np.prod(pw[:, basis.exponents, cols], axis=2)


def eval_monomial_vector(basis: MonomialBasis, x) -> np.ndarray:
    """Monomial vector v_d(x) of length basis.size for a single point x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != basis.dimension:
        raise ValueError(f"point must have dimension {basis.dimension}, got shape {x.shape}")
    return eval_monomial_matrix(basis, x[None, :])[0]
