"""Exact dense linear algebra over Q or Q(i).

Matrices are plain lists of rows.  Every routine works with any field
elements supporting ``+ - * /`` and truthiness for zero tests, which covers
``Fraction`` and :class:`GaussianRational`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

Matrix = List[List]
Vector = Tuple


class ShapeError(ValueError):
    pass


def field(x):
    """Promote Python ints to Fraction so division stays exact."""
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("floating point values are not allowed")
    return x


def _copy(m) -> Matrix:
    return [[field(x) for x in row] for row in m]


def _check_rect(m: Sequence[Sequence]) -> Tuple[int, int]:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    for row in m:
        if len(row) != cols:
            raise ShapeError("ragged matrix")
    return rows, cols


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def unit_vector(n: int, i: int) -> Vector:
    return tuple(Fraction(1) if j == i else Fraction(0) for j in range(n))


def transpose(m: Sequence[Sequence]) -> Matrix:
    rows, cols = _check_rect(m)
    return [[m[i][j] for i in range(rows)] for j in range(cols)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    ar, ac = _check_rect(a)
    br, bc = _check_rect(b)
    if ac != br:
        raise ShapeError(f"cannot multiply {ar}x{ac} by {br}x{bc}")
    out = []
    for i in range(ar):
        row = []
        ai = a[i]
        for j in range(bc):
            s = Fraction(0)
            for k in range(ac):
                if ai[k]:
                    s = s + ai[k] * b[k][j]
            row.append(s)
        out.append(row)
    return out


def matvec(a: Sequence[Sequence], v: Sequence) -> Vector:
    ar, ac = _check_rect(a)
    if ac != len(v):
        raise ShapeError("matrix/vector length mismatch")
    out = []
    for i in range(ar):
        s = Fraction(0)
        for k in range(ac):
            if v[k] and a[i][k]:
                s = s + a[i][k] * v[k]
        out.append(s)
    return tuple(out)


def matpow(a: Sequence[Sequence], k: int) -> Matrix:
    n, _ = _check_rect(a)
    out = identity(n)
    for _ in range(k):
        out = matmul(out, a)
    return out


def mat_add(a, b) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(c, a) -> Matrix:
    return [[c * x for x in row] for row in a]


def dot(u: Sequence, v: Sequence):
    s = Fraction(0)
    for x, y in zip(u, v):
        if x and y:
            s = s + x * y
    return s


def bilinear(g: Sequence[Sequence], x: Sequence, y: Sequence):
    """x^T g y."""
    return dot(x, matvec(g, y))


def is_zero_matrix(m) -> bool:
    return all(not x for row in m for x in row)


def rref(m: Sequence[Sequence]) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns (leftmost pivot choice)."""
    rows, cols = _check_rect(m)
    a = _copy(m)
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        p = next((i for i in range(r, rows) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c]:
                f = a[i][c]
                ai, ar_ = a[i], a[r]
                a[i] = [x - f * y for x, y in zip(ai, ar_)]
        pivots.append(c)
        r += 1
    return a[: len(pivots)], pivots


def rank(m: Sequence[Sequence]) -> int:
    if not m:
        return 0
    return len(rref(m)[1])


def det(m: Sequence[Sequence]):
    n, cols = _check_rect(m)
    if n != cols:
        raise ShapeError("determinant of a non-square matrix")
    a = _copy(m)
    result = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if a[i][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            a[c], a[p] = a[p], a[c]
            result = -result
        piv = a[c][c]
        result = result * piv
        for i in range(c + 1, n):
            if a[i][c]:
                f = a[i][c] / piv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return result


def is_nondegenerate(g: Sequence[Sequence]) -> bool:
    """True iff the square matrix ``g`` has nonzero determinant."""
    rows, cols = _check_rect(g)
    if rows != cols:
        raise ShapeError(f"non-square matrix {rows}x{cols}")
    return bool(det(g)) if rows else True


def inverse(m: Sequence[Sequence]) -> Matrix:
    n, cols = _check_rect(m)
    if n != cols:
        raise ShapeError("inverse of a non-square matrix")
    aug = [list(m[i]) + identity(n)[i] for i in range(n)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[Vector]:
    """One solution x of a x = b (free variables set to 0), or None."""
    rows, cols = _check_rect(a)
    if len(b) != rows:
        raise ShapeError("right-hand side length mismatch")
    if rows == 0:
        return tuple(Fraction(0) for _ in range(cols))
    aug = [list(a[i]) + [field(b[i])] for i in range(rows)]
    red, piv = rref(aug)
    if piv and piv[-1] == cols:
        return None
    x = [Fraction(0)] * cols
    for row, c in zip(red, piv):
        x[c] = row[cols]
    return tuple(x)


def leading_principal_minors(m: Sequence[Sequence]) -> list:
    n, cols = _check_rect(m)
    if n != cols:
        raise ShapeError("minors of a non-square matrix")
    return [det([row[:k] for row in m[:k]]) for k in range(1, n + 1)]


def kernel_basis(m: Sequence[Sequence], cols: Optional[int] = None) -> "Subspace":
    """Null space of ``m`` as a canonical :class:`Subspace`.

    ``cols`` is needed only when ``m`` has no rows.
    """
    if not m:
        if cols is None:
            raise ShapeError("column count unknown for an empty matrix")
        return Subspace.full(cols)
    _, ncols = _check_rect(m)
    red, piv = rref(m)
    free = [c for c in range(ncols) if c not in piv]
    vecs = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, c in zip(red, piv):
            v[c] = -row[f]
        vecs.append(v)
    return Subspace.from_vectors(ncols, vecs)


class Subspace:
    """A subspace of K^n stored by its reduced row echelon basis.

    The RREF basis is unique, so equality is component-wise comparison of
    the stored rows.
    """

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim: int, basis: Sequence[Sequence], pivots: Sequence[int]):
        self.ambient_dim = ambient_dim
        self.basis = tuple(tuple(row) for row in basis)
        self.pivots = tuple(pivots)

    @classmethod
    def from_vectors(cls, ambient_dim: int, vectors: Iterable[Sequence]) -> "Subspace":
        vecs = [[field(x) for x in v] for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise ShapeError(f"vector of length {len(v)} in ambient dimension {ambient_dim}")
        vecs = [v for v in vecs if any(v)]
        if not vecs:
            return cls.zero(ambient_dim)
        red, piv = rref(vecs)
        return cls(ambient_dim, red, piv)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, [], [])

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, identity(n), range(n))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence) -> Vector:
        """Remainder of ``v`` after clearing the pivot columns of the basis."""
        out = list(v)
        for row, c in zip(self.basis, self.pivots):
            if out[c]:
                f = out[c]
                out = [x - f * y for x, y in zip(out, row)]
        return tuple(out)

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def coordinates(self, v: Sequence) -> Vector:
        """Coefficients of ``v`` in the RREF basis; raises if ``v`` is outside."""
        if not self.contains(v):
            raise ValueError("vector is not in the subspace")
        return tuple(v[c] for c in self.pivots)

    def sum(self, other: "Subspace") -> "Subspace":
        return Subspace.from_vectors(self.ambient_dim, list(self.basis) + list(other.basis))

    def intersect(self, other: "Subspace") -> "Subspace":
        n = self.ambient_dim
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(n)
        # x = sum a_i u_i = sum b_j w_j; solve for (a, -b) in the kernel.
        cols = [list(u) for u in self.basis] + [[-x for x in w] for w in other.basis]
        m = transpose(cols)
        ker = kernel_basis(m)
        vecs = []
        for coeffs in ker.basis:
            v = [Fraction(0)] * n
            for a, u in zip(coeffs[: self.dim], self.basis):
                if a:
                    v = [x + a * y for x, y in zip(v, u)]
            vecs.append(v)
        return Subspace.from_vectors(n, vecs)

    def complement_basis(self, inside: Optional["Subspace"] = None) -> List[Vector]:
        """Complement of ``self`` inside ``inside`` (default: everything).

        The rows of the echelon basis of ``inside`` whose pivots are not
        pivots of ``self`` are returned.  For the full space these are unit
        vectors in the pivot-free columns.
        """
        outer = inside if inside is not None else Subspace.full(self.ambient_dim)
        if not outer.contains_subspace(self):
            raise ValueError("subspace is not contained in the outer space")
        mine = set(self.pivots)
        return [row for row, c in zip(outer.basis, outer.pivots) if c not in mine]

    def image(self, m: Sequence[Sequence]) -> "Subspace":
        rows, _ = _check_rect(m)
        return Subspace.from_vectors(rows, [matvec(m, v) for v in self.basis])

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def image_subspace(m: Sequence[Sequence], cols: Optional[int] = None) -> Subspace:
    """Column space of ``m``."""
    rows, ncols = _check_rect(m)
    if rows == 0:
        return Subspace.zero(0)
    return Subspace.from_vectors(rows, transpose(m))


def express_in(vectors: Sequence[Sequence], v: Sequence) -> Optional[Vector]:
    """Coefficients c with sum c_i vectors_i = v, or None."""
    if not vectors:
        return () if not any(v) else None
    return solve(transpose([list(u) for u in vectors]), list(v))
