"""Finite-dimensional commutative unital algebras given by structure constants.

Coefficients are either rationals or elements of a :class:`SeriesRing`;
the latter describe point-dependent products ``e_i o e_j = sum_k C_ij^k(t) e_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .report import Report
from .ringcore import Series, SeriesRing, Subspace, matvec
from .ringcore.linalg import unit_vector
from .ringcore.scalars import parse_rational, rational_to_str

SparseC = Dict[Tuple[int, int], Dict[int, object]]


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class FDAlgebra:
    """Structure constants ``C[(i, j)][k]``; missing entries are zero."""

    dim: int
    labels: Tuple[str, ...]
    C: SparseC
    unit: Tuple
    ring: Optional[SeriesRing] = None

    def __post_init__(self):
        if len(self.labels) != self.dim:
            raise AlgebraError("label count does not match the dimension")
        if len(self.unit) != self.dim:
            raise AlgebraError("unit vector has the wrong length")
        clean: SparseC = {}
        for (i, j), col in self.C.items():
            if not (0 <= i < self.dim and 0 <= j < self.dim):
                raise AlgebraError(f"structure constant index ({i},{j}) out of range")
            entries = {}
            for k, v in col.items():
                if not 0 <= k < self.dim:
                    raise AlgebraError(f"structure constant target {k} out of range")
                if isinstance(v, Series) and (self.ring is None or v.ring != self.ring):
                    raise AlgebraError("series coefficient outside the declared ring")
                if v:
                    entries[k] = v
            if entries:
                clean[(i, j)] = entries
        object.__setattr__(self, "C", clean)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "unit", tuple(self.unit))

    # ------------------------------------------------------------------
    def zero_vec(self) -> Tuple:
        return tuple(Fraction(0) for _ in range(self.dim))

    def basis_vec(self, i: int) -> Tuple:
        return unit_vector(self.dim, i)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown basis label {label!r}") from None

    def product_basis(self, i: int, j: int) -> Tuple:
        out = [Fraction(0)] * self.dim
        for k, v in self.C.get((i, j), {}).items():
            out[k] = v
        return tuple(out)

    def coeff(self, i: int, j: int, k: int):
        return self.C.get((i, j), {}).get(k, Fraction(0))

    def is_constant(self) -> bool:
        return all(not isinstance(v, Series) or v.is_constant()
                   for col in self.C.values() for v in col.values())

    def mult_matrix(self, x: Sequence) -> List[List]:
        """Matrix of ``y -> x o y`` acting on coordinate columns."""
        cols = [multiply(self, x, self.basis_vec(j)) for j in range(self.dim)]
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def to_json(self) -> dict:
        from .serialize import value_to_json
        entries = []
        for (i, j), col in sorted(self.C.items()):
            for k, v in sorted(col.items()):
                entries.append({"i": i, "j": j, "k": k, "value": value_to_json(v)})
        data = {
            "dim": self.dim,
            "basis": list(self.labels),
            "unit": [value_to_json(u) for u in self.unit],
            "C": entries,
            "coeff_ring": "series" if self.ring is not None else "rational",
        }
        if self.ring is not None:
            data["ring"] = self.ring.to_json()
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "FDAlgebra":
        from .serialize import value_from_json
        dim = data["dim"]
        if not isinstance(dim, int) or dim < 0:
            raise AlgebraError("dim must be a nonnegative integer")
        ring = None
        if data.get("coeff_ring", "rational") == "series":
            ring = SeriesRing.from_json(data["ring"])
        elif data.get("coeff_ring", "rational") != "rational":
            raise AlgebraError(f"unknown coeff_ring {data.get('coeff_ring')!r}")
        C: SparseC = {}
        for e in data.get("C", []):
            v = value_from_json(e["value"], ring)
            C.setdefault((int(e["i"]), int(e["j"])), {})
            col = C[(int(e["i"]), int(e["j"]))]
            col[int(e["k"])] = col.get(int(e["k"]), 0) + v
        labels = tuple(data.get("basis") or [f"e{i}" for i in range(dim)])
        unit = tuple(parse_rational(u) for u in data["unit"])
        return cls(dim, labels, C, unit, ring)


def algebra_from_rule(labels: Sequence[str], rule: Callable[[int, int], Mapping[int, object]],
                      unit_index: int = 0, ring: Optional[SeriesRing] = None) -> FDAlgebra:
    """Build an algebra from a function giving ``e_i o e_j`` as ``{k: coef}``."""
    n = len(labels)
    C: SparseC = {}
    for i in range(n):
        for j in range(n):
            col = dict(rule(i, j))
            if col:
                C[(i, j)] = col
    return FDAlgebra(n, tuple(labels), C, unit_vector(n, unit_index), ring)


def _zero_like(a: FDAlgebra):
    return Fraction(0)


def multiply(a: FDAlgebra, x: Sequence, y: Sequence) -> Tuple:
    """Bilinear extension of the structure constants."""
    if len(x) != a.dim or len(y) != a.dim:
        raise AlgebraError(f"vectors must have length {a.dim}")
    out = [Fraction(0)] * a.dim
    nzx = [(i, xi) for i, xi in enumerate(x) if xi]
    nzy = [(j, yj) for j, yj in enumerate(y) if yj]
    for i, xi in nzx:
        for j, yj in nzy:
            col = a.C.get((i, j))
            if not col:
                continue
            f = xi * yj
            for k, c in col.items():
                out[k] = out[k] + f * c
    return tuple(out)


def _vec_eq(u: Sequence, v: Sequence) -> bool:
    return all(not (x - y) for x, y in zip(u, v))


def algebra_check(a: FDAlgebra) -> Report:
    """Commutativity, associativity on all basis triples, and the unit law."""
    rep = Report()
    n = a.dim
    wit = None
    for i in range(n):
        for j in range(i + 1, n):
            if not _vec_eq(a.product_basis(i, j), a.product_basis(j, i)):
                wit = {"i": i, "j": j}
                break
        if wit:
            break
    rep.add("commutativity", wit is None, wit)

    wit = None
    prods = {(i, j): a.product_basis(i, j) for i in range(n) for j in range(n)}
    for i in range(n):
        for j in range(n):
            for k in range(n):
                lhs = multiply(a, prods[(i, j)], a.basis_vec(k))
                rhs = multiply(a, a.basis_vec(i), prods[(j, k)])
                if not _vec_eq(lhs, rhs):
                    wit = {"i": i, "j": j, "k": k}
                    break
            if wit:
                break
        if wit:
            break
    rep.add("associativity", wit is None, wit)

    wit = None
    for i in range(n):
        e = a.basis_vec(i)
        if not (_vec_eq(multiply(a, a.unit, e), e) and _vec_eq(multiply(a, e, a.unit), e)):
            wit = {"i": i}
            break
    rep.add("unit", wit is None, wit)
    return rep


def _require_constant(a: FDAlgebra, what: str) -> None:
    if not a.is_constant():
        raise AlgebraError(f"{what} needs constant structure constants")


def constant_part(a: FDAlgebra) -> FDAlgebra:
    """The same algebra with constant Series coefficients turned into rationals."""
    C: SparseC = {}
    for key, col in a.C.items():
        C[key] = {k: (v.constant_term() if isinstance(v, Series) else v) for k, v in col.items()}
    return FDAlgebra(a.dim, a.labels, C, a.unit, None)


def is_ideal(a: FDAlgebra, s: Subspace) -> Optional[dict]:
    """None if ``s`` is closed under multiplication by every basis element,
    otherwise a witness."""
    for v in s.basis:
        for i in range(a.dim):
            w = multiply(a, a.basis_vec(i), v)
            if any(isinstance(x, Series) for x in w):
                raise AlgebraError("ideal tests need constant structure constants")
            if not s.contains(w):
                return {"basis": i, "vector": [rational_to_str(x) for x in v]}
    return None


def ideal_generated(a: FDAlgebra, gens: Sequence[Sequence]) -> Subspace:
    """Smallest multiplication-closed subspace containing ``gens``."""
    _require_constant(a, "ideal_generated")
    a = constant_part(a)
    cur = Subspace.from_vectors(a.dim, gens)
    while True:
        new = list(cur.basis)
        for v in cur.basis:
            for i in range(a.dim):
                new.append(multiply(a, a.basis_vec(i), v))
        nxt = Subspace.from_vectors(a.dim, new)
        if nxt == cur:
            return cur
        cur = nxt


@dataclass(frozen=True)
class Quotient:
    algebra: FDAlgebra
    projection: List[List]  # rows: quotient coordinates; columns: original basis
    lift: List[Tuple]  # complement basis vectors in the original algebra
    ideal: Subspace


def project(ideal: Subspace, v: Sequence) -> Tuple:
    """Coordinates of the class of ``v`` in the pivot-free-column complement."""
    r = ideal.reduce(v)
    piv = set(ideal.pivots)
    return tuple(r[c] for c in range(ideal.ambient_dim) if c not in piv)


def quotient_algebra(a: FDAlgebra, ideal: Subspace) -> Quotient:
    """``A / I`` in the basis of unit vectors at the pivot-free columns of ``I``."""
    if ideal.ambient_dim != a.dim:
        raise AlgebraError("ideal lives in a different ambient space")
    if a.is_constant():
        wit = is_ideal(constant_part(a), ideal)
        if wit is not None:
            raise AlgebraError(f"subspace is not an ideal: {wit}")
    comp = ideal.complement_basis()
    free = [c for c in range(a.dim) if c not in set(ideal.pivots)]
    m = len(free)
    C: SparseC = {}
    for p, ci in enumerate(free):
        for q, cj in enumerate(free):
            img = project(ideal, a.product_basis(ci, cj))
            col = {k: v for k, v in enumerate(img) if v}
            if col:
                C[(p, q)] = col
    unit = project(ideal, a.unit)
    if any(isinstance(u, Series) for u in unit):
        raise AlgebraError("unit must be constant")
    labels = tuple(a.labels[c] for c in free)
    proj = [[Fraction(0)] * a.dim for _ in range(m)]
    for col in range(a.dim):
        img = project(ideal, unit_vector(a.dim, col))
        for row in range(m):
            proj[row][col] = img[row]
    qa = FDAlgebra(m, labels, C, unit, a.ring)
    if not a.is_constant():
        # closure cannot be tested with rational linear algebra; check the
        # algebra-map property instead, which fails when I is not an ideal.
        for i in range(a.dim):
            for v in ideal.basis:
                if any(project(ideal, multiply(a, a.basis_vec(i), v))):
                    raise AlgebraError(f"subspace is not an ideal (basis {i})")
    return Quotient(qa, proj, comp, ideal)
