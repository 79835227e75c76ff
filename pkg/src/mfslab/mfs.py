"""Mixed Frobenius structures in flat coordinates.

A structure lives on a vector space with *base* coordinates ``x_p`` (the
series-ring variables).  Flat coordinates ``t^a`` adapted to the filtration
are related to them by a constant frame: column ``a`` of ``frame`` holds the
base components of the flat vector field ``d/dt^a``, so

    d/dt^a = sum_p frame[p][a] d/dx_p,        t = frame^-1 x.

Structure constants, the unit and the Euler field are stored in the flat
frame; their coefficients are series in the base variables.  Flat basis
vectors are ordered by filtration level, and each level carries the Gram
matrix of its graded pairing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .fdalg import FDAlgebra, SparseC, multiply
from .frobenius import FiltrationError, FrobeniusAlgebra, nilpotent_filtration
from .report import Report
from .ringcore import (
    Series,
    SeriesRing,
    Subspace,
    derive,
    inverse,
    is_nondegenerate,
    matmul,
    matvec,
    rebase,
    specialize,
)
from .ringcore.linalg import identity, transpose, unit_vector
from .ringcore.scalars import parse_rational, rational_to_str
from .serialize import value_from_json, value_to_json


class MFSError(ValueError):
    pass


# --------------------------------------------------------------- Euler field

@dataclass(frozen=True)
class EulerField:
    """E = sum_i (sum_j linear[i][j] y_j + constant[i]) d/dy_i in some linear coordinates y."""

    linear: Tuple[Tuple[Fraction, ...], ...]
    constant: Tuple[Fraction, ...]

    def __post_init__(self):
        n = len(self.constant)
        lin = tuple(tuple(Fraction(x) for x in row) for row in self.linear)
        if len(lin) != n or any(len(r) != n for r in lin):
            raise MFSError("Euler field: linear part must be square of the coordinate count")
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "constant", tuple(Fraction(x) for x in self.constant))

    @property
    def dim(self) -> int:
        return len(self.constant)

    @classmethod
    def diagonal(cls, weights: Sequence, constant: Optional[Sequence] = None) -> "EulerField":
        n = len(weights)
        lin = [[Fraction(weights[i]) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        return cls(tuple(map(tuple, lin)), tuple(constant or [0] * n))

    def component(self, i: int, coord_series: Sequence[Series]) -> Series:
        ring = coord_series[0].ring
        out = ring.const(self.constant[i])
        for j, c in enumerate(self.linear[i]):
            if c:
                out = out + coord_series[j] * c
        return out

    def transformed(self, P: Sequence[Sequence], Pinv: Sequence[Sequence]) -> "EulerField":
        """Components in coordinates y' with y = P y'."""
        lin = matmul(matmul(Pinv, [list(r) for r in self.linear]), P)
        const = matvec(Pinv, self.constant)
        return EulerField(tuple(map(tuple, lin)), tuple(const))

    def bracket_constant(self, v: Sequence) -> Tuple:
        """[E, v] for a constant vector field v, i.e. -(dE)(v)."""
        return tuple(-x for x in matvec([list(r) for r in self.linear], v))

    def to_json(self) -> dict:
        lin = [{"target": i, "source": j, "coef": rational_to_str(c)}
               for i, row in enumerate(self.linear) for j, c in enumerate(row) if c]
        const = [{"target": i, "coef": rational_to_str(c)} for i, c in enumerate(self.constant) if c]
        return {"linear": lin, "constant": const}

    @classmethod
    def from_json(cls, data: Mapping, dim: int) -> "EulerField":
        lin = [[Fraction(0)] * dim for _ in range(dim)]
        const = [Fraction(0)] * dim
        for e in data.get("linear", []):
            lin[int(e["target"])][int(e["source"])] += parse_rational(e["coef"])
        for e in data.get("constant", []):
            const[int(e["target"])] += parse_rational(e["coef"])
        return cls(tuple(map(tuple, lin)), tuple(const))


# ---------------------------------------------------------------- structures

@dataclass(frozen=True)
class FrobStructureData:
    """A Frobenius manifold chart: flat coordinates are the ring's base coordinates."""

    algebra: FDAlgebra  # series-valued structure constants in the coordinate basis
    coords: Tuple[str, ...]
    metric: Tuple[Tuple[Fraction, ...], ...]
    euler: EulerField
    D: Fraction

    @property
    def ring(self) -> SeriesRing:
        return self.algebra.ring

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def frobenius(self) -> FrobeniusAlgebra:
        return FrobeniusAlgebra(self.algebra, [list(r) for r in self.metric])


@dataclass(frozen=True)
class MFSLevel:
    k: int
    labels: Tuple[str, ...]
    eta: Tuple[Tuple[Fraction, ...], ...]


@dataclass(frozen=True)
class MFSData:
    ring: SeriesRing
    coords: Tuple[str, ...]  # base coordinate names, one per base direction
    frame: Tuple[Tuple[Fraction, ...], ...]  # columns: flat vectors in the base basis
    levels: Tuple[MFSLevel, ...]  # increasing k; flat basis is their concatenation
    C: SparseC  # flat indices
    unit: Tuple[Fraction, ...]  # flat components
    euler: EulerField  # flat components
    D: Fraction
    _cache: Dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def order(self) -> int:
        return self.ring.order

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(l for lv in self.levels for l in lv.labels)

    @property
    def level_of(self) -> Tuple[int, ...]:
        return tuple(lv.k for lv in self.levels for _ in lv.labels)

    def indices(self, k: int) -> List[int]:
        return [i for i, l in enumerate(self.level_of) if l == k]

    def level(self, k: int) -> MFSLevel:
        for lv in self.levels:
            if lv.k == k:
                return lv
        raise MFSError(f"no level {k}")

    def c(self, i: int, j: int, m: int):
        return self.C.get((i, j), {}).get(m, Fraction(0))

    @property
    def frame_inverse(self) -> List[List[Fraction]]:
        if "finv" not in self._cache:
            self._cache["finv"] = inverse([list(r) for r in self.frame])
        return self._cache["finv"]

    def flat_coordinate(self, a: int) -> Series:
        """t^a as a linear series in the base variables."""
        key = ("coord", a)
        if key not in self._cache:
            out = self.ring.zero()
            for p, c in enumerate(self.frame_inverse[a]):
                if c:
                    out = out + self.ring.var(self.coords[p]) * c
            self._cache[key] = out
        return self._cache[key]

    def euler_component(self, a: int) -> Series:
        key = ("E", a)
        if key not in self._cache:
            coords = [self.flat_coordinate(b) for b in range(self.dim)] if self.dim else []
            self._cache[key] = self.euler.component(a, coords) if self.dim else None
        return self._cache[key]

    def d(self, f, a: int):
        """Flat derivative d/dt^a of a series (or a rational)."""
        if not isinstance(f, Series):
            return Fraction(0)
        out = f.ring.zero()
        for p in range(self.dim):
            w = self.frame[p][a]
            if w:
                out = out + derive(f, self.coords[p]) * w
        return out

    def algebra(self) -> FDAlgebra:
        return FDAlgebra(self.dim, self.labels, self.C, self.unit, self.ring)

    def base_vector(self, a: int) -> Tuple:
        return tuple(self.frame[p][a] for p in range(self.dim))

    def subspace(self, k: int) -> Subspace:
        """I_k in base coordinates."""
        vecs = [self.base_vector(i) for i, l in enumerate(self.level_of) if l <= k]
        return Subspace.from_vectors(self.dim, vecs)

    def to_json(self) -> dict:
        entries = []
        for (i, j), col in sorted(self.C.items()):
            for k, v in sorted(col.items()):
                entries.append({"i": i, "j": j, "k": k, "value": value_to_json(v)})
        return {
            "levels": [{"k": lv.k, "labels": list(lv.labels),
                        "eta": [[rational_to_str(x) for x in row] for row in lv.eta]}
                       for lv in self.levels],
            "C": entries,
            "unit": [rational_to_str(x) for x in self.unit],
            "euler": self.euler.to_json(),
            "D": rational_to_str(self.D),
            "order": self.ring.order,
            "ring": self.ring.to_json(),
            "coords": list(self.coords),
            "frame": [[rational_to_str(x) for x in row] for row in self.frame],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MFSData":
        ring = SeriesRing.from_json(data["ring"])
        if "order" in data and data["order"] != ring.order:
            raise MFSError("order does not match the ring declaration")
        coords = tuple(data["coords"])
        n = len(coords)
        levels = []
        for lv in data["levels"]:
            eta = tuple(tuple(parse_rational(x) for x in row) for row in lv.get("eta", []))
            levels.append(MFSLevel(int(lv["k"]), tuple(lv.get("labels", [])), eta))
        frame_rows = data.get("frame")
        frame = (tuple(tuple(parse_rational(x) for x in row) for row in frame_rows)
                 if frame_rows is not None else tuple(map(tuple, identity(n))))
        C: SparseC = {}
        for e in data.get("C", []):
            v = value_from_json(e["value"], ring)
            col = C.setdefault((int(e["i"]), int(e["j"])), {})
            col[int(e["k"])] = col.get(int(e["k"]), 0) + v
        unit = tuple(parse_rational(x) for x in data["unit"])
        euler = EulerField.from_json(data.get("euler", {}), n)
        m = cls(ring, coords, frame, tuple(levels), C, unit, euler, parse_rational(data["D"]))
        validate_shape(m)
        return m


def validate_shape(m: MFSData) -> None:
    n = m.dim
    if len(m.frame) != n or any(len(r) != n for r in m.frame):
        raise MFSError("frame must be square of the coordinate count")
    if n and not is_nondegenerate([list(r) for r in m.frame]):
        raise MFSError("frame is singular")
    if sum(len(lv.labels) for lv in m.levels) != n:
        raise MFSError("level ranks do not add up to the dimension")
    ks = [lv.k for lv in m.levels]
    if ks != sorted(set(ks)):
        raise MFSError("levels must be strictly increasing")
    for lv in m.levels:
        r = len(lv.labels)
        if len(lv.eta) != r or any(len(row) != r for row in lv.eta):
            raise MFSError(f"eta at level {lv.k} has the wrong shape")
    if len(m.unit) != n or m.euler.dim != n:
        raise MFSError("unit or Euler field has the wrong length")
    for c in m.coords:
        if c not in m.ring.poly_vars:
            raise MFSError(f"coordinate {c!r} is not a polynomial variable of the ring")
    for (i, j), col in m.C.items():
        if not (0 <= i < n and 0 <= j < n) or any(not 0 <= k < n for k in col):
            raise MFSError("structure constant index out of range")
        for v in col.values():
            if isinstance(v, Series) and v.ring != m.ring:
                raise MFSError("structure constant outside the declared ring")


# --------------------------------------------------------------- utilities

def _is_zero(x) -> bool:
    return not x


def _js(x):
    return value_to_json(x) if isinstance(x, Series) else rational_to_str(Fraction(x))


def _vec_is(u: Sequence, v: Sequence) -> bool:
    return all(_is_zero(a - b) for a, b in zip(u, v))


def _algebra_laws(rep: Report, alg: FDAlgebra, labels: Sequence[str]) -> None:
    n = alg.dim
    wit = None
    for i in range(n):
        for j in range(i + 1, n):
            if not _vec_is(alg.product_basis(i, j), alg.product_basis(j, i)):
                wit = {"i": labels[i], "j": labels[j]}
                break
        if wit:
            break
    rep.add("commutativity", wit is None, wit)
    wit = None
    for i in range(n):
        for j in range(n):
            ij = alg.product_basis(i, j)
            for k in range(n):
                lhs = multiply(alg, ij, alg.basis_vec(k))
                rhs = multiply(alg, alg.basis_vec(i), alg.product_basis(j, k))
                bad = next((m for m in range(n) if not _is_zero(lhs[m] - rhs[m])), None)
                if bad is not None:
                    wit = {"i": labels[i], "j": labels[j], "k": labels[k], "component": labels[bad],
                           "residual": _js(lhs[bad] - rhs[bad])}
                    break
            if wit:
                break
        if wit:
            break
    rep.add("associativity", wit is None, wit)
    wit = None
    if any(isinstance(u, Series) and not u.is_constant() for u in alg.unit):
        wit = {"reason": "unit is not constant"}
    else:
        for j in range(n):
            e = alg.basis_vec(j)
            if not _vec_is(multiply(alg, alg.unit, e), e):
                wit = {"j": labels[j]}
                break
    rep.add("unit_flat", wit is None, wit)


# ----------------------------------------------------- Frobenius structures

def frobenius_structure_check(f: FrobStructureData) -> Report:
    """Axioms of a Frobenius manifold chart in flat coordinates, at the ring's order."""
    rep = Report(meta={"order": f.ring.order})
    alg, n = f.algebra, f.dim
    labels = alg.labels
    g = [list(r) for r in f.metric]
    wit = next(({"i": labels[i], "j": labels[j]} for i in range(n) for j in range(n) if g[i][j] != g[j][i]),
               None)
    rep.add("metric_symmetric", wit is None, wit)
    nd = is_nondegenerate(g) if n else True
    rep.add("metric_nondegenerate", nd, None if nd else {"det": "0"})
    const = all(not isinstance(x, Series) for row in g for x in row)
    rep.add("metric_constant", const, None if const else {})
    _algebra_laws(rep, alg, labels)

    coords = list(f.coords)
    # c_ijk = <e_i o e_j, e_k>
    cijk: Dict[Tuple[int, int, int], object] = {}
    for i in range(n):
        for j in range(n):
            col = alg.C.get((i, j), {})
            for k in range(n):
                s = Fraction(0)
                for m, v in col.items():
                    if g[m][k]:
                        s = s + v * g[m][k]
                cijk[(i, j, k)] = s
    wit = None
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if not _is_zero(cijk[(i, j, k)] - cijk[(j, k, i)]):
                    wit = {"i": labels[i], "j": labels[j], "k": labels[k]}
                    break
            if wit:
                break
        if wit:
            break
    rep.add("frobenius_property", wit is None, wit)

    def dd(x, var):
        return derive(x, var) if isinstance(x, Series) else Fraction(0)

    wit = None
    for i in range(n):
        for j in range(i, n):
            for k in range(n):
                for l in range(k + 1, n):
                    lhs = dd(cijk[(i, j, k)], coords[l])
                    rhs = dd(cijk[(i, j, l)], coords[k])
                    if not _is_zero(lhs - rhs):
                        wit = {"x": labels[i], "y": labels[j], "z": labels[k], "w": labels[l],
                               "residual": _js(lhs - rhs)}
                        break
                if wit:
                    break
            if wit:
                break
        if wit:
            break
    rep.add("potential_symmetry", wit is None, wit)

    a = f.euler.linear
    coord_series = [f.ring.var(c) for c in coords]
    E = [f.euler.component(i, coord_series) for i in range(n)] if n else []

    def Ed(x):
        if not isinstance(x, Series):
            return Fraction(0)
        out = x.ring.zero()
        for l in range(n):
            if E[l]:
                out = out + E[l] * derive(x, coords[l])
        return out

    # [E, d_i o d_j] - [E, d_i] o d_j - d_i o [E, d_j] = d_i o d_j in components
    wit = None
    for i in range(n):
        for j in range(n):
            for m in range(n):
                lhs = Ed(alg.coeff(i, j, m))
                for k in range(n):
                    cij = alg.coeff(i, j, k)
                    if a[m][k] and not _is_zero(cij):
                        lhs = lhs - cij * a[m][k]
                    if a[k][i]:
                        lhs = lhs + alg.coeff(k, j, m) * a[k][i]
                    if a[k][j]:
                        lhs = lhs + alg.coeff(i, k, m) * a[k][j]
                if not _is_zero(lhs - alg.coeff(i, j, m)):
                    wit = {"i": labels[i], "j": labels[j], "component": labels[m],
                           "residual": _js(lhs - alg.coeff(i, j, m))}
                    break
            if wit:
                break
        if wit:
            break
    rep.add("euler_multiplication", wit is None, wit)
    wit = None
    D = Fraction(f.D)
    for i in range(n):
        for j in range(n):
            lhs = sum((a[k][i] * g[k][j] + a[k][j] * g[i][k] for k in range(n)), Fraction(0))
            if lhs != (2 - D) * g[i][j]:
                wit = {"i": labels[i], "j": labels[j], "lhs": rational_to_str(lhs),
                       "rhs": rational_to_str((2 - D) * g[i][j])}
                break
        if wit:
            break
    rep.add("euler_metric", wit is None, wit)
    rep.add("euler_affine_linear", True)
    return rep


# --------------------------------------------------------- MFS axioms

def mfs_check(m: MFSData) -> Report:
    """The coordinate form of the MFS conditions, at the ring's truncation order."""
    rep = Report(meta={"order": m.ring.order, "D": rational_to_str(m.D)})
    n = m.dim
    labels = m.labels
    lev = m.level_of
    D = Fraction(m.D)

    wit = None
    for lv in m.levels:
        r = len(lv.labels)
        if any(lv.eta[a][b] != lv.eta[b][a] for a in range(r) for b in range(r)):
            wit = {"k": lv.k}
            break
    rep.add("eta_symmetric", wit is None, wit)
    wit = None
    for lv in m.levels:
        if lv.labels and not is_nondegenerate([list(r) for r in lv.eta]):
            wit = {"k": lv.k}
            break
    rep.add("eta_invertible", wit is None, wit)
    const = all(not isinstance(x, Series) for lv in m.levels for row in lv.eta for x in row)
    rep.add("eta_constant", const, None if const else {})

    _algebra_laws(rep, m.algebra(), labels)

    wit = None
    for (i, j), col in sorted(m.C.items()):
        for k, v in sorted(col.items()):
            if (lev[i] < lev[k] or lev[j] < lev[k]) and not _is_zero(v):
                wit = {"i": labels[i], "j": labels[j], "component": labels[k]}
                break
        if wit:
            break
    rep.add("ideal_condition", wit is None, wit)

    wit = None
    for lv in m.levels:
        idx = m.indices(lv.k)
        pos = {g: p for p, g in enumerate(idx)}
        for l in range(n):
            for a in idx:
                for b in idx:
                    lhs = sum((m.c(l, b, d) * lv.eta[pos[d]][pos[a]] for d in idx if lv.eta[pos[d]][pos[a]]),
                              Fraction(0))
                    rhs = sum((m.c(l, a, d) * lv.eta[pos[d]][pos[b]] for d in idx if lv.eta[pos[d]][pos[b]]),
                              Fraction(0))
                    if not _is_zero(lhs - rhs):
                        wit = {"k": lv.k, "l": labels[l], "a": labels[a], "b": labels[b]}
                        break
                if wit:
                    break
            if wit:
                break
        if wit:
            break
    rep.add("graded_frobenius", wit is None, wit)

    dcache: Dict[Tuple[int, int, int, int], object] = {}

    def dC(p, i, j, k):
        key = (p, i, j, k)
        if key not in dcache:
            dcache[key] = m.d(m.c(i, j, k), p)
        return dcache[key]

    wit_closed = wit_lower = None
    for lv in m.levels:
        k = lv.k
        idx = m.indices(k)
        for a in idx:
            for b in idx:
                for l in range(n):
                    for j in range(n):
                        if lev[j] < k:
                            if wit_lower is None and not _is_zero(dC(j, a, l, b)):
                                wit_lower = {"k": k, "a": labels[a], "l": labels[l], "b": labels[b],
                                             "direction": labels[j], "residual": _js(dC(j, a, l, b))}
                        elif lev[l] >= k and j > l and wit_closed is None:
                            r = dC(j, a, l, b) - dC(l, a, j, b)
                            if not _is_zero(r):
                                wit_closed = {"k": k, "a": labels[a], "b": labels[b], "l": labels[l],
                                              "j": labels[j], "residual": _js(r)}
    rep.add("c_symmetry", wit_closed is None, wit_closed)
    rep.add("c_lower_independence", wit_lower is None, wit_lower)

    a_lin = m.euler.linear
    wit = next(({"target": labels[i], "source": labels[j]} for i in range(n) for j in range(n)
                if lev[j] < lev[i] and a_lin[i][j]), None)
    rep.add("euler_linear", wit is None, wit)
    rep.add("euler_affine_linear", True)

    wit = None
    for lv in m.levels:
        k = lv.k
        idx = m.indices(k)
        upper = [j for j in range(n) if lev[j] >= k]
        for b in idx:
            # sum_{j >= k} E^j C_{j,b}^c, per c
            for c in idx:
                S = Fraction(0)
                for j in upper:
                    cj = m.c(j, b, c)
                    if not _is_zero(cj):
                        S = S + m.euler_component(j) * cj
                for l in range(n):
                    lhs = m.d(S, l) if isinstance(S, Series) else Fraction(0)
                    for d in idx:
                        if a_lin[c][d]:
                            lhs = lhs - m.c(l, b, d) * a_lin[c][d]
                        if a_lin[d][b]:
                            lhs = lhs + m.c(l, d, c) * a_lin[d][b]
                    if not _is_zero(lhs - m.c(l, b, c)):
                        wit = {"k": k, "l": labels[l], "b": labels[b], "c": labels[c],
                               "residual": _js(lhs - m.c(l, b, c))}
                        break
                if wit:
                    break
            if wit:
                break
        if wit:
            break
    rep.add("euler_multiplication", wit is None, wit)

    wit = None
    for lv in m.levels:
        idx = m.indices(lv.k)
        r = len(idx)
        for p in range(r):
            for q in range(r):
                lhs = sum((lv.eta[q][s] * a_lin[idx[s]][idx[p]] + lv.eta[p][s] * a_lin[idx[s]][idx[q]]
                           for s in range(r)), Fraction(0))
                rhs = (2 - D + lv.k) * lv.eta[p][q]
                if lhs != rhs:
                    wit = {"k": lv.k, "a": lv.labels[p], "b": lv.labels[q],
                           "lhs": rational_to_str(lhs), "rhs": rational_to_str(rhs)}
                    break
            if wit:
                break
        if wit:
            break
    rep.add("euler_metric", wit is None, wit)
    return rep


# ------------------------------------------------ construction from n

def _combo_label(v: Sequence, labels: Sequence[str]) -> str:
    nz = [(c, labels[i]) for i, c in enumerate(v) if c]
    if len(nz) == 1 and nz[0][0] == 1:
        return nz[0][1]
    parts = []
    for c, lab in nz:
        s = rational_to_str(c)
        if c == 1:
            term = lab
        elif c == -1:
            term = "-" + lab
        else:
            term = f"{s}*{lab}"
        if parts and not term.startswith("-"):
            term = "+" + term
        parts.append(term)
    return "".join(parts) or "0"


def nilpotent_field_check(f: FrobStructureData, n: Sequence) -> Report:
    """Preconditions for the nilpotent construction, including [E, n^k] = (k-1) n^k."""
    rep = Report(meta={"order": f.ring.order})
    alg = f.algebra
    dim = alg.dim
    n = tuple(Fraction(x) for x in n)
    N = alg.mult_matrix(n)
    bad = next(((i, j) for i in range(dim) for j in range(dim)
                if isinstance(N[i][j], Series) and not N[i][j].is_constant()), None)
    rep.add("n_multiplication_constant", bad is None,
            None if bad is None else {"row": alg.labels[bad[0]], "col": alg.labels[bad[1]]})
    if bad is not None:
        return rep
    Nc = [[x.constant_term() if isinstance(x, Series) else Fraction(x) for x in row] for row in N]
    powers = [n]
    d = None
    for k in range(1, dim + 2):
        if not any(powers[-1]):
            d = k  # first vanishing power
            break
        powers.append(tuple(matvec(Nc, powers[-1])))
    rep.add("n_nilpotent", d is not None and d >= 2, None if d else {})
    if not d or d < 2:
        return rep
    br = f.euler.bracket_constant(n)
    rep.add("euler_commutes_with_n", not any(br), None if not any(br) else {"bracket": [rational_to_str(x) for x in br]})
    wit = None
    for k in range(1, d):
        nk = powers[k - 1]
        lhs = f.euler.bracket_constant(nk)
        if any(x - (k - 1) * y for x, y in zip(lhs, nk)):
            wit = {"k": k}
            break
    rep.add("euler_power_bracket", wit is None, wit)
    rep.meta["nilpotent_order"] = d
    return rep


def _adapted_levels(filt, labels: Sequence[str]):
    """Graded bases reduced against the previous ideal, with their Gram matrices."""
    out = []
    prev = Subspace.zero(filt.algebra.dim)
    for lv in filt.levels:
        vecs = [tuple(prev.reduce(v)) for v in lv.graded_basis]
        gram = tuple(tuple(filt.pair(lv.k, x, y) for y in vecs) for x in vecs)
        out.append((lv.k, vecs, gram))
        prev = lv.space
    return out


def mfs_from_nilpotent(f: FrobStructureData, n: Sequence) -> MFSData:
    """The MFS of reference charge D + 1 defined by a flat nilpotent vector field n."""
    pre = nilpotent_field_check(f, n)
    if not pre.passed:
        raise MFSError(f"nilpotent field preconditions fail: {[c.name for c in pre.failures()]}")
    try:
        filt = nilpotent_filtration(f.frobenius, tuple(Fraction(x) for x in n))
    except FiltrationError as exc:
        raise MFSError(str(exc)) from exc
    labels = f.algebra.labels
    levels = _adapted_levels(filt, labels)
    return assemble(f.algebra, f.coords, f.euler, Fraction(f.D) + 1, levels)


def assemble(alg: FDAlgebra, coords: Sequence[str], euler_base: EulerField, D,
             levels: Sequence[Tuple[int, Sequence[Sequence], Sequence[Sequence]]]) -> MFSData:
    """Build MFSData from coordinate-basis data and an adapted frame given level by level."""
    dim = alg.dim
    cols = [v for _, vecs, _ in levels for v in vecs]
    if len(cols) != dim:
        raise MFSError("graded bases do not span the space")
    F = [[Fraction(cols[a][p]) for a in range(dim)] for p in range(dim)]
    if dim and not is_nondegenerate(F):
        raise MFSError("graded bases are dependent")
    Finv = inverse(F) if dim else []
    C: SparseC = {}
    for a in range(dim):
        for b in range(a, dim):
            acc: Dict[int, object] = {}
            for p in range(dim):
                if not F[p][a]:
                    continue
                for q in range(dim):
                    if not F[q][b]:
                        continue
                    w = F[p][a] * F[q][b]
                    for r, v in alg.C.get((p, q), {}).items():
                        for mm in range(dim):
                            if Finv[mm][r]:
                                acc[mm] = acc.get(mm, Fraction(0)) + v * (w * Finv[mm][r])
            acc = {k: v for k, v in acc.items() if not _is_zero(v)}
            if acc:
                C[(a, b)] = acc
                if a != b:
                    C[(b, a)] = dict(acc)
    unit = tuple(matvec(Finv, alg.unit)) if dim else ()
    euler = euler_base.transformed(F, Finv) if dim else euler_base
    mlevels = tuple(MFSLevel(k, tuple(_combo_label(v, alg.labels) for v in vecs),
                             tuple(tuple(Fraction(x) for x in row) for row in gram))
                    for k, vecs, gram in levels)
    m = MFSData(alg.ring, tuple(coords), tuple(map(tuple, F)), mlevels, C, unit, euler, Fraction(D))
    validate_shape(m)
    return m


# ----------------------------------------------------- transversal slice

def transversal_slice(m: MFSData, k: int, constants: Optional[Mapping[str, object]] = None) -> MFSData:
    """Freeze the flat coordinates of level <= k; the quotient MFS on TM / I_k.

    ``constants`` maps flat labels of dropped coordinates to their values
    (default 0).  The frame must split so that the dropped flat directions
    move a set of base coordinates that the kept ones do not touch.
    """
    ks = [lv.k for lv in m.levels]
    if not ks or k < ks[0] or k > ks[-1]:
        raise MFSError(f"slice level {k} outside the level range {ks[:1] + ks[-1:]}")
    lev = m.level_of
    n = m.dim
    kept = [i for i in range(n) if lev[i] > k]
    dropped = [i for i in range(n) if lev[i] <= k]
    drop_rows = [p for p in range(n) if all(not m.frame[p][a] for a in kept)]
    keep_rows = [p for p in range(n) if p not in drop_rows]
    if len(drop_rows) != len(dropped) or any(m.frame[p][a] for p in keep_rows for a in dropped):
        raise MFSError("frame does not split along the slice; reframe first")
    consts = {lab: Fraction(0) for lab in (m.labels[i] for i in dropped)}
    for lab, v in (constants or {}).items():
        if lab not in consts:
            raise MFSError(f"{lab!r} is not a dropped flat coordinate")
        consts[lab] = parse_rational(v) if isinstance(v, str) else Fraction(v)
    values = {}
    for p in drop_rows:
        values[m.coords[p]] = sum((m.frame[p][a] * consts[m.labels[a]] for a in dropped), Fraction(0))
    dropped_coords = set(values)
    exp_assign = {}
    for name, coord in m.ring.exp_vars:
        if coord in dropped_coords:
            if values[coord]:
                raise MFSError(f"cannot freeze {coord!r} at a nonzero value: {name} = exp({coord})")
            exp_assign[name] = 1
    new_ring = SeriesRing(tuple(v for v in m.ring.poly_vars if v not in dropped_coords),
                          tuple((nm, c) for nm, c in m.ring.exp_vars if c not in dropped_coords),
                          m.ring.order)

    def move(v):
        if isinstance(v, Series):
            return rebase(specialize(v, {**values, **exp_assign}), new_ring)
        return v

    pos = {g: p for p, g in enumerate(kept)}
    C: SparseC = {}
    for (i, j), col in m.C.items():
        if i in pos and j in pos:
            new = {pos[c]: move(v) for c, v in col.items() if c in pos}
            new = {c: v for c, v in new.items() if not _is_zero(v)}
            if new:
                C[(pos[i], pos[j])] = new
    frame = tuple(tuple(m.frame[p][a] for a in kept) for p in keep_rows)
    lin = tuple(tuple(m.euler.linear[i][j] for j in kept) for i in kept)
    euler = EulerField(lin, tuple(m.euler.constant[i] for i in kept))
    levels = tuple(lv for lv in m.levels if lv.k > k)
    out = MFSData(new_ring, tuple(m.coords[p] for p in keep_rows), frame, levels, C,
                  tuple(m.unit[i] for i in kept), euler, m.D)
    validate_shape(out)
    return out


# ------------------------------------------------------- change of frame

def reframe(m: MFSData, frame: Sequence[Sequence]) -> MFSData:
    """The same structure in another adapted flat frame (columns in base coordinates).

    The new frame must induce the same filtration: P = F_old^-1 F_new is
    block lower triangular with respect to the levels.
    """
    n = m.dim
    Fn = [[Fraction(x) for x in row] for row in frame]
    if len(Fn) != n or any(len(r) != n for r in Fn) or (n and not is_nondegenerate(Fn)):
        raise MFSError("new frame must be an invertible square matrix")
    P = matmul(m.frame_inverse, Fn) if n else []
    lev = m.level_of
    for a in range(n):
        for b in range(n):
            if P[b][a] and lev[b] > lev[a]:
                raise MFSError("new frame is not adapted to the same filtration")
    Pinv = inverse(P) if n else []
    C: SparseC = {}
    for a in range(n):
        for b in range(a, n):
            acc: Dict[int, object] = {}
            for p in range(n):
                if not P[p][a]:
                    continue
                for q in range(n):
                    if not P[q][b]:
                        continue
                    w = P[p][a] * P[q][b]
                    for r, v in m.C.get((p, q), {}).items():
                        for mm in range(n):
                            if Pinv[mm][r]:
                                acc[mm] = acc.get(mm, Fraction(0)) + v * (w * Pinv[mm][r])
            acc = {k: v for k, v in acc.items() if not _is_zero(v)}
            if acc:
                C[(a, b)] = acc
                if a != b:
                    C[(b, a)] = dict(acc)
    levels = []
    base_labels = None
    for lv in m.levels:
        idx = m.indices(lv.k)
        block = [[P[i][j] for j in idx] for i in idx]
        eta = matmul(matmul(transpose(block), [list(r) for r in lv.eta]), block) if idx else []
        levels.append(MFSLevel(lv.k, tuple(f"f{j}" for j in idx), tuple(map(tuple, eta))))
    euler = m.euler.transformed(P, Pinv) if n else m.euler
    out = MFSData(m.ring, m.coords, tuple(map(tuple, Fn)), tuple(levels), C,
                  tuple(matvec(Pinv, m.unit)) if n else (), euler, m.D)
    validate_shape(out)
    return out


def relabel(m: MFSData, labels_per_level: Mapping[int, Sequence[str]]) -> MFSData:
    levels = tuple(MFSLevel(lv.k, tuple(labels_per_level.get(lv.k, lv.labels)), lv.eta) for lv in m.levels)
    return MFSData(m.ring, m.coords, m.frame, levels, m.C, m.unit, m.euler, m.D)


def mfs_difference(a: MFSData, b: MFSData) -> Optional[dict]:
    """None when ``a`` and ``b`` describe the same structure, else a witness.

    ``b`` is moved to the frame of ``a`` first, so different adapted frames
    of one structure compare equal.
    """
    if a.coords != b.coords:
        return {"field": "coords", "a": list(a.coords), "b": list(b.coords)}
    if a.ring != b.ring:
        return {"field": "ring"}
    if a.D != b.D:
        return {"field": "D", "a": rational_to_str(a.D), "b": rational_to_str(b.D)}
    ka = [(lv.k, len(lv.labels)) for lv in a.levels if lv.labels]
    kb = [(lv.k, len(lv.labels)) for lv in b.levels if lv.labels]
    if ka != kb:
        return {"field": "level_ranks", "a": ka, "b": kb}
    # drop empty levels so both share one level list
    a2 = _drop_empty(a)
    b2 = _drop_empty(b)
    try:
        b3 = reframe(b2, [list(r) for r in a2.frame])
    except MFSError as exc:
        return {"field": "filtration", "reason": str(exc)}
    for la, lb in zip(a2.levels, b3.levels):
        if la.eta != lb.eta:
            return {"field": "eta", "k": la.k,
                    "a": [[rational_to_str(x) for x in r] for r in la.eta],
                    "b": [[rational_to_str(x) for x in r] for r in lb.eta]}
    n = a2.dim
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if not _is_zero(a2.c(i, j, k) - b3.c(i, j, k)):
                    return {"field": "C", "i": i, "j": j, "k": k,
                            "a": _js(a2.c(i, j, k)), "b": _js(b3.c(i, j, k))}
    if tuple(a2.unit) != tuple(b3.unit):
        return {"field": "unit"}
    if a2.euler != b3.euler:
        return {"field": "euler", "a": a2.euler.to_json(), "b": b3.euler.to_json()}
    return None


def _drop_empty(m: MFSData) -> MFSData:
    levels = tuple(lv for lv in m.levels if lv.labels)
    return MFSData(m.ring, m.coords, m.frame, levels, m.C, m.unit, m.euler, m.D)


def at_order(m: MFSData, order: int) -> MFSData:
    """The same structure truncated at a lower exp-order."""
    if order > m.ring.order:
        raise MFSError(f"cannot raise the truncation order from {m.ring.order} to {order}")
    if order == m.ring.order:
        return m
    ring = SeriesRing(m.ring.poly_vars, m.ring.exp_vars, order)
    C = {key: {k: rebase(v, ring) if isinstance(v, Series) else v for k, v in col.items()}
         for key, col in m.C.items()}
    return MFSData(ring, m.coords, m.frame, m.levels, C, m.unit, m.euler, m.D)
