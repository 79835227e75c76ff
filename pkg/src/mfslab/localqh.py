"""Local quantum cohomology from the projective bundle V = P(O + L) over a base B.

The base is a toric surface S (with L = K_S) or P^3 (with L = O(-4)).
Cohomology of V is ``B + B*Delta0`` with ``Delta0^2 = b*Delta0`` where
``b = -c1(L)``, and ``int_V (x + y Delta0) = int_B y``.

Two routes produce the local Frobenius manifold:

(a) the closed formulas for the product on H^*(B) twisted by the local
    Gromov-Witten potential, with its filtration and graded pairings;
(b) the quantum product of V, the mixed structure defined by the flat
    nilpotent field Delta0, and the transversal slice at level 0.

:func:`local_product` builds both and insists they agree.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .fdalg import FDAlgebra, SparseC
from .frobenius import FrobeniusAlgebra
from .mfs import (
    EulerField,
    FrobStructureData,
    MFSData,
    assemble,
    mfs_difference,
    mfs_from_nilpotent,
    transversal_slice,
)
from .ringcore import Series, SeriesRing, Subspace, derive, inverse, is_nondegenerate
from .ringcore.linalg import unit_vector
from .ringcore.scalars import parse_rational, rational_to_str


class LocalError(ValueError):
    pass


# --------------------------------------------------------------- surfaces

@dataclass(frozen=True)
class SurfaceData:
    """A toric surface: intersection matrix ``c`` on a curve basis and -K = sum b_i gamma_i."""

    name: str
    c: Tuple[Tuple[int, ...], ...]
    b: Tuple[int, ...]

    def __post_init__(self):
        c = tuple(tuple(int(x) for x in row) for row in self.c)
        b = tuple(int(x) for x in self.b)
        r = len(c)
        if r == 0 or any(len(row) != r for row in c) or len(b) != r:
            raise LocalError(f"surface {self.name!r}: c must be r x r and b of length r")
        if any(c[i][j] != c[j][i] for i in range(r) for j in range(r)):
            raise LocalError(f"surface {self.name!r}: c is not symmetric")
        if not is_nondegenerate([list(row) for row in c]):
            raise LocalError(f"surface {self.name!r}: c is singular")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)
        if self.kappa <= 0:
            raise LocalError(f"surface {self.name!r}: K^2 = {self.kappa} must be positive")

    @property
    def r(self) -> int:
        return len(self.b)

    @property
    def b_dual(self) -> Tuple[int, ...]:
        """Components of -K against the basis: b_dual_i = sum_j c_ij b_j."""
        return tuple(sum(self.c[i][j] * self.b[j] for j in range(self.r)) for i in range(self.r))

    @property
    def kappa(self) -> int:
        return sum(bi * di for bi, di in zip(self.b, self.b_dual))

    def to_json(self) -> dict:
        return {"name": self.name, "r": self.r, "c": [list(r) for r in self.c], "b": list(self.b),
                "b_dual": list(self.b_dual), "kappa": self.kappa}

    @classmethod
    def from_json(cls, data: Mapping) -> "SurfaceData":
        for key in ("c", "b"):
            if key not in data:
                raise LocalError(f"surface data needs {key!r}")
        s = cls(str(data.get("name", "surface")), data["c"], data["b"])
        if "r" in data and int(data["r"]) != s.r:
            raise LocalError(f"r = {data['r']} does not match the {s.r} x {s.r} matrix c")
        if "b_dual" in data and tuple(int(x) for x in data["b_dual"]) != s.b_dual:
            raise LocalError(f"b_dual {list(data['b_dual'])} does not equal c.b = {list(s.b_dual)}")
        if "kappa" in data and int(data["kappa"]) != s.kappa:
            raise LocalError(f"kappa {data['kappa']} does not equal b.c.b = {s.kappa}")
        return s


SURFACES: Dict[str, SurfaceData] = {
    "p2": SurfaceData("p2", ((1,),), (3,)),
    "f0": SurfaceData("f0", ((0, 1), (1, 0)), (2, 2)),
    # F1: gamma_1 = f + e, gamma_2 = f
    "f1": SurfaceData("f1", ((1, 1), (1, 0)), (2, 1)),
    # F2: gamma_1 = e + 2f, gamma_2 = f; the (-2)-curve e has b.beta = 0
    "f2": SurfaceData("f2", ((2, 1), (1, 0)), (2, 0)),
}


def load_surface(name: str) -> SurfaceData:
    data = json.loads(resources.files("mfslab.data").joinpath("surfaces.json").read_text())
    for entry in data["surfaces"]:
        if entry["name"] == name:
            return SurfaceData.from_json(entry)
    raise LocalError(f"unknown surface {name!r}")


# --------------------------------------------------------- invariant tables

Target = Union[SurfaceData, str]


@dataclass(frozen=True)
class GWTable:
    """Genus-zero local invariants N_beta, with |beta| <= order."""

    target: str
    entries: Dict[Tuple[int, ...], Fraction]
    order: int
    provenance: str = ""

    def validate(self, target: Target) -> None:
        rank = 1 if target == "p3" else target.r
        kind = "p3" if target == "p3" else "toric"
        if self.target in ("toric", "p3") and self.target != kind:
            raise LocalError(f"table is for target {self.target!r}, not {kind!r}")
        for beta, N in self.entries.items():
            where = f"beta={list(beta)}"
            if len(beta) != rank:
                raise LocalError(f"{where}: expected {rank} components")
            if any(x < 0 for x in beta):
                raise LocalError(f"{where}: components must be nonnegative")
            if not any(beta):
                raise LocalError(f"{where}: the zero class carries no invariant")
            if sum(beta) > self.order:
                raise LocalError(f"{where}: exceeds the table order {self.order}")
            if target != "p3" and N and sum(b * x for b, x in zip(target.b, beta)) <= 0:
                raise LocalError(f"{where}: -K.beta <= 0 but N = {N} is nonzero")

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "entries": [{"beta": list(b), "N": rational_to_str(n)} for b, n in sorted(self.entries.items())],
            "order": self.order,
            "provenance": self.provenance,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "GWTable":
        entries: Dict[Tuple[int, ...], Fraction] = {}
        for i, e in enumerate(data.get("entries", [])):
            beta = e.get("beta")
            if isinstance(beta, int):
                beta = [beta]
            if not isinstance(beta, list) or not all(isinstance(x, int) for x in beta):
                raise LocalError(f"entries[{i}].beta must be a list of integers")
            key = tuple(beta)
            if key in entries:
                raise LocalError(f"entries[{i}]: duplicate class {beta}")
            entries[key] = parse_rational(e["N"])
        order = data.get("order", max((sum(b) for b in entries), default=0))
        return cls(str(data.get("target", "")), entries, int(order), str(data.get("provenance", "")))

    def truncated(self, order: int) -> "GWTable":
        return GWTable(self.target, {b: n for b, n in self.entries.items() if sum(b) <= order},
                       min(order, self.order) if self.entries else order, self.provenance)


def load_table(name: str) -> GWTable:
    try:
        text = resources.files("mfslab.data").joinpath(f"gw_{name}.json").read_text()
    except FileNotFoundError:
        raise LocalError(f"no shipped invariant table for {name!r}") from None
    return GWTable.from_json(json.loads(text))


def _classes(rank: int, order: int) -> List[Tuple[int, ...]]:
    out: List[Tuple[int, ...]] = []

    def rec(prefix, left):
        if len(prefix) == rank:
            if any(prefix):
                out.append(tuple(prefix))
            return
        for x in range(left + 1):
            rec(prefix + [x], left - x)

    rec([], order)
    return sorted(out, key=lambda b: (sum(b), b))


def synthetic_table(target: Target, order: int, rng: random.Random, density: float = 0.7) -> GWTable:
    """Random rational invariants respecting the validity rules (for property tests)."""
    rank = 1 if target == "p3" else target.r
    entries = {}
    for beta in _classes(rank, order):
        if target != "p3" and sum(b * x for b, x in zip(target.b, beta)) <= 0:
            continue
        if rng.random() < density:
            num = rng.randint(-40, 40)
            if num:
                entries[beta] = Fraction(num, rng.randint(1, 9))
    return GWTable("p3" if target == "p3" else "toric", entries, order, "synthetic")


# ------------------------------------------------------------ the V model

@dataclass(frozen=True)
class VModel:
    target: Target
    labels: Tuple[str, ...]
    coords: Tuple[str, ...]
    degrees: Tuple[int, ...]
    frobenius: FrobeniusAlgebra
    dual_basis: Tuple[Tuple[Fraction, ...], ...]
    delta0: Tuple[Fraction, ...]
    gamma: Dict[int, int]  # base index -> V index of Gamma_a
    delta: Dict[int, int]  # base index -> V index of Delta_a
    curve_coords: Tuple[str, ...]  # coordinates paired with the curve classes
    euler: EulerField
    dimension: int  # complex dimension of V; the Frobenius charge

    @property
    def dim(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class _Base:
    degrees: Tuple[int, ...]
    product: Dict[Tuple[int, int], Dict[int, Fraction]]
    trace: Tuple[Fraction, ...]
    b: Tuple[Fraction, ...]  # -c1(L) in the base basis
    curve_indices: Tuple[int, ...]
    dimension: int


def _toric_base(s: SurfaceData) -> _Base:
    r = s.r
    top = r + 1
    prod: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for i in range(r + 2):
        prod[(0, i)] = {i: Fraction(1)}
        prod[(i, 0)] = {i: Fraction(1)}
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            if s.c[i - 1][j - 1]:
                prod[(i, j)] = {top: Fraction(s.c[i - 1][j - 1])}
    b = (Fraction(0),) + tuple(Fraction(x) for x in s.b) + (Fraction(0),)
    trace = tuple(Fraction(1 if i == top else 0) for i in range(r + 2))
    return _Base((0,) + (2,) * r + (4,), prod, trace, b, tuple(range(1, r + 1)), 2)


def _p3_base() -> _Base:
    prod = {}
    for i in range(4):
        for j in range(4):
            if i + j <= 3:
                prod[(i, j)] = {i + j: Fraction(1)}
    b = (Fraction(0), Fraction(4), Fraction(0), Fraction(0))
    return _Base((0, 2, 4, 6), prod, (Fraction(0),) * 3 + (Fraction(1),), b, (1,), 3)


def _base_mul(base: _Base, x: Sequence, y: Sequence) -> List[Fraction]:
    n = len(base.degrees)
    out = [Fraction(0)] * n
    for i in range(n):
        if not x[i]:
            continue
        for j in range(n):
            if not y[j]:
                continue
            for k, v in base.product.get((i, j), {}).items():
                out[k] += x[i] * y[j] * v
    return out


def build_v_model(target: Target) -> VModel:
    base = _p3_base() if target == "p3" else _toric_base(target)
    nb = len(base.degrees)
    # (degree, Gamma before Delta, index)
    slots = sorted([(base.degrees[a], 0, a) for a in range(nb)] + [(base.degrees[a] + 2, 1, a) for a in range(nb)])
    labels = tuple(("Gamma" if kind == 0 else "Delta") + str(a) for _, kind, a in slots)
    coords = tuple(("t" if kind == 0 else "s") + str(a) for _, kind, a in slots)
    degrees = tuple(d for d, _, _ in slots)
    gamma = {a: i for i, (_, kind, a) in enumerate(slots) if kind == 0}
    delta = {a: i for i, (_, kind, a) in enumerate(slots) if kind == 1}
    n = 2 * nb

    def split(v):
        x = [Fraction(0)] * nb
        y = [Fraction(0)] * nb
        for i, (_, kind, a) in enumerate(slots):
            (x if kind == 0 else y)[a] += v[i]
        return x, y

    def join(x, y):
        out = [Fraction(0)] * n
        for a in range(nb):
            out[gamma[a]] += x[a]
            out[delta[a]] += y[a]
        return tuple(out)

    def vmul(u, v):
        x1, y1 = split(u)
        x2, y2 = split(v)
        x = _base_mul(base, x1, x2)
        y = [p + q for p, q in zip(_base_mul(base, x1, y2), _base_mul(base, y1, x2))]
        yy = _base_mul(base, _base_mul(base, y1, y2), base.b)
        return join(x, [p + q for p, q in zip(y, yy)])

    C: SparseC = {}
    for i in range(n):
        for j in range(n):
            p = vmul(unit_vector(n, i), unit_vector(n, j))
            col = {k: v for k, v in enumerate(p) if v}
            if col:
                C[(i, j)] = col
    alg = FDAlgebra(n, labels, C, unit_vector(n, gamma[0]))

    def trace(v):
        _, y = split(v)
        return sum((y[a] * base.trace[a] for a in range(nb)), Fraction(0))

    g = [[trace(alg.product_basis(i, j)) for j in range(n)] for i in range(n)]
    fa = FrobeniusAlgebra(alg, g)
    G = inverse(g)
    dual = tuple(tuple(G[k][m] for m in range(n)) for k in range(n))
    for i in range(n):
        for j in range(n):
            if sum(g[i][m] * dual[j][m] for m in range(n)) != (1 if i == j else 0):
                raise LocalError("dual basis does not invert the pairing")
    dim_v = base.dimension + 1
    weights = [Fraction(2 - d, 2) for d in degrees]
    constant = [Fraction(0)] * n
    constant[delta[0]] = Fraction(2)  # -c1(K_V) = 2 Delta0
    euler = EulerField.diagonal(weights, constant)
    return VModel(target, labels, coords, degrees, fa, dual, tuple(unit_vector(n, delta[0])), gamma, delta,
                  tuple(coords[gamma[a]] for a in base.curve_indices), euler, dim_v)


# ----------------------------------------------------------- potentials

def v_ring(model: VModel, order: int) -> SeriesRing:
    exp = tuple((f"Q{c[1:]}", c) for c in model.curve_coords)
    return SeriesRing(model.coords, exp, order)


def classical_potential(model: VModel, ring: SeriesRing) -> Series:
    """(1/6) sum_{ijk} int(e_i e_j e_k) x_i x_j x_k, from the cup product."""
    alg = model.frobenius.algebra
    g = model.frobenius.pairing
    n = model.dim
    out = ring.zero()
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                eij = alg.product_basis(i, j)
                val = sum((eij[m] * g[m][k] for m in range(n)), Fraction(0))
                if not val:
                    continue
                idx = (i, j, k)
                mult = 6 // _sym(idx)
                mono: Dict[str, int] = {}
                for t in idx:
                    mono[model.coords[t]] = mono.get(model.coords[t], 0) + 1
                out = out + ring.monomial((0,) * len(ring.exp_vars), mono, val * mult / 6)
    return out


def _sym(idx) -> int:
    """Size of the stabilizer of a sorted triple."""
    i, j, k = idx
    if i == j == k:
        return 6
    if i == j or j == k:
        return 2
    return 1


def quantum_potential(model: VModel, table: GWTable, ring: SeriesRing) -> Series:
    out = ring.zero()
    for beta, N in table.entries.items():
        if not N or sum(beta) > ring.order:
            continue
        term = ring.qbeta(beta, N)
        if model.target == "p3":
            term = term * ring.var(model.coords[model.gamma[2]])
        out = out + term
    return out


def potential(model: VModel, table: GWTable, order: int) -> Series:
    table.validate(model.target)
    ring = v_ring(model, order)
    return classical_potential(model, ring) + quantum_potential(model, table, ring)


def quantum_product_v(model: VModel, table: GWTable, order: int) -> FrobStructureData:
    """Big quantum product of V at the truncation order, in the coordinate basis."""
    phi = potential(model, table, order)
    ring = phi.ring
    n = model.dim
    coords = model.coords
    d1 = [derive(phi, c) for c in coords]
    d2 = {}
    for i in range(n):
        for j in range(i, n):
            d2[(i, j)] = derive(d1[i], coords[j])
    G = model.dual_basis  # e_k^vee = sum_m G[k][m] e_m
    C: SparseC = {}
    for i in range(n):
        for j in range(i, n):
            col: Dict[int, Series] = {}
            for k in range(n):
                third = derive(d2[(i, j)], coords[k])
                if not third:
                    continue
                for m in range(n):
                    if G[k][m]:
                        col[m] = col.get(m, ring.zero()) + third * G[k][m]
            col = {m: v for m, v in col.items() if v}
            if col:
                C[(i, j)] = col
                C[(j, i)] = dict(col)
    unit = model.frobenius.algebra.unit
    alg = FDAlgebra(n, model.labels, C, unit, ring)
    metric = tuple(tuple(row) for row in model.frobenius.pairing)
    return FrobStructureData(alg, coords, metric, model.euler, Fraction(model.dimension))


# -------------------------------------------------- route (a): closed form

def _toric_direct(s: SurfaceData, table: GWTable, order: int) -> MFSData:
    r = s.r
    top = r + 1
    coords = tuple(f"t{a}" for a in range(r + 2))
    ring = SeriesRing(coords, tuple((f"Q{i}", f"t{i}") for i in range(1, r + 1)), order)
    labels = tuple(f"Gamma{a}" for a in range(r + 2))
    corr: Dict[Tuple[int, int], Series] = {}
    for i in range(1, r + 1):
        for j in range(1, r + 1):
            val = ring.const(s.c[i - 1][j - 1])
            for beta, N in table.entries.items():
                if sum(beta) > order:
                    continue
                bb = sum(x * y for x, y in zip(s.b, beta))
                w = beta[i - 1] * beta[j - 1] * bb * N
                if w:
                    val = val - ring.qbeta(beta, w)
            corr[(i, j)] = val

    def rule(i, j):
        if i == 0:
            return {j: ring.one()}
        if j == 0:
            return {i: ring.one()}
        if 1 <= i <= r and 1 <= j <= r:
            return {top: corr[(i, j)]}
        return {}

    C = {}
    for i in range(r + 2):
        for j in range(r + 2):
            col = {k: v for k, v in rule(i, j).items() if v}
            if col:
                C[(i, j)] = col
    alg = FDAlgebra(r + 2, labels, C, unit_vector(r + 2, 0), ring)
    n = r + 2
    c1K = tuple(Fraction(-s.b[a - 1]) if 1 <= a <= r else Fraction(0) for a in range(n))
    lvl1 = [c1K, unit_vector(n, top)]
    I1 = Subspace.from_vectors(n, lvl1)
    I2 = Subspace.from_vectors(n, [unit_vector(n, a) for a in range(1, n)])
    lvl2 = [tuple(v) for v in I1.complement_basis(I2)]
    bd, kap = s.b_dual, s.kappa

    def pair2(x, y):
        return sum((x[i] * y[j] * (s.c[i - 1][j - 1] - Fraction(bd[i - 1] * bd[j - 1], kap))
                    for i in range(1, r + 1) for j in range(1, r + 1)), Fraction(0))

    levels = [
        (1, lvl1, ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))),
        (2, lvl2, tuple(tuple(pair2(x, y) for y in lvl2) for x in lvl2)),
        (3, [], ()),
        (4, [unit_vector(n, 0)], ((Fraction(kap),),)),
    ]
    euler = EulerField.diagonal([1] + [0] * r + [-1])
    return assemble(alg, coords, euler, 4, levels)


def _p3_direct(table: GWTable, order: int) -> MFSData:
    coords = ("t0", "t1", "t2", "t3")
    ring = SeriesRing(coords, (("Q1", "t1"),), order)
    s2 = ring.zero()
    s3 = ring.zero()
    for (beta,), N in table.entries.items():
        if beta <= order and N:
            s2 = s2 + ring.qbeta((beta,), beta ** 2 * N)
            s3 = s3 + ring.qbeta((beta,), beta ** 3 * N)
    t2 = ring.var("t2")
    C: SparseC = {}
    for a in range(4):
        C[(0, a)] = {a: ring.one()}
        C[(a, 0)] = {a: ring.one()}
    C[(1, 1)] = {2: ring.one() - s2 * 4, 3: -(t2 * s3) * 4}
    C[(1, 2)] = {3: ring.one() - s2 * 4}
    C[(2, 1)] = dict(C[(1, 2)])
    C = {k: {m: v for m, v in col.items() if v} for k, col in C.items()}
    alg = FDAlgebra(4, ("Gamma0", "Gamma1", "Gamma2", "Gamma3"), C, unit_vector(4, 0), ring)
    q = Fraction(-1, 4)
    z = Fraction(0)
    levels = [(1, [unit_vector(4, 1), unit_vector(4, 2), unit_vector(4, 3)], ((z, z, q), (z, q, z), (q, z, z))),
              (2, [], ()), (3, [], ()), (4, [], ()),
              (5, [unit_vector(4, 0)], ((Fraction(64),),))]
    euler = EulerField.diagonal([1, 0, -1, -2])
    return assemble(alg, coords, euler, 5, levels)


def local_product_direct(target: Target, table: GWTable, order: int) -> MFSData:
    table.validate(target)
    if target == "p3":
        return _p3_direct(table, order)
    return _toric_direct(target, table, order)


# ------------------------------------------ route (b): bundle, field, slice

def local_product_from_bundle(target: Target, table: GWTable, order: int,
                              model: Optional[VModel] = None) -> Tuple[MFSData, MFSData]:
    """(the mixed structure on V, its slice at level 0)."""
    model = model or build_v_model(target)
    qp = quantum_product_v(model, table, order)
    m = mfs_from_nilpotent(qp, model.delta0)
    return m, transversal_slice(m, 0)


def local_product(target: Target, table: GWTable, order: int) -> MFSData:
    """The local Frobenius manifold, computed both ways; raises if they differ."""
    direct = local_product_direct(target, table, order)
    _, sliced = local_product_from_bundle(target, table, order)
    diff = mfs_difference(direct, sliced)
    if diff is not None:
        raise LocalError(f"closed-form product and bundle slice disagree: {diff}")
    return direct


def resolve_target(name: str) -> Target:
    if name == "p3":
        return "p3"
    if name in SURFACES:
        return SURFACES[name]
    raise LocalError(f"unknown surface {name!r}; known: {', '.join(sorted(SURFACES))}, p3")
