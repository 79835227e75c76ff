"""Named example Frobenius algebras, each with its distinguished nilpotent element.

Entries:

- ``pn(d, m)``: H*(P^(d-1)) = C[h]/(h^d) with n = m*h.
- ``surface``: even cohomology of a polarized surface, either from primitive
  data (``prim_pairing``, ``K``) or from an intersection matrix ``c`` and
  anticanonical coefficients ``b`` with n = c1(K_S).
- ``wps(d)``: orbifold cohomology C[H,E]/(H^d - E^d, HE) of P(1,...,1,d), n = d*H.
- ``p1124``: orbifold cohomology of P(1,1,2,4), n = 4H.
- ``p2_local``, ``f0_local``, ``p3_local``: classical cohomology of the
  projective-bundle models, n = Delta_0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .fdalg import FDAlgebra, algebra_from_rule, multiply
from .frobenius import FrobeniusAlgebra
from .ringcore.linalg import unit_vector


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    frobenius: FrobeniusAlgebra
    nilpotent: Optional[Tuple]
    params: Dict

    @property
    def algebra(self) -> FDAlgebra:
        return self.frobenius.algebra


def frobenius_from_trace(algebra: FDAlgebra, trace: Sequence) -> FrobeniusAlgebra:
    """Pairing <x, y> = trace(x o y) for a linear functional ``trace``."""
    n = algebra.dim
    g = [[sum((c * trace[k] for k, c in algebra.C.get((i, j), {}).items()), Fraction(0))
          for j in range(n)] for i in range(n)]
    return FrobeniusAlgebra(algebra, g)


def _vec(n: int, entries: Dict[int, object]) -> Tuple:
    out = [Fraction(0)] * n
    for k, v in entries.items():
        out[k] = Fraction(v)
    return tuple(out)


def pn(d: int, m: int) -> CatalogEntry:
    """C[h]/(h^d) with <h^i, h^j> = delta_(i+j, d-1) and n = m h."""
    if d < 2:
        raise CatalogError("pn needs d >= 2")
    if m == 0:
        raise CatalogError("pn needs m != 0")
    labels = ["1"] + [f"h^{i}" if i > 1 else "h" for i in range(1, d)]
    alg = algebra_from_rule(labels, lambda i, j: {i + j: 1} if i + j < d else {})
    fa = frobenius_from_trace(alg, _vec(d, {d - 1: 1}))
    return CatalogEntry("pn", fa, _vec(d, {1: m}), {"d": d, "m": m})


def surface_from_prim(prim_pairing: Sequence[Sequence], K) -> CatalogEntry:
    """Basis (1, n, prim_1..prim_p, n^2); prim_i o prim_j = (P_ij / K) n^2."""
    K = Fraction(K)
    if K == 0:
        raise CatalogError("K must be nonzero")
    p = len(prim_pairing)
    dim = p + 3
    top = dim - 1
    labels = ["1", "n"] + [f"p{i + 1}" for i in range(p)] + ["n^2"]

    def rule(i, j):
        if i == 0:
            return {j: 1}
        if j == 0:
            return {i: 1}
        if i == 1 and j == 1:
            return {top: 1}
        if 2 <= i < top and 2 <= j < top:
            v = Fraction(prim_pairing[i - 2][j - 2]) / K
            return {top: v} if v else {}
        return {}

    alg = algebra_from_rule(labels, rule)
    fa = frobenius_from_trace(alg, _vec(dim, {top: K}))
    return CatalogEntry("surface", fa, _vec(dim, {1: 1}),
                        {"prim_pairing": [[str(Fraction(x)) for x in r] for r in prim_pairing], "K": str(K)})


def surface_from_cb(c: Sequence[Sequence[int]], b: Sequence[int]) -> CatalogEntry:
    """Basis (1, gamma_1..gamma_r, pt); gamma_i o gamma_j = c_ij pt; n = -sum b_i gamma_i."""
    r = len(c)
    dim = r + 2
    top = r + 1
    labels = ["1"] + [f"g{i + 1}" for i in range(r)] + ["pt"]

    def rule(i, j):
        if i == 0:
            return {j: 1}
        if j == 0:
            return {i: 1}
        if 1 <= i <= r and 1 <= j <= r and c[i - 1][j - 1]:
            return {top: c[i - 1][j - 1]}
        return {}

    alg = algebra_from_rule(labels, rule)
    fa = frobenius_from_trace(alg, _vec(dim, {top: 1}))
    n = _vec(dim, {i + 1: -b[i] for i in range(r)})
    return CatalogEntry("surface", fa, n, {"c": [list(map(int, row)) for row in c], "b": list(map(int, b))})


def wps(d: int) -> CatalogEntry:
    """C[H,E]/(H^d - E^d, HE), basis 1, H..H^d, E..E^(d-1); <H^d> = 1/d; n = dH."""
    if d < 2:
        raise CatalogError("wps needs d >= 2")
    labels = ["1"] + [f"H^{i}" if i > 1 else "H" for i in range(1, d + 1)] + \
             [f"E^{i}" if i > 1 else "E" for i in range(1, d)]
    # index of H^i is i (0..d); index of E^i is d+i (1..d-1); E^d = H^d.

    def decode(idx):
        if idx <= d:
            return ("H", idx)
        return ("E", idx - d)

    def encode(kind, e):
        if e == 0:
            return 0
        if e > d:
            return None
        if kind == "H" or e == d:
            return e
        return d + e

    def rule(i, j):
        ki, ei = decode(i)
        kj, ej = decode(j)
        if ei == 0:
            return {j: 1}
        if ej == 0:
            return {i: 1}
        if ki != kj:
            return {}
        idx = encode(ki, ei + ej)
        return {idx: 1} if idx is not None else {}

    alg = algebra_from_rule(labels, rule)
    fa = frobenius_from_trace(alg, _vec(len(labels), {d: Fraction(1, d)}))
    return CatalogEntry("wps", fa, _vec(len(labels), {1: d}), {"d": d})


P1124_LABELS = ["1", "H", "E1", "E2", "H^2", "HE2", "E1E2", "H^3"]
_P1124_INDEX = {(0, 0, 0): 0, (1, 0, 0): 1, (0, 1, 0): 2, (0, 0, 1): 3,
                (2, 0, 0): 4, (1, 0, 1): 5, (0, 1, 1): 6, (3, 0, 0): 7}


def _p1124_normal(a: int, b: int, c: int) -> Tuple[Fraction, Tuple[int, int, int]] | None:
    """Normal form of H^a E1^b E2^c under E1^2 = 2 H E2, E2^2 = H^2, H E1 = 0, H^2 E2 = 0."""
    coef = Fraction(1)
    while True:
        if a and b:
            return None
        if b >= 2:
            b, a, c, coef = b - 2, a + 1, c + 1, coef * 2
            continue
        if c >= 2:
            c, a = c - 2, a + 2
            continue
        break
    if a >= 2 and c >= 1:
        return None
    if a + b + c > 3 or (a, b, c) not in _P1124_INDEX:
        return None
    return coef, (a, b, c)


def p1124() -> CatalogEntry:
    inv = {v: k for k, v in _P1124_INDEX.items()}

    def rule(i, j):
        ai, bi, ci = inv[i]
        aj, bj, cj = inv[j]
        nf = _p1124_normal(ai + aj, bi + bj, ci + cj)
        if nf is None:
            return {}
        coef, mono = nf
        return {_P1124_INDEX[mono]: coef}

    alg = algebra_from_rule(P1124_LABELS, rule)
    fa = frobenius_from_trace(alg, _vec(8, {7: Fraction(1, 8)}))
    return CatalogEntry("p1124", fa, _vec(8, {1: 4}), {})


def _local(name: str) -> CatalogEntry:
    from . import localqh
    if name == "p3_local":
        vm = localqh.build_v_model("p3")
    else:
        vm = localqh.build_v_model(localqh.SURFACES[name.split("_")[0]])
    return CatalogEntry(name, vm.frobenius, vm.delta0, {})


BUILDERS: Dict[str, Callable[..., CatalogEntry]] = {
    "pn": pn,
    "wps": wps,
    "p1124": p1124,
    "p2_local": lambda: _local("p2_local"),
    "f0_local": lambda: _local("f0_local"),
    "p3_local": lambda: _local("p3_local"),
}


def catalog(name: str, **params) -> CatalogEntry:
    if name == "surface":
        if "prim_pairing" in params:
            return surface_from_prim(params["prim_pairing"], params["K"])
        if "c" in params and "b" in params:
            return surface_from_cb(params["c"], params["b"])
        raise CatalogError("surface needs prim_pairing and K, or c and b")
    if name not in BUILDERS:
        raise CatalogError(f"unknown catalog entry {name!r}")
    try:
        return BUILDERS[name](**params)
    except TypeError as exc:
        raise CatalogError(f"bad parameters for {name}: {exc}") from exc


def default_entries() -> List[CatalogEntry]:
    """Every catalog example with representative parameters."""
    return [
        pn(2, 1), pn(3, 1), pn(4, -4), pn(5, 2),
        surface_from_prim([[-2]], 2),
        surface_from_cb([[1]], [3]),
        wps(2), wps(3), wps(4),
        p1124(),
        _local("p2_local"), _local("f0_local"), _local("p3_local"),
    ]
