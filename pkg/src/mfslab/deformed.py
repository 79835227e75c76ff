"""The deformed connection on each graded piece and deformed flat coordinates.

On level k, with a, c running over the flat indices of that level, the
connection matrices (acting on the column index) are

    A_{lb}[c][a]   = hbar * C_{ka,lb}^{kc}
    A_hbar[c][a]   = U[c][a] + (V[c][a] - k/2 delta_ca) / hbar

with U = E o (.) and V = (nabla E) - (2-D)/2 restricted to I_k / I_(k-1).
A candidate function f is a deformed flat coordinate of level k when
xi_a = d f / d t^{ka} satisfies d xi_a / dX = sum_c A_X[c][a] xi_c for every
direction X (all flat coordinates and hbar), and f does not depend on the
flat coordinates of lower levels.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .localqh import GWTable, LocalError, SurfaceData
from .mfs import MFSData, MFSError, at_order
from .report import Report
from .ringcore import HbarLaurent, Series, SeriesRing, hbar_derive, hbar_dhbar
from .ringcore.scalars import rational_to_str
from .serialize import value_to_json


class DeformedError(ValueError):
    pass


Matrix = List[List]


# ------------------------------------------------------------- U and V

@dataclass(frozen=True)
class UVOperators:
    """Per level: U (series entries) and V (rational entries), indexed [c][a]."""

    U: Dict[int, Tuple[Tuple[object, ...], ...]]
    V: Dict[int, Tuple[Tuple[Fraction, ...], ...]]
    report: Report

    def to_json(self) -> dict:
        return {
            "levels": [
                {"k": k,
                 "U": [[value_to_json(x) for x in row] for row in self.U[k]],
                 "V": [[rational_to_str(x) for x in row] for row in self.V[k]]}
                for k in sorted(self.U)
            ],
            "report": self.report.to_json(),
        }


def _euler_o(m: MFSData, a: int) -> List:
    """Flat components of E o d_a."""
    out = [Fraction(0)] * m.dim
    for lb in range(m.dim):
        E = m.euler_component(lb)
        if not E:
            continue
        for c, v in m.C.get((a, lb), {}).items():
            out[c] = out[c] + E * v
    return out


def uv_operators(m: MFSData) -> UVOperators:
    rep = Report()
    lev = m.level_of
    D = Fraction(m.D)
    a_lin = m.euler.linear
    U: Dict[int, Tuple] = {}
    V: Dict[int, Tuple] = {}
    closure = None
    for lv in m.levels:
        if not lv.labels:
            continue
        idx = m.indices(lv.k)
        cols = {a: _euler_o(m, a) for a in idx}
        for a in idx:
            for c in range(m.dim):
                if lev[c] > lv.k and closure is None:
                    if cols[a][c] or a_lin[c][a]:
                        closure = {"k": lv.k, "x": m.labels[a], "component": m.labels[c]}
        U[lv.k] = tuple(tuple(cols[a][c] for a in idx) for c in idx)
        V[lv.k] = tuple(tuple(a_lin[c][a] - ((2 - D) / 2 if c == a else 0) for a in idx) for c in idx)
    rep.add("closure", closure is None, closure)
    const = all(not isinstance(x, Series) for Vk in V.values() for row in Vk for x in row)
    rep.add("V_constant", const)
    wit = None
    for lv in m.levels:
        if lv.k not in V:
            continue
        Vk, eta, r = V[lv.k], lv.eta, len(lv.labels)
        for p in range(r):
            for q in range(r):
                lhs = sum((Vk[s][p] * eta[s][q] + eta[p][s] * Vk[s][q] for s in range(r)), Fraction(0))
                if lhs != lv.k * eta[p][q]:
                    wit = {"k": lv.k, "a": lv.labels[p], "b": lv.labels[q], "lhs": rational_to_str(lhs),
                           "rhs": rational_to_str(lv.k * eta[p][q])}
        if wit:
            break
    rep.add("V_skew_identity", wit is None, wit)
    if closure is not None:
        raise DeformedError(f"U or V does not preserve the filtration: {closure}")
    return UVOperators(U, V, rep)


# ------------------------------------------------------ the connection

@dataclass(frozen=True)
class DeformedConnection:
    k: int
    labels: Tuple[str, ...]  # flat directions, all levels
    directions: Tuple[Tuple[Tuple[HbarLaurent, ...], ...], ...]  # A_X for each flat direction X
    hbar: Tuple[Tuple[HbarLaurent, ...], ...]  # A_hbar


def _hl(ring: SeriesRing, x, h2: int = 0) -> HbarLaurent:
    if isinstance(x, HbarLaurent):
        return x
    s = x if isinstance(x, Series) else ring.const(x)
    return HbarLaurent(ring, {(h2, 0): s})


def deformed_connection(m: MFSData, k: int, uv: Optional[UVOperators] = None) -> DeformedConnection:
    uv = uv or uv_operators(m)
    if k not in uv.U:
        raise DeformedError(f"level {k} is empty or absent")
    idx = m.indices(k)
    ring = m.ring
    dirs = []
    for lb in range(m.dim):
        dirs.append(tuple(tuple(_hl(ring, m.c(a, lb, c), 2) for a in idx) for c in idx))
    U, V = uv.U[k], uv.V[k]
    A_h = []
    for ci in range(len(idx)):
        row = []
        for ai in range(len(idx)):
            shift = V[ci][ai] - (Fraction(k, 2) if ci == ai else 0)
            row.append(_hl(ring, U[ci][ai]) + _hl(ring, shift, -2))
        A_h.append(tuple(row))
    return DeformedConnection(k, m.labels, tuple(dirs), tuple(A_h))


def _flat_d(m: MFSData, f: HbarLaurent, a: int) -> HbarLaurent:
    out = HbarLaurent(f.ring, {}, f.z_coord)
    for p in range(m.dim):
        w = m.frame[p][a]
        if w:
            out = out + hbar_derive(f, m.coords[p]) * w
    return out


def _mat_d(m: MFSData, A, direction) -> List[List[HbarLaurent]]:
    if direction == "hbar":
        return [[hbar_dhbar(x) for x in row] for row in A]
    return [[_flat_d(m, x, direction) for x in row] for row in A]


def _mat_mul(A, B, ring):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            s = HbarLaurent(ring)
            for p in range(n):
                if A[i][p] and B[p][j]:
                    s = s + A[i][p] * B[p][j]
            row.append(s)
        out.append(row)
    return out


def _hl_json(x: HbarLaurent) -> list:
    return [{"hbar2": h, "z": p, "series": value_to_json(s)} for (h, p), s in sorted(x.terms.items())]


def curvature_check(m: MFSData, k: int, order: Optional[int] = None) -> Report:
    """All components of the curvature on level k, which must vanish identically."""
    if order is not None:
        m = at_order(m, order)
    conn = deformed_connection(m, k)
    ring = m.ring
    rep = Report(meta={"k": k, "order": ring.order})
    names = list(m.labels) + ["hbar"]
    mats = list(conn.directions) + [conn.hbar]
    keys = list(range(m.dim)) + ["hbar"]
    nonzero = []
    for x in range(len(keys)):
        for y in range(x + 1, len(keys)):
            AX, AY = mats[x], mats[y]
            dXAY = _mat_d(m, AY, keys[x])
            dYAX = _mat_d(m, AX, keys[y])
            XY = _mat_mul(AX, AY, ring)
            YX = _mat_mul(AY, AX, ring)
            n = len(AX)
            for c in range(n):
                for a in range(n):
                    val = dXAY[c][a] - dYAX[c][a] + XY[c][a] - YX[c][a]
                    if val:
                        nonzero.append({"X": names[x], "Y": names[y], "row": c, "col": a, "value": _hl_json(val)})
    rep.add("curvature_zero", not nonzero, nonzero[0] if nonzero else None)
    rep.meta["nonzero_components"] = len(nonzero)
    return rep


# --------------------------------------------------------- candidates

@dataclass(frozen=True)
class CoordinateCandidate:
    """Functions claimed to be deformed flat coordinates of level k."""

    k: int
    functions: Tuple[Tuple[str, HbarLaurent], ...]

    def to_json(self) -> dict:
        return {"k": self.k, "functions": [{"label": lab, "value": f.to_json()} for lab, f in self.functions]}

    @classmethod
    def from_json(cls, data: Mapping) -> "CoordinateCandidate":
        funcs = tuple((str(e["label"]), HbarLaurent.from_json(e["value"])) for e in data["functions"])
        return cls(int(data["k"]), funcs)


CandidateSet = Tuple[CoordinateCandidate, ...]


def candidates_to_json(cands: Sequence[CoordinateCandidate]) -> dict:
    return {"levels": [c.to_json() for c in cands]}


def candidates_from_json(data: Mapping) -> CandidateSet:
    return tuple(CoordinateCandidate.from_json(e) for e in data["levels"])


def _det(M, ring) -> HbarLaurent:
    n = len(M)
    total = HbarLaurent(ring)
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = HbarLaurent(ring, {(0, 0): ring.one()})
        for i in range(n):
            term = term * M[i][perm[i]]
        total = total + term * sign
    return total


def verify_deformed_coords(m: MFSData, cand: Union[CoordinateCandidate, Sequence[CoordinateCandidate]],
                           order: Optional[int] = None) -> Report:
    """Flat-dual equations, the Ann condition and independence, at the truncation order."""
    if order is not None:
        m = at_order(m, order)
    cands = [cand] if isinstance(cand, CoordinateCandidate) else list(cand)
    rep = Report(meta={"order": m.ring.order})
    uv = uv_operators(m)
    lev = m.level_of
    for cd in cands:
        k = cd.k
        tag = f"level{k}."
        if k not in uv.U:
            rep.add(tag + "level_exists", False, {"k": k})
            continue
        conn = deformed_connection(m, k, uv)
        idx = m.indices(k)
        xis = []
        ann = space = hb = None
        for label, f0 in cd.functions:
            f = _move(f0, m.ring)
            for l in range(m.dim):
                if lev[l] < k and ann is None:
                    d = _flat_d(m, f, l)
                    if d:
                        ann = {"function": label, "direction": m.labels[l], "residual": _hl_json(d)}
            xi = [_flat_d(m, f, a) for a in idx]
            xis.append(xi)
            for lb in range(m.dim):
                if space is not None:
                    break
                A = conn.directions[lb]
                for ai in range(len(idx)):
                    r = _flat_d(m, xi[ai], lb)
                    for ci in range(len(idx)):
                        if A[ci][ai]:
                            r = r - A[ci][ai] * xi[ci]
                    if r:
                        space = {"function": label, "direction": m.labels[lb], "component": m.labels[idx[ai]],
                                 "residual": _hl_json(r)}
                        break
            if hb is None:
                for ai in range(len(idx)):
                    r = hbar_dhbar(xi[ai])
                    for ci in range(len(idx)):
                        if conn.hbar[ci][ai]:
                            r = r - conn.hbar[ci][ai] * xi[ci]
                    if r:
                        hb = {"function": label, "component": m.labels[idx[ai]], "residual": _hl_json(r)}
                        break
        rep.add(tag + "ann_condition", ann is None, ann)
        rep.add(tag + "flat_dual_space", space is None, space)
        rep.add(tag + "flat_dual_hbar", hb is None, hb)
        if len(xis) != len(idx):
            rep.add(tag + "independent", False, {"expected": len(idx), "given": len(xis)})
        else:
            d = _det(xis, m.ring)
            rep.add(tag + "independent", bool(d), None if d else {"det": "0"})
    return rep


def _move(f: HbarLaurent, ring: SeriesRing) -> HbarLaurent:
    if f.ring == ring:
        return f
    if f.ring.poly_vars == ring.poly_vars and f.ring.exp_vars == ring.exp_vars:
        from .ringcore import rebase
        return HbarLaurent(ring, {k: rebase(s, ring) for k, s in f.terms.items()}, f.z_coord)
    raise DeformedError("candidate ring does not match the structure's ring")


# ------------------------------------------------- explicit coordinates

def _zhl(ring: SeriesRing, parts: Mapping[int, Series]) -> HbarLaurent:
    """exp(hbar t0) * sum_h hbar^(h/2) parts[h]."""
    return HbarLaurent(ring, {(h, 1): s for h, s in parts.items()}, "t0")


def distinguished_index(s: SurfaceData) -> int:
    """0-based index playing the role of r: largest |b_dual|, last among ties."""
    bd = s.b_dual
    best = max(abs(x) for x in bd)
    if best == 0:
        raise DeformedError("every b_dual vanishes; no coordinate change is available")
    return max(i for i, x in enumerate(bd) if abs(x) == best)


def toric_u_coordinates(s: SurfaceData, ring: SeriesRing) -> Dict[int, Series]:
    """u^k as linear series in t^1..t^r (keys are 1-based basis indices)."""
    r, bd, b, kap = s.r, s.b_dual, s.b, s.kappa
    rho = distinguished_index(s)
    t = [ring.var(f"t{i + 1}") for i in range(r)]
    u: Dict[int, Series] = {}
    ur = ring.zero()
    for i in range(r):
        ur = ur + t[i] * Fraction(-bd[i], kap)
    u[rho + 1] = ur
    for k in range(r):
        if k == rho:
            continue
        coef_k = sum(b[j] * bd[j] for j in range(r) if j != k)
        val = t[k] * coef_k
        for j in range(r):
            if j != k:
                val = val - t[j] * (b[k] * bd[j])
        u[k + 1] = val * Fraction(1, kap * bd[rho])
    return u


def toric_flat_coords(s: SurfaceData, table: GWTable, order: int, literal: bool = False) -> CandidateSet:
    """Deformed flat coordinates of the local product of a toric surface.

    ``literal=True`` emits the commonly quoted exp(hbar t0) for the top
    coordinate; the default emits exp(hbar t0)/hbar, which is the function
    that satisfies the hbar equation at the top level.
    """
    table.validate(s)
    r = s.r
    coords = tuple(f"t{a}" for a in range(r + 2))
    ring = SeriesRing(coords, tuple((f"Q{i}", f"t{i}") for i in range(1, r + 1)), order)
    u = toric_u_coordinates(s, ring)
    rho = distinguished_index(s) + 1
    corr = ring.zero()
    for beta, N in table.entries.items():
        if sum(beta) <= order and N:
            corr = corr + ring.qbeta(beta, N * sum(x * y for x, y in zip(s.b, beta)))
    inner = u[rho] * u[rho] * Fraction(s.kappa, 2) - corr
    top = _zhl(ring, {-1: ring.var(f"t{r + 1}"), 1: inner})
    level1 = CoordinateCandidate(1, ((f"t{r + 1}~", top), (f"u{rho}~", _zhl(ring, {1: u[rho]}))))
    level2 = CoordinateCandidate(2, tuple((f"u{k}~", _zhl(ring, {0: u[k]}))
                                          for k in sorted(u) if k != rho))
    t0 = _zhl(ring, {0 if literal else -2: ring.one()})
    level4 = CoordinateCandidate(4, (("t0~", t0),))
    return tuple(c for c in (level1, level2, level4) if c.functions)


def p3_flat_coords(table: GWTable, order: int) -> CandidateSet:
    """Deformed flat coordinates of the local product of P^3."""
    table.validate("p3")
    ring = SeriesRing(("t0", "t1", "t2", "t3"), (("Q1", "t1"),), order)
    t1, t2, t3 = (ring.var(f"t{i}") for i in (1, 2, 3))
    entries = {b: N for (b,), N in table.entries.items() if N and b <= order}
    sum_N = ring.zero()
    sum_bN = ring.zero()
    sum_shift = ring.zero()
    for b, N in entries.items():
        q = ring.qbeta((b,), N)
        sum_N = sum_N + q
        sum_bN = sum_bN + q * b
        sum_shift = sum_shift + q * t1 - q * Fraction(1, b)
    double = ring.zero()
    for b, Nb in entries.items():
        for g, Ng in entries.items():
            if b + g <= order:
                double = double + ring.qbeta((b + g,), Fraction(b * g, b + g) * Nb * Ng)
    tt1 = _zhl(ring, {2: t1})
    tt2 = _zhl(ring, {0: t2, 2: t1 * t1 * Fraction(1, 2) - sum_N * 4})
    bracket = t1 * t1 * t1 * Fraction(1, 3) - sum_shift * 8 + double * 16
    tt3 = _zhl(ring, {-2: t3, 0: t1 * t2 - t2 * sum_bN * 4, 2: bracket * Fraction(1, 2)})
    tt0 = _zhl(ring, {-2: ring.one()})
    return (CoordinateCandidate(1, (("t1~", tt1), ("t2~", tt2), ("t3~", tt3))),
            CoordinateCandidate(5, (("t0~", tt0),)))
