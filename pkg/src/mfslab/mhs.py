"""Real mixed Hodge structure on the even cohomology of a polarized surface.

Coordinates are taken in the algebra basis ``(1, n, prim_1..prim_p, n^2)``
of the surface catalog entry.  The real structure is
``A_R = H^even(X, R) * exp(c n)`` with ``c = sqrt(-1)``, spanned by

    v1 = 1 + c n + c^2/2 n^2,   v2 = n + c n^2,   prim_j,   v4 = n^2.

The weight filtration is W_1 = <v2, v4>, W_2 = W_3 = W_1 + prim, W_4 = A and
the Hodge filtration is by cohomological degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .catalog import surface_from_prim
from .frobenius import FrobeniusFiltration, nilpotent_filtration
from .report import Report
from .ringcore import GaussianRational, Subspace, express_in, inverse, leading_principal_minors, matvec
from .ringcore.linalg import transpose
from .ringcore.scalars import I, conj, scalar_to_json


class HodgeError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceHodgeInput:
    prim_pairing: Tuple[Tuple[Fraction, ...], ...]
    K: Fraction

    @property
    def prim_dim(self) -> int:
        return len(self.prim_pairing)

    @classmethod
    def from_json(cls, data: dict) -> "SurfaceHodgeInput":
        from .ringcore.scalars import parse_rational
        prim = tuple(tuple(parse_rational(x) for x in row) for row in data.get("prim_pairing", []))
        if "prim_dim" in data and data["prim_dim"] != len(prim):
            raise HodgeError("prim_dim does not match prim_pairing")
        if any(len(r) != len(prim) for r in prim):
            raise HodgeError("prim_pairing must be square")
        return cls(prim, parse_rational(data["K"]))


@dataclass(frozen=True)
class GradedPiece:
    k: int
    basis: Tuple[Tuple, ...]  # real representatives in W_k, independent mod W_(k-1)
    Q: Tuple[Tuple, ...]  # matrix of Q_k on ``basis``


@dataclass(frozen=True)
class MHSData:
    dim: int
    real_basis: Tuple[Tuple, ...]  # v1, v2, prim..., v4 as coordinate vectors
    W: Dict[int, Subspace]  # k = 0..4
    F: Dict[int, Subspace]  # p = 0..3
    pieces: Dict[int, GradedPiece]  # k = 1, 2, 4 (k = 3 is zero)
    filtration: FrobeniusFiltration
    K: Fraction

    def conjugate(self, v: Sequence) -> Tuple:
        """Complex conjugation with respect to the real structure A_R."""
        B = transpose([list(b) for b in self.real_basis])
        coords = matvec(inverse(B), v)
        return matvec(B, [conj(x) for x in coords])


def _g(x) -> GaussianRational:
    return x if isinstance(x, GaussianRational) else GaussianRational(x)


def _lin(coefs: Sequence, vecs: Sequence[Sequence]) -> Tuple:
    n = len(vecs[0])
    out = [GaussianRational(0)] * n
    for c, v in zip(coefs, vecs):
        if c:
            out = [a + c * b for a, b in zip(out, v)]
    return tuple(out)


def build_mhs(inp: SurfaceHodgeInput) -> MHSData:
    if inp.K <= 0:
        raise HodgeError("K = integral of n^2 must be positive")
    p = inp.prim_dim
    dim = p + 3
    top = dim - 1
    c = I
    e = [tuple(GaussianRational(1 if j == i else 0) for j in range(dim)) for i in range(dim)]
    v1 = _lin([1, c, c * c / 2], [e[0], e[1], e[top]])
    v2 = _lin([1, c], [e[1], e[top]])
    prims = [e[2 + j] for j in range(p)]
    v4 = e[top]
    real_basis = (v1, v2, *prims, v4)
    W = {0: Subspace.zero(dim)}
    W[1] = Subspace.from_vectors(dim, [v2, v4])
    W[2] = W[1].sum(Subspace.from_vectors(dim, prims)) if p else W[1]
    W[3] = W[2]
    W[4] = Subspace.full(dim)
    F = {0: Subspace.full(dim),
         1: Subspace.from_vectors(dim, [e[0], e[1], *prims]),
         2: Subspace.from_vectors(dim, [e[0]]),
         3: Subspace.zero(dim)}
    K = inp.K
    pieces = {
        1: GradedPiece(1, (v2, v4), ((0, -K), (K, 0))),
        2: GradedPiece(2, tuple(prims), tuple(tuple(-x for x in row) for row in inp.prim_pairing)),
        4: GradedPiece(4, (v1,), ((K,),)),
    }
    entry = surface_from_prim(inp.prim_pairing, K)
    filt = nilpotent_filtration(entry.frobenius, entry.nilpotent)
    return MHSData(dim, real_basis, W, F, pieces, filt, K)


def _F(m: MHSData, p: int) -> Subspace:
    if p <= 0:
        return m.F[0]
    if p >= 3:
        return m.F[3]
    return m.F[p]


def _conj_space(m: MHSData, s: Subspace) -> Subspace:
    return Subspace.from_vectors(m.dim, [m.conjugate(v) for v in s.basis])


def hodge_table(m: MHSData) -> Dict[Tuple[int, int], Subspace]:
    """A^{p,q} = F^p Gr_k cap conj(F^q Gr_k) for p + q = k, lifted into W_k.

    The lift is F^p cap conj(F^q) cap W_k when that has the right dimension,
    otherwise the echelon complement of W_(k-1).
    """
    table: Dict[Tuple[int, int], Subspace] = {}
    total = 0
    for k in range(1, 5):
        Wk, Wk1 = m.W[k], m.W[k - 1]
        for p in range(0, k + 1):
            q = k - p
            s1 = _F(m, p).intersect(Wk).sum(Wk1)
            s2 = _conj_space(m, _F(m, q).intersect(Wk)).sum(Wk1)
            cell = s1.intersect(s2)
            d = cell.dim - Wk1.dim
            total += d
            if d == 0:
                table[(p, q)] = Subspace.zero(m.dim)
                continue
            nice = _F(m, p).intersect(_conj_space(m, _F(m, q))).intersect(Wk)
            if nice.dim == d and nice.intersect(Wk1).dim == 0:
                table[(p, q)] = nice
            else:
                table[(p, q)] = Subspace.from_vectors(m.dim, Wk1.complement_basis(cell))
    if total != m.dim:
        raise HodgeError(f"Hodge cells have total dimension {total}, expected {m.dim}")
    return table


def hodge_dims(m: MHSData) -> Dict[Tuple[int, int], int]:
    return {pq: s.dim for pq, s in hodge_table(m).items()}


def _piece_coords(m: MHSData, k: int, v: Sequence) -> Tuple:
    piece = m.pieces[k]
    vecs = list(piece.basis) + list(m.W[k - 1].basis)
    c = express_in(vecs, v)
    if c is None:
        raise HodgeError(f"vector not in W_{k}")
    return tuple(c[: len(piece.basis)])


def weil_operator(m: MHSData, k: int) -> List[List]:
    """Matrix of C = i^(p-q) on Gr_k in the real basis of the piece."""
    table = hodge_table(m)
    piece = m.pieces[k]
    n = len(piece.basis)
    cell_vecs, eig = [], []
    for (p, q), s in table.items():
        if p + q != k:
            continue
        for v in s.basis:
            cell_vecs.append(_piece_coords(m, k, v))
            eig.append(I ** ((p - q) % 4))
    if len(cell_vecs) != n:
        raise HodgeError(f"Hodge cells do not span Gr_{k}")
    P = transpose([list(v) for v in cell_vecs])  # columns: cell vectors
    D = [[eig[i] if i == j else GaussianRational(0) for j in range(n)] for i in range(n)]
    from .ringcore import matmul
    return matmul(matmul(P, D), inverse(P))


def _bil(M, x, y):
    return sum((x[i] * M[i][j] * y[j] for i in range(len(x)) for j in range(len(y))), GaussianRational(0))


def q_from_pairings(m: MHSData, k: int) -> List[List]:
    """Q_k(x, y) = (i^k / 2) [ (Cx, y)_(k-1) + (-1)^k (x, Cy)_(k-1) ] on the piece basis."""
    piece = m.pieces[k]
    C = weil_operator(m, k)
    n = len(piece.basis)
    B = [list(v) for v in piece.basis]

    def vec(coords):
        return _lin(coords, B) if n else ()

    pref = I ** k / 2
    sign = 1 if k % 2 == 0 else -1
    out = []
    for a in range(n):
        row = []
        ea = [GaussianRational(1 if i == a else 0) for i in range(n)]
        Cea = vec(matvec(C, ea))
        for b in range(n):
            eb = [GaussianRational(1 if i == b else 0) for i in range(n)]
            Ceb = vec(matvec(C, eb))
            val = m.filtration.pair(k - 1, Cea, vec(eb)) + sign * m.filtration.pair(k - 1, vec(ea), Ceb)
            row.append(_g(pref * val))
        out.append(row)
    return out


def hermitian_form(m: MHSData, k: int) -> List[List]:
    """H_k(x, y) = Q_k(Cx, conj(y)) on the real piece basis."""
    piece = m.pieces[k]
    C = weil_operator(m, k)
    Q = [[_g(x) for x in row] for row in piece.Q]
    n = len(piece.basis)
    out = []
    for a in range(n):
        ca = [C[i][a] for i in range(n)]
        row = []
        for b in range(n):
            eb = [GaussianRational(1 if i == b else 0) for i in range(n)]
            row.append(_bil(Q, ca, eb))
        out.append(row)
    return out


def _mat_json(M):
    return [[scalar_to_json(_g(x)) for x in row] for row in M]


def polarization_check(m: MHSData) -> Report:
    rep = Report()
    filt = m.filtration
    wit = None
    for k in (1, 2, 3, 4):
        if filt.level(k - 1).space != m.W[k]:
            wit = {"k": k}
    rep.add("weight_equals_shifted_ideal_filtration", wit is None, wit)
    rep.skip("b1_even_asserted_by_caller")
    for k in (1, 2, 4):
        piece = m.pieces[k]
        n = len(piece.basis)
        sign = 1 if k % 2 == 0 else -1
        Q = piece.Q
        bad = next(({"i": i, "j": j} for i in range(n) for j in range(n) if Q[i][j] != sign * Q[j][i]), None)
        rep.add(f"Q{k}_symmetry_sign", bad is None, bad)
        general = q_from_pairings(m, k)
        same = all(_g(general[i][j]) == _g(Q[i][j]) for i in range(n) for j in range(n))
        rep.add(f"Q{k}_matches_pairing_formula", same,
                None if same else {"explicit": _mat_json(Q), "from_pairings": _mat_json(general)})
        H = hermitian_form(m, k)
        herm = all(H[i][j] == H[j][i].conjugate() for i in range(n) for j in range(n))
        rep.add(f"H{k}_hermitian", herm, None if herm else {"H": _mat_json(H)})
        minors = leading_principal_minors(H) if n else []
        posdef = all(_g(x).is_real() and _g(x).re > 0 for x in minors)
        rep.add(f"H{k}_positive_definite", posdef,
                None if posdef else {"minors": [scalar_to_json(_g(x)) for x in minors]})
    return rep


def mhs_to_json(m: MHSData) -> dict:
    dims = hodge_dims(m)
    return {
        "hodge_dims": [{"p": p, "q": q, "dim": d} for (p, q), d in sorted(dims.items())],
        "Q": {str(k): _mat_json(piece.Q) for k, piece in sorted(m.pieces.items())},
        "weights": {str(k): [[scalar_to_json(_g(x)) for x in v] for v in s.basis] for k, s in sorted(m.W.items())},
    }
