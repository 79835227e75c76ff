"""Frobenius algebras, Frobenius filtrations and their constructions.

A Frobenius filtration is a chain of ideals ``I_k`` together with a
nondegenerate symmetric pairing on every graded piece ``I_k / I_(k-1)``
which is invariant under multiplication by the algebra.  Pairings are
stored as matrices on an explicit complement basis of ``I_(k-1)`` in ``I_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .fdalg import (
    AlgebraError,
    FDAlgebra,
    constant_part,
    ideal_generated,
    is_ideal,
    multiply,
    quotient_algebra,
)
from .report import Report
from .ringcore import Subspace, express_in, is_nondegenerate, kernel_basis, matmul, matpow, matvec
from .ringcore.linalg import bilinear, identity, is_zero_matrix, transpose, unit_vector
from .ringcore.scalars import rational_to_str


class FiltrationError(ValueError):
    pass


def _s(v) -> list:
    return [rational_to_str(x) for x in v]


@dataclass(frozen=True)
class FrobeniusAlgebra:
    algebra: FDAlgebra
    pairing: List[List]

    def pair(self, x, y):
        return bilinear(self.pairing, x, y)


def frobenius_check(f: FrobeniusAlgebra) -> Report:
    """Symmetry and nondegeneracy of the pairing and <x o y, z> = <x, y o z>."""
    a, g = f.algebra, f.pairing
    rep = Report()
    n = a.dim
    if len(g) != n or any(len(r) != n for r in g):
        rep.add("pairing_shape", False, {"expected": n})
        return rep
    wit = next(({"i": i, "j": j} for i in range(n) for j in range(i + 1, n) if g[i][j] != g[j][i]), None)
    rep.add("symmetric", wit is None, wit)
    rep.add("nondegenerate", is_nondegenerate(g), None if is_nondegenerate(g) else {"det": "0"})
    wit = None
    for i in range(n):
        for j in range(n):
            xy = a.product_basis(i, j)
            for k in range(n):
                lhs = bilinear(g, xy, unit_vector(n, k))
                rhs = bilinear(g, unit_vector(n, i), a.product_basis(j, k))
                if lhs != rhs:
                    wit = {"i": i, "j": j, "k": k}
                    break
            if wit:
                break
        if wit:
            break
    rep.add("frobenius_property", wit is None, wit)
    return rep


@dataclass(frozen=True)
class Level:
    k: int
    space: Subspace  # I_k
    graded_basis: Tuple[Tuple, ...]  # complement of I_(k-1) inside I_k
    pairing: Tuple[Tuple, ...]  # Gram matrix on graded_basis


@dataclass(frozen=True)
class FrobeniusFiltration:
    """Levels in increasing order of ``k``; the level before the first is 0."""

    algebra: FDAlgebra
    levels: Tuple[Level, ...]

    def level(self, k: int) -> Level:
        for lv in self.levels:
            if lv.k == k:
                return lv
        raise FiltrationError(f"no level {k}")

    def below(self, k: int) -> Subspace:
        """I_(k-1)."""
        prev = Subspace.zero(self.algebra.dim)
        for lv in self.levels:
            if lv.k == k:
                return prev
            prev = lv.space
        raise FiltrationError(f"no level {k}")

    def graded_coords(self, k: int, x: Sequence) -> Tuple:
        """Coordinates of ``x mod I_(k-1)`` in the graded basis of level k."""
        lv = self.level(k)
        prev = self.below(k)
        vecs = list(lv.graded_basis) + list(prev.basis)
        c = express_in(vecs, x)
        if c is None:
            raise FiltrationError(f"vector not in I_{k}")
        return tuple(c[: len(lv.graded_basis)])

    def pair(self, k: int, x: Sequence, y: Sequence):
        lv = self.level(k)
        return bilinear(lv.pairing, self.graded_coords(k, x), self.graded_coords(k, y))

    def to_json(self) -> dict:
        return {
            "levels": [
                {
                    "k": lv.k,
                    "ideal": [_s(v) for v in lv.space.basis],
                    "basis": [_s(v) for v in lv.graded_basis],
                    "pairing": [_s(r) for r in lv.pairing],
                }
                for lv in self.levels
            ]
        }


def make_level(k: int, space: Subspace, prev: Subspace, pairing_fn) -> Level:
    basis = tuple(tuple(v) for v in prev.complement_basis(space))
    gram = tuple(tuple(pairing_fn(x, y) for y in basis) for x in basis)
    return Level(k, space, basis, gram)


def filtration_check(filt: FrobeniusFiltration) -> Report:
    """Increasing, exhaustive, ideals, and every graded piece a Frobenius ideal."""
    a = constant_part(filt.algebra)
    n = a.dim
    rep = Report()
    prev = Subspace.zero(n)
    wit = None
    for lv in filt.levels:
        if not lv.space.contains_subspace(prev):
            wit = {"k": lv.k}
            break
        prev = lv.space
    rep.add("increasing", wit is None, wit)
    top = filt.levels[-1].space if filt.levels else Subspace.zero(n)
    rep.add("exhaustive", top == Subspace.full(n), None if top == Subspace.full(n) else {"top_dim": top.dim})
    wit = None
    for lv in filt.levels:
        w = is_ideal(a, lv.space)
        if w is not None:
            wit = {"k": lv.k, **w}
            break
    rep.add("ideals", wit is None, wit)
    sym = nondeg = frob = None
    for lv in filt.levels:
        g = lv.pairing
        m = len(g)
        if sym is None:
            for i in range(m):
                for j in range(m):
                    if g[i][j] != g[j][i]:
                        sym = {"k": lv.k, "i": i, "j": j}
        if nondeg is None and m and not is_nondegenerate([list(r) for r in g]):
            nondeg = {"k": lv.k}
        if frob is None:
            for b in range(n):
                e = unit_vector(n, b)
                for i, x in enumerate(lv.graded_basis):
                    ax = multiply(a, e, x)
                    for j, y in enumerate(lv.graded_basis):
                        ay = multiply(a, e, y)
                        if filt.pair(lv.k, ax, y) != filt.pair(lv.k, x, ay):
                            frob = {"k": lv.k, "a": b, "x": i, "y": j}
                            break
                    if frob:
                        break
                if frob:
                    break
    rep.add("symmetric", sym is None, sym)
    rep.add("nondegenerate", nondeg is None, nondeg)
    rep.add("frobenius_ideal", frob is None, frob)
    return rep


def powers(a: FDAlgebra, n: Sequence, upto: int) -> List[Tuple]:
    out = [tuple(a.unit)]
    for _ in range(upto):
        out.append(multiply(a, out[-1], n))
    return out


def nilpotent_order(f: FrobeniusAlgebra | FDAlgebra, n: Sequence) -> int:
    """Least d with n^d = 0; raises when no power up to dim+1 vanishes."""
    a = f.algebra if isinstance(f, FrobeniusAlgebra) else f
    p = tuple(a.unit)
    for d in range(1, a.dim + 2):
        p = multiply(a, p, n)
        if not any(p):
            return d
    raise FiltrationError("element is not nilpotent")


def mult_matrix_constant(a: FDAlgebra, n: Sequence) -> List[List]:
    m = a.mult_matrix(n)
    from .ringcore import Series
    out = []
    for row in m:
        r = []
        for x in row:
            if isinstance(x, Series):
                if not x.is_constant():
                    raise FiltrationError("multiplication by n is not a constant matrix")
                x = x.constant_term()
            r.append(x)
        out.append(r)
    return out


@dataclass(frozen=True)
class NilpotentData:
    """Ingredients of the nilpotent construction, kept for reuse."""

    order: int
    N: List[List]  # matrix of n o
    image: Subspace  # I = (n) = Im N
    kernels: Tuple[Subspace, ...]  # J_0 .. J_d


def nilpotent_data(f: FrobeniusAlgebra, n: Sequence) -> NilpotentData:
    a = f.algebra
    N = mult_matrix_constant(a, n)
    dim = a.dim
    d = None
    P = identity(dim)
    for k in range(1, dim + 2):
        P = matmul(P, N)
        if is_zero_matrix(P):
            d = k
            break
    if d is None:
        raise FiltrationError("element is not nilpotent")
    image = Subspace.from_vectors(dim, transpose(N)) if dim else Subspace.zero(0)
    kernels = tuple(kernel_basis(matpow(N, k), dim) if dim else Subspace.zero(0) for k in range(d + 1))
    return NilpotentData(d, N, image, kernels)


def nilpotent_filtration(f: FrobeniusAlgebra, n: Sequence) -> FrobeniusFiltration:
    """I_0 = (n), I_k = (n) + Ker(n^k o), with the pairings built from <,>.

    Level 0: (x, y)_0 = <x~, y> where n o x~ = x.
    Level k > 0: (x, y)_k = <x~, y~ o n^(k-1)> with representatives in J_k.
    Every graded pairing is checked to be nondegenerate.
    """
    a = f.algebra
    g = f.pairing
    nd = nilpotent_data(f, n)
    N, d, I = nd.N, nd.order, nd.image
    dim = a.dim

    def pair0(x, y):
        return bilinear(g, _preimage(N, x), y)

    levels = []
    prev = Subspace.zero(dim)
    lv0 = make_level(0, I, prev, pair0)
    levels.append(lv0)
    prev = I
    for k in range(1, d + 1):
        Jk = nd.kernels[k]
        Ik = I.sum(Jk)
        Nk1 = matpow(N, k - 1)

        def rep_in_J(x, Jk=Jk, prev=prev):
            c = express_in(list(Jk.basis) + list(prev.basis), x)
            if c is None:
                raise FiltrationError("graded vector has no representative in J_k")
            out = [Fraction(0)] * dim
            for coef, v in zip(c[: Jk.dim], Jk.basis):
                if coef:
                    out = [p + coef * q for p, q in zip(out, v)]
            return tuple(out)

        def pairk(x, y, Nk1=Nk1, rep_in_J=rep_in_J):
            return bilinear(g, rep_in_J(x), matvec(Nk1, rep_in_J(y)))

        levels.append(make_level(k, Ik, prev, pairk))
        prev = Ik
    for lv in levels:
        if lv.pairing and not is_nondegenerate([list(r) for r in lv.pairing]):
            raise FiltrationError(f"graded pairing at level {lv.k} is degenerate")
    return FrobeniusFiltration(a, tuple(levels))


def _preimage(N, x) -> Tuple:
    from .ringcore import solve
    pre = solve(N, list(x))
    if pre is None:
        raise FiltrationError("vector is not in the image of n")
    return pre


def quotient_filtration(filt: FrobeniusFiltration, k: int) -> Tuple[FrobeniusFiltration, "object"]:
    """The filtration I_l / I_k (l > k) on A / I_k, pairings transported.

    Returns the filtration and the :class:`Quotient` describing A / I_k.
    """
    ideal = filt.level(k).space
    q = quotient_algebra(filt.algebra, ideal)
    qa = q.algebra
    m = qa.dim
    free = [c for c in range(filt.algebra.dim) if c not in set(ideal.pivots)]

    def lift(v):
        out = [Fraction(0)] * filt.algebra.dim
        for p, c in enumerate(free):
            out[c] = v[p]
        return tuple(out)

    levels = []
    prev = Subspace.zero(m)
    for lv in filt.levels:
        if lv.k <= k:
            continue
        img = Subspace.from_vectors(m, [matvec(q.projection, v) for v in lv.space.basis])
        level = make_level(lv.k, img, prev, lambda x, y, kk=lv.k: filt.pair(kk, lift(x), lift(y)))
        levels.append(level)
        prev = img
    return FrobeniusFiltration(qa, tuple(levels)), q


# ---------------------------------------------------------------- weights

def endomorphism_order(N: Sequence[Sequence]) -> int:
    dim = len(N)
    P = identity(dim)
    for k in range(1, dim + 2):
        P = matmul(P, N)
        if is_zero_matrix(P):
            return k
    raise FiltrationError("endomorphism is not nilpotent")


def weight_filtration(N: Sequence[Sequence]) -> List[Subspace]:
    """Monodromy weight filtration W_0 .. W_(2d-2) of a nilpotent matrix.

    Centered at d-1: W_l = M_(l-d+1) where
    M_c = sum_(j >= max(0,-c)) N^j (Ker N^(c+2j+1)).
    """
    N = [list(r) for r in N]
    dim = len(N)
    if dim == 0:
        return [Subspace.zero(0)]
    d = endomorphism_order(N)
    kers = {}

    def ker(m):
        if m <= 0:
            return Subspace.zero(dim)
        m = min(m, d)
        if m not in kers:
            kers[m] = kernel_basis(matpow(N, m), dim)
        return kers[m]

    out = []
    for l in range(2 * d - 1):
        c = l - (d - 1)
        vecs = []
        for j in range(max(0, -c), d + 1):
            K = ker(c + 2 * j + 1)
            Nj = matpow(N, j)
            vecs.extend(matvec(Nj, v) for v in K.basis)
        out.append(Subspace.from_vectors(dim, vecs))
    return out


def weight_filtration_check(N: Sequence[Sequence], W: Sequence[Subspace]) -> Report:
    """The two defining conditions of the monodromy weight filtration."""
    N = [list(r) for r in N]
    dim = len(N)
    rep = Report()
    d = endomorphism_order(N) if dim else 1
    zero = Subspace.zero(dim)

    def Wl(l):
        if l < 0:
            return zero
        if l >= len(W):
            return W[-1]
        return W[l]

    ok = len(W) == 2 * d - 1 and Wl(2 * d - 2) == Subspace.full(dim)
    rep.add("length_and_exhaustive", ok, None if ok else {"levels": len(W), "order": d})
    wit = None
    for l in range(len(W)):
        if l + 1 < len(W) and not W[l + 1].contains_subspace(W[l]):
            wit = {"increasing_at": l}
            break
    rep.add("increasing", wit is None, wit)
    wit = None
    for l in range(len(W)):
        if not all(Wl(l - 2).contains(matvec(N, v)) for v in W[l].basis):
            wit = {"l": l}
            break
    rep.add("lowers_weight_by_two", wit is None, wit)
    wit = None
    for j in range(d):
        src_hi, src_lo = Wl(d + j - 1), Wl(d + j - 2)
        dst_hi, dst_lo = Wl(d - j - 1), Wl(d - j - 2)
        comp = src_lo.complement_basis(src_hi)
        Nj = matpow(N, j)
        imgs = [matvec(Nj, v) for v in comp]
        inside = all(dst_hi.contains(v) for v in imgs)
        indep = Subspace.from_vectors(dim, imgs + list(dst_lo.basis)).dim == len(imgs) + dst_lo.dim
        same_dim = len(comp) == dst_hi.dim - dst_lo.dim
        if not (inside and indep and same_dim):
            wit = {"j": j}
            break
    rep.add("graded_isomorphisms", wit is None, wit)
    return rep


def remark_relation_check(f: FrobeniusAlgebra, n: Sequence, use_image: bool = False) -> Report:
    """Compare the nilpotent filtration with kernel (or image) plus weights.

    With ``use_image`` false this tests I_k = Ker n + W_(k+d-2) for
    0 < k <= d and reports I_0 = Ker n separately.  With ``use_image`` true
    the kernel is replaced by the image (n).
    """
    filt = nilpotent_filtration(f, n)
    nd = nilpotent_data(f, n)
    W = weight_filtration(nd.N)
    d = nd.order
    base = nd.image if use_image else nd.kernels[1]
    rep = Report()
    rep.add("I_0", filt.level(0).space == base, None if filt.level(0).space == base else {
        "I_0_dim": filt.level(0).space.dim, "compared_dim": base.dim})
    wit = None
    for k in range(1, d + 1):
        l = k + d - 2
        Wk = W[min(l, len(W) - 1)] if l >= 0 else Subspace.zero(f.algebra.dim)
        target = base.sum(Wk)
        if filt.level(k).space != target:
            wit = {"k": k, "I_k_dim": filt.level(k).space.dim, "compared_dim": target.dim}
            break
    rep.add("I_k", wit is None, wit)
    return rep
