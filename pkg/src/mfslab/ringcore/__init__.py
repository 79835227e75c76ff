"""Exact scalars, linear algebra and the truncated series ring."""

from .hbar import HbarLaurent, hbar_dhbar, hbar_derive
from .linalg import (
    ShapeError,
    Subspace,
    det,
    express_in,
    identity,
    inverse,
    is_nondegenerate,
    kernel_basis,
    leading_principal_minors,
    matmul,
    matpow,
    matvec,
    rank,
    rref,
    solve,
    transpose,
    zeros,
)
from .scalars import (
    GaussianRational,
    I,
    conj,
    parse_rational,
    rational_to_str,
    scalar_from_json,
    scalar_to_json,
)
from .series import RingMismatch, Series, SeriesRing, as_series, derive, rebase, series_mul, specialize

__all__ = [
    "GaussianRational", "I", "conj", "parse_rational", "rational_to_str", "scalar_from_json",
    "scalar_to_json", "ShapeError", "Subspace", "det", "express_in", "identity", "inverse",
    "is_nondegenerate", "kernel_basis", "leading_principal_minors", "matmul", "matpow", "matvec",
    "rank", "rref", "solve", "transpose", "zeros", "RingMismatch", "Series", "SeriesRing",
    "as_series", "derive", "rebase", "series_mul", "specialize", "HbarLaurent", "hbar_derive",
    "hbar_dhbar",
]
