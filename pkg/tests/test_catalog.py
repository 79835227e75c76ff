from fractions import Fraction as F

import pytest

from mfslab.catalog import CatalogError, catalog, default_entries, pn, surface_from_cb, surface_from_prim
from mfslab.fdalg import algebra_check
from mfslab.frobenius import frobenius_check, nilpotent_order


def test_every_entry_is_a_frobenius_algebra_with_nilpotent():
    names = set()
    for entry in default_entries():
        names.add(entry.name)
        assert algebra_check(entry.algebra).passed, entry.name
        assert frobenius_check(entry.frobenius).passed, entry.name
        if entry.nilpotent is not None:
            nilpotent_order(entry.frobenius, entry.nilpotent)
    assert {"pn", "wps", "p1124", "surface", "p2_local", "f0_local", "p3_local"} <= names


def test_dispatch_and_parameters():
    assert catalog("pn", d=3, m=2).params == {"d": 3, "m": 2}
    assert catalog("wps", d=2).algebra.dim == 4
    assert catalog("p1124").algebra.dim == 8
    assert catalog("surface", c=[[1]], b=[3]).algebra.dim == 3
    assert catalog("surface", prim_pairing=[[-2]], K=8).algebra.dim == 4


@pytest.mark.parametrize("name,params", [
    ("nope", {}),
    ("pn", {"d": 1, "m": 1}),
    ("pn", {"d": 3, "m": 0}),
    ("wps", {"d": 1}),
    ("pn", {"q": 3}),
    ("surface", {"c": [[1]]}),
])
def test_bad_requests(name, params):
    with pytest.raises(CatalogError):
        catalog(name, **params)


def test_surface_descriptions_agree_for_p2():
    a = surface_from_cb([[1]], [3])
    top = a.algebra.dim - 1
    n = a.nilpotent
    # n o n = 9 pt, and the point pairs to 1 with the unit.
    nn = a.algebra.product_basis(1, 1)
    assert n[1] ** 2 * nn[top] == 9
    b = surface_from_prim([], 9)
    assert b.frobenius.pair(b.nilpotent, b.nilpotent) == 9


def test_truncated_polynomial_pairing():
    e = pn(4, 1)
    a = e.algebra
    for i in range(4):
        for j in range(4):
            assert e.frobenius.pair(a.basis_vec(i), a.basis_vec(j)) == F(int(i + j == 3))
