from fractions import Fraction as F

import pytest

from mfslab.mhs import (
    HodgeError,
    SurfaceHodgeInput,
    build_mhs,
    hermitian_form,
    hodge_dims,
    hodge_table,
    mhs_to_json,
    polarization_check,
)


def f0_input(sign=1):
    # F0: n = 2(g1 + g2), K = n^2 = 8, primitive class g1 - g2 with square -2.
    return SurfaceHodgeInput(((F(-2 * sign),),), F(8))


def nonzero(dims):
    return {pq: d for pq, d in dims.items() if d}


def test_f0_hodge_numbers():
    m = build_mhs(f0_input())
    assert nonzero(hodge_dims(m)) == {(1, 0): 1, (0, 1): 1, (1, 1): 1, (2, 2): 1}


def test_f0_polarization_is_positive():
    rep = polarization_check(build_mhs(f0_input()))
    assert rep.passed
    for k in (1, 2, 4):
        assert rep.status_of(f"H{k}_positive_definite") == "pass"


def test_flipping_primitive_sign_breaks_positivity():
    rep = polarization_check(build_mhs(f0_input(sign=-1)))
    assert rep.status_of("H2_positive_definite") == "fail"
    assert rep.status_of("H1_positive_definite") == "pass"
    assert rep.status_of("H4_positive_definite") == "pass"


def test_projective_plane_has_no_primitive_part():
    m = build_mhs(SurfaceHodgeInput((), F(9)))
    assert nonzero(hodge_dims(m)) == {(1, 0): 1, (0, 1): 1, (2, 2): 1}
    assert polarization_check(m).passed


def test_weight_one_hermitian_form_is_scalar():
    m = build_mhs(f0_input())
    H = hermitian_form(m, 1)
    assert H[0][0] == H[1][1] == 8
    assert H[0][1] == H[1][0] == 0


def test_hodge_table_is_a_decomposition():
    m = build_mhs(SurfaceHodgeInput(((F(-2), F(1)), (F(1), F(-2))), F(6)))
    table = hodge_table(m)
    assert sum(s.dim for s in table.values()) == m.dim
    assert polarization_check(m).passed


def test_hodge_symmetry():
    dims = hodge_dims(build_mhs(f0_input()))
    for (p, q), d in dims.items():
        assert dims.get((q, p)) == d


def test_json_lists_hodge_numbers():
    out = mhs_to_json(build_mhs(f0_input()))
    got = {(e["p"], e["q"]): e["dim"] for e in out["hodge_dims"] if e["dim"]}
    assert got == {(1, 0): 1, (0, 1): 1, (1, 1): 1, (2, 2): 1}


def test_input_validation():
    with pytest.raises(HodgeError):
        build_mhs(SurfaceHodgeInput((), F(-1)))
    with pytest.raises(HodgeError):
        SurfaceHodgeInput.from_json({"prim_pairing": [[1, 2]], "K": 1})
    with pytest.raises(HodgeError):
        SurfaceHodgeInput.from_json({"prim_pairing": [[1]], "prim_dim": 2, "K": 1})
    inp = SurfaceHodgeInput.from_json({"prim_pairing": [["-2"]], "K": "8"})
    assert inp == f0_input()
