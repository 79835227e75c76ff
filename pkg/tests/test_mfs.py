import random
from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mfslab.localqh import (
    SURFACES,
    GWTable,
    build_v_model,
    local_product,
    local_product_direct,
    local_product_from_bundle,
    quantum_product_v,
    synthetic_table,
)
from mfslab.mfs import (
    EulerField,
    MFSData,
    MFSError,
    at_order,
    frobenius_structure_check,
    mfs_check,
    mfs_difference,
    nilpotent_field_check,
    reframe,
    relabel,
    transversal_slice,
)

TARGETS = ["p2", "f0", "f1", "f2", "p3"]


def target(name):
    return "p3" if name == "p3" else SURFACES[name]


@pytest.fixture(scope="module")
def p2_structures():
    t = target("p2")
    table = GWTable("toric", {(1,): F(3), (2,): F(-45, 8)}, 2)
    return table, local_product_direct(t, table, 2), local_product_from_bundle(t, table, 2)


# ------------------------------------------------------------ Frobenius charts

@pytest.mark.parametrize("name", TARGETS)
def test_bundle_quantum_product_is_frobenius(name):
    vm = build_v_model(target(name))
    table = synthetic_table(target(name), 2, random.Random(7))
    rep = frobenius_structure_check(quantum_product_v(vm, table, 2))
    assert rep.passed, [c.name for c in rep.failures()]


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(["p2", "f0", "p3"]), st.integers(0, 10 ** 6))
def test_wdvv_holds_for_random_invariants(name, seed):
    vm = build_v_model(target(name))
    table = synthetic_table(target(name), 3, random.Random(seed))
    rep = frobenius_structure_check(quantum_product_v(vm, table, 3))
    assert rep.status_of("associativity") == "pass"
    assert rep.status_of("potential_symmetry") == "pass"


def test_wrong_euler_weight_breaks_homogeneity():
    vm = build_v_model(target("p2"))
    qp = quantum_product_v(vm, GWTable("toric", {(1,): F(3)}, 1), 1)
    lin = [list(r) for r in qp.euler.linear]
    lin[0][0] += 1
    bad = replace(qp, euler=EulerField(tuple(map(tuple, lin)), qp.euler.constant))
    rep = frobenius_structure_check(bad)
    assert not rep.passed
    assert rep.status_of("euler_metric") == "fail"


# -------------------------------------------------------- nilpotent fields

def test_nilpotent_field_preconditions_on_bundle():
    vm = build_v_model(target("f0"))
    qp = quantum_product_v(vm, GWTable("toric", {}, 1), 1)
    rep = nilpotent_field_check(qp, vm.delta0)
    assert rep.passed
    assert rep.meta["nilpotent_order"] == 4


def test_non_nilpotent_field_is_rejected():
    vm = build_v_model(target("p2"))
    qp = quantum_product_v(vm, GWTable("toric", {}, 1), 1)
    rep = nilpotent_field_check(qp, vm.frobenius.algebra.unit)
    assert rep.status_of("n_nilpotent") == "fail"


def test_field_with_nonconstant_multiplication_is_rejected():
    vm = build_v_model(target("p2"))
    qp = quantum_product_v(vm, GWTable("toric", {(1,): F(3)}, 1), 1)
    g1 = vm.frobenius.algebra.basis_vec(vm.gamma[1])
    rep = nilpotent_field_check(qp, g1)
    assert rep.status_of("n_multiplication_constant") == "fail"


# ------------------------------------------------------ structure checks

@pytest.mark.parametrize("name", TARGETS)
def test_all_routes_pass_the_axioms(name):
    t = target(name)
    table = synthetic_table(t, 2, random.Random(3))
    direct = local_product_direct(t, table, 2)
    full, sliced = local_product_from_bundle(t, table, 2)
    for m in (direct, full, sliced):
        rep = mfs_check(m)
        assert rep.passed, [c.name for c in rep.failures()]
    assert mfs_difference(direct, sliced) is None


def test_detects_asymmetric_eta(p2_structures):
    _, m, _ = p2_structures
    lv = m.levels[0]
    eta = [list(r) for r in lv.eta]
    eta[0][1] += 1
    levels = (replace(lv, eta=tuple(map(tuple, eta))),) + m.levels[1:]
    rep = mfs_check(replace(m, levels=levels, _cache={}))
    assert rep.status_of("eta_symmetric") == "fail"


def test_detects_broken_graded_frobenius_property(p2_structures):
    _, m, _ = p2_structures
    # A symmetric, nondegenerate eta on level 1 that is not invariant:
    # (Gamma1 o x, Gamma2) picks up the new diagonal entry.
    lv = m.levels[0]
    eta = [list(r) for r in lv.eta]
    eta[1][1] = F(1)
    levels = (replace(lv, eta=tuple(map(tuple, eta))),) + m.levels[1:]
    rep = mfs_check(replace(m, levels=levels, _cache={}))
    assert rep.status_of("graded_frobenius") == "fail"


def test_detects_non_associative_product(p2_structures):
    _, m, _ = p2_structures
    C = {k: dict(v) for k, v in m.C.items()}
    a, b = m.labels.index("-3*Gamma1"), m.labels.index("Gamma2")
    C[(a, b)] = {b: m.ring.one()}
    C[(b, a)] = {b: m.ring.one()}
    rep = mfs_check(replace(m, C=C, _cache={}))
    assert not rep.passed


def test_detects_wrong_euler_field(p2_structures):
    _, m, _ = p2_structures
    w = [F(0)] * m.dim
    bad = replace(m, euler=EulerField.diagonal(w), _cache={})
    rep = mfs_check(bad)
    assert rep.status_of("euler_multiplication") == "fail"


# ---------------------------------------------------- slicing and frames

def test_slice_level_range(p2_structures):
    _, _, (full, _) = p2_structures
    with pytest.raises(MFSError):
        transversal_slice(full, -1)
    with pytest.raises(MFSError):
        transversal_slice(full, 99)


def test_slice_rejects_unknown_constant(p2_structures):
    _, _, (full, _) = p2_structures
    with pytest.raises(MFSError):
        transversal_slice(full, 0, {"nope": 1})


def test_slice_at_higher_level_stays_valid(p2_structures):
    _, _, (full, _) = p2_structures
    sliced = transversal_slice(full, 1)
    assert mfs_check(sliced).passed
    assert all(lv.k > 1 for lv in sliced.levels)


def test_reframe_gives_same_structure(p2_structures):
    _, m, _ = p2_structures
    frame = [list(r) for r in m.frame]
    # Add the first level-1 vector to the level-4 vector: still adapted.
    top = m.indices(4)[0]
    low = m.indices(1)[0]
    for p in range(m.dim):
        frame[p][top] += frame[p][low]
    m2 = reframe(m, frame)
    assert mfs_check(m2).passed
    assert mfs_difference(m, m2) is None
    assert mfs_difference(m, relabel(m2, {4: ["top"]})) is None


def test_reframe_rejects_non_adapted_frame(p2_structures):
    _, m, _ = p2_structures
    frame = [list(r) for r in m.frame]
    top, low = m.indices(4)[0], m.indices(1)[0]
    for p in range(m.dim):
        frame[p][low] += frame[p][top]
    with pytest.raises(MFSError):
        reframe(m, frame)


def test_difference_reports_changed_invariants(p2_structures):
    table, m, _ = p2_structures
    other = local_product_direct(target("p2"), GWTable("toric", {(1,): F(4)}, 2), 2)
    diff = mfs_difference(m, other)
    assert diff is not None and diff["field"] == "C"


def test_truncation(p2_structures):
    _, m, _ = p2_structures
    low = at_order(m, 1)
    assert low.order == 1
    assert mfs_difference(low, local_product_direct(target("p2"), GWTable("toric", {(1,): F(3)}, 1), 1)) is None
    with pytest.raises(MFSError):
        at_order(m, 5)


# ---------------------------------------------------------------- JSON

@pytest.mark.parametrize("name", TARGETS)
def test_json_round_trip(name):
    m = local_product(target(name), synthetic_table(target(name), 2, random.Random(11)), 2)
    back = MFSData.from_json(m.to_json())
    assert mfs_difference(m, back) is None
    assert back.to_json() == m.to_json()


def test_from_json_rejects_bad_shapes(p2_structures):
    _, m, _ = p2_structures
    data = m.to_json()
    data["levels"][0]["eta"] = [["1"]]
    with pytest.raises(MFSError):
        MFSData.from_json(data)
    data = m.to_json()
    data["order"] = 7
    with pytest.raises(MFSError):
        MFSData.from_json(data)
    data = m.to_json()
    data["coords"][0] = "zz"
    with pytest.raises(MFSError):
        MFSData.from_json(data)


def test_euler_field_json_and_bracket():
    e = EulerField.diagonal([1, 0, -1], [0, 2, 0])
    assert EulerField.from_json(e.to_json(), 3) == e
    assert e.bracket_constant((1, 1, 1)) == (-1, 0, 1)
    with pytest.raises(MFSError):
        EulerField(((1, 0),), (0, 0))
