import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from mfslab.fdalg import ideal_generated, multiply
from mfslab.localqh import (
    SURFACES,
    GWTable,
    LocalError,
    SurfaceData,
    build_v_model,
    classical_potential,
    load_surface,
    load_table,
    local_product,
    local_product_direct,
    local_product_from_bundle,
    quantum_product_v,
    resolve_target,
    synthetic_table,
    v_ring,
)
from mfslab.mfs import mfs_check, mfs_difference
from mfslab.ringcore import Subspace
from mfslab.ringcore.linalg import unit_vector


def V(vm, label):
    return vm.frobenius.algebra.basis_vec(vm.labels.index(label))


# ---------------------------------------------------------------- surfaces

@pytest.mark.parametrize("name,b_dual,kappa", [
    ("p2", (3,), 9), ("f0", (2, 2), 8), ("f1", (3, 2), 8), ("f2", (4, 2), 8),
])
def test_surface_invariants(name, b_dual, kappa):
    s = SURFACES[name]
    assert s.b_dual == b_dual
    assert s.kappa == kappa
    assert load_surface(name) == s


def test_surface_validation():
    with pytest.raises(LocalError):
        SurfaceData("x", ((1, 0),), (1,))
    with pytest.raises(LocalError):
        SurfaceData("x", ((0, 1), (2, 0)), (1, 1))
    with pytest.raises(LocalError):
        SurfaceData("x", ((0, 0), (0, 0)), (1, 1))
    with pytest.raises(LocalError):
        SurfaceData("x", ((-1,),), (1,))
    with pytest.raises(LocalError):
        SurfaceData.from_json({"c": [[1]], "b": [3], "kappa": 8})
    with pytest.raises(LocalError):
        SurfaceData.from_json({"c": [[1]], "b": [3], "b_dual": [2]})
    with pytest.raises(LocalError):
        SurfaceData.from_json({"c": [[1]]})
    assert SurfaceData.from_json(SURFACES["f1"].to_json()) == SURFACES["f1"]


def test_resolve_target():
    assert resolve_target("p3") == "p3"
    assert resolve_target("f2") is SURFACES["f2"]
    with pytest.raises(LocalError):
        resolve_target("p4")


# -------------------------------------------------------------- tables

def test_shipped_tables_are_valid():
    for name in ("p2", "f0", "f1", "f2"):
        load_table(name).validate(SURFACES[name])
    load_table("p3").validate("p3")
    assert load_table("p2").entries[(1,)] == 3
    with pytest.raises(LocalError):
        load_table("nothing")


@pytest.mark.parametrize("entries,target", [
    ({(1, 0): F(1)}, SURFACES["p2"]),       # wrong rank
    ({(-1,): F(1)}, SURFACES["p2"]),        # negative class
    ({(0,): F(1)}, SURFACES["p2"]),         # zero class
    ({(5,): F(1)}, SURFACES["p2"]),         # beyond order
    ({(0, 1): F(2)}, SURFACES["f2"]),       # the (-2)-curve e pairs to (0, 1) and has b.beta = 0
])
def test_invalid_tables(entries, target):
    with pytest.raises(LocalError):
        GWTable("toric", entries, 3).validate(target)


def test_table_kind_must_match_target():
    with pytest.raises(LocalError):
        GWTable("p3", {}, 3).validate(SURFACES["p2"])


def test_table_json():
    t = load_table("p2")
    assert GWTable.from_json(t.to_json()) == t
    assert GWTable.from_json({"entries": [{"beta": 2, "N": "1/2"}]}).entries == {(2,): F(1, 2)}
    with pytest.raises(LocalError):
        GWTable.from_json({"entries": [{"beta": [1], "N": 1}, {"beta": [1], "N": 2}]})
    with pytest.raises(LocalError):
        GWTable.from_json({"entries": [{"beta": ["a"], "N": 1}]})
    assert t.truncated(1).entries == {(1,): 3}


def test_synthetic_tables_respect_rules():
    rng = random.Random(0)
    for name in ("p2", "f0", "f1", "f2"):
        for _ in range(5):
            synthetic_table(SURFACES[name], 3, rng).validate(SURFACES[name])


# ----------------------------------------------------------- the V model

def test_p2_bundle_pairing_and_ideal():
    vm = build_v_model(SURFACES["p2"])
    f = vm.frobenius
    assert f.pair(V(vm, "Delta0"), V(vm, "Delta1")) == 3
    ideal = ideal_generated(f.algebra, [vm.delta0])
    deltas = [V(vm, f"Delta{i}") for i in range(3)]
    assert ideal == Subspace.from_vectors(vm.dim, deltas)


def test_p2_bundle_quantum_product():
    vm = build_v_model(SURFACES["p2"])
    qp = quantum_product_v(vm, GWTable("toric", {(1,): F(3)}, 1), 1)
    a = qp.algebra
    g1 = vm.labels.index("Gamma1")
    ring = qp.ring
    q1 = ring.qbeta((1,), 1)
    # Gamma1 o Gamma1 = Gamma2 + 3 Q1 Gamma1^dual with Gamma1^dual = Delta1 - 3 Gamma2
    expected = {vm.labels.index("Gamma2"): ring.one() - q1 * 9, vm.labels.index("Delta1"): q1 * 3}
    assert a.C[(g1, g1)] == expected
    dual = vm.dual_basis[g1]
    assert tuple(dual) == tuple(V(vm, "Delta1")[i] - 3 * V(vm, "Gamma2")[i] for i in range(vm.dim))


def test_p3_bundle_pairing_and_cup_product():
    vm = build_v_model("p3")
    f = vm.frobenius
    a = f.algebra
    for k in (1, 2, 3):
        assert f.pair(V(vm, f"Delta{k - 1}"), V(vm, f"Delta{3 - k}")) == 4
    # Delta_i o x is the cup product with no quantum correction.
    table = GWTable("p3", {(1,): F(5), (2,): F(-3)}, 2)
    qp = quantum_product_v(vm, table, 2)
    for i in range(4):
        d = vm.labels.index(f"Delta{i}")
        for j in range(vm.dim):
            classical = a.product_basis(d, j)
            quantum = qp.algebra.product_basis(d, j)
            assert all(qp.ring.const(c) == q for c, q in zip(classical, quantum))
    g2 = vm.labels.index("Gamma2")
    assert not any(qp.algebra.product_basis(g2, g2))


def test_p3_bundle_quotient_by_delta0():
    from mfslab.fdalg import quotient_algebra
    vm = build_v_model("p3")
    a = vm.frobenius.algebra
    q = quotient_algebra(a, ideal_generated(a, [vm.delta0])).algebra
    assert q.dim == 4
    g1 = unit_vector(4, q.labels.index("Gamma1"))
    assert multiply(q, g1, g1) == unit_vector(4, q.labels.index("Gamma2"))


def test_classical_potential_reproduces_cup_product():
    vm = build_v_model(SURFACES["f1"])
    ring = v_ring(vm, 1)
    phi = classical_potential(vm, ring)
    qp = quantum_product_v(vm, GWTable("toric", {}, 1), 1)
    a = vm.frobenius.algebra
    for i in range(vm.dim):
        for j in range(vm.dim):
            assert [qp.ring.const(x) for x in a.product_basis(i, j)] == list(qp.algebra.product_basis(i, j))
    assert phi.ring == ring


# --------------------------------------------------- filtration on V

@pytest.mark.parametrize("name,top", [("p2", 9), ("f0", 8)])
def test_bundle_filtration_dimensions(name, top):
    s = SURFACES[name]
    full, _ = local_product_from_bundle(s, GWTable("toric", {}, 1), 1)
    r = s.r
    dims = {k: full.subspace(k).dim for k in range(5)}
    assert dims[0] == r + 2
    assert dims[1] == dims[0] + 2
    assert dims[2] == dims[3]
    assert dims[4] == full.dim
    assert full.level(4).eta == ((top,),)


@pytest.mark.parametrize("name", ["p2", "f0", "f1", "f2"])
def test_level_two_pairing_is_the_corrected_form(name):
    s = SURFACES[name]
    m = local_product_direct(s, GWTable("toric", {}, 1), 1)
    if not m.indices(2):
        assert s.r == 1
        return
    block = [[F(s.c[i][j]) - F(s.b_dual[i] * s.b_dual[j], s.kappa) for j in range(s.r)] for i in range(s.r)]
    idx = m.indices(2)
    vecs = [m.base_vector(a)[1:s.r + 1] for a in idx]
    lv = m.level(2)
    for p, x in enumerate(vecs):
        for q, y in enumerate(vecs):
            val = sum(x[i] * block[i][j] * y[j] for i in range(s.r) for j in range(s.r))
            assert lv.eta[p][q] == val


def test_f0_gamma_block():
    s = SURFACES["f0"]
    block = [[F(s.c[i][j]) - F(s.b_dual[i] * s.b_dual[j], s.kappa) for j in range(2)] for i in range(2)]
    assert block == [[F(-1, 2), F(1, 2)], [F(1, 2), F(-1, 2)]]


def test_p3_pairings():
    m = local_product_direct("p3", GWTable("p3", {}, 1), 1)
    lv = m.level(1)
    for k in range(3):
        for l in range(3):
            assert lv.eta[k][l] == (F(-1, 4) if k + l == 2 else 0)
    assert m.level(5).eta == ((64,),)


# ---------------------------------------------------------- products

def test_p2_local_product_order_one():
    m = local_product(SURFACES["p2"], GWTable("toric", {(1,): F(3)}, 1), 1)
    g1 = m.labels.index("-3*Gamma1")
    pt = m.labels.index("Gamma2")
    q1 = m.ring.qbeta((1,), 1)
    # (-3 gamma1) o (-3 gamma1) = 9 (1 - 9 Q1) pt
    assert m.c(g1, g1, pt) == (m.ring.one() - q1 * 9) * 9


def test_p2_local_product_uses_cubes():
    rng = random.Random(5)
    table = synthetic_table(SURFACES["p2"], 3, rng)
    m = local_product_direct(SURFACES["p2"], table, 3)
    g1, pt = m.labels.index("-3*Gamma1"), m.labels.index("Gamma2")
    expected = m.ring.one()
    for (b,), N in table.entries.items():
        expected = expected - m.ring.qbeta((b,), 3 * b ** 3 * N)
    assert m.c(g1, g1, pt) == expected * 9


@settings(max_examples=10, deadline=None)
@given(st.sampled_from(["p2", "f0", "f1", "f2", "p3"]), st.integers(0, 10 ** 6))
def test_routes_agree_for_random_tables(name, seed):
    t = "p3" if name == "p3" else SURFACES[name]
    table = synthetic_table(t, 3, random.Random(seed))
    direct = local_product_direct(t, table, 3)
    _, sliced = local_product_from_bundle(t, table, 3)
    assert mfs_difference(direct, sliced) is None
    assert mfs_check(direct).passed


def test_routes_disagree_when_one_is_broken(monkeypatch):
    import mfslab.localqh as lq
    table = GWTable("toric", {(1,): F(3)}, 1)
    wrong = lq.local_product_direct(SURFACES["p2"], GWTable("toric", {(1,): F(4)}, 1), 1)
    monkeypatch.setattr(lq, "local_product_direct", lambda *a: wrong)
    with pytest.raises(LocalError):
        lq.local_product(SURFACES["p2"], table, 1)


# ------------------------------------------------ printed potentials

def _printed_toric_classical(s, ring):
    t = [ring.var(f"t{a}") for a in range(s.r + 2)]
    u = [ring.var(f"s{a}") for a in range(s.r + 2)]
    r, c, bd = s.r, s.c, s.b_dual
    inner = t[r + 1] * u[0]
    for i in range(1, r + 1):
        inner = inner + u[0] * u[i] * bd[i - 1]
        for j in range(1, r + 1):
            inner = inner + t[i] * u[j] * c[i - 1][j - 1]
    out = t[0] * t[0] * u[r + 1] * F(1, 2) + t[0] * inner
    for i in range(1, r + 1):
        out = out + t[i] * u[0] * u[0] * F(bd[i - 1], 2)
        for j in range(1, r + 1):
            out = out + t[i] * t[j] * u[0] * F(c[i - 1][j - 1], 2)
    return out


@pytest.mark.parametrize("name", ["p2", "f0", "f1", "f2"])
def test_toric_classical_potential_is_printed_form_plus_pure_delta_term(name):
    s = SURFACES[name]
    vm = build_v_model(s)
    ring = v_ring(vm, 1)
    s0 = ring.var("s0")
    gap = classical_potential(vm, ring) - _printed_toric_classical(s, ring)
    assert gap == s0 * s0 * s0 * F(s.kappa, 6)


def test_p3_classical_potential_is_printed_form_plus_pure_delta_term():
    vm = build_v_model("p3")
    ring = v_ring(vm, 1)
    t = [ring.var(f"t{a}") for a in range(4)]
    u = [ring.var(f"s{a}") for a in range(4)]
    printed = ring.zero()
    for k in range(4):
        for l in range(4):
            if k + l <= 3:
                printed = printed + t[k] * t[l] * u[3 - k - l] * F(1, 2)
            if k + l <= 2:
                printed = printed + t[2 - k - l] * u[k] * u[l] * 2
    gap = classical_potential(vm, ring) - printed
    assert gap == u[0] * u[0] * u[1] * 8


def test_p3_pairings_against_truncated_polynomials():
    from mfslab.catalog import pn
    from mfslab.frobenius import nilpotent_filtration
    m = local_product_direct("p3", GWTable("p3", {}, 1), 1)
    e = pn(4, -4)
    filt = nilpotent_filtration(e.frobenius, e.nilpotent)
    # Level 1 here matches level 0 of pn(4, -4) ...
    assert filt.pair(0, e.algebra.basis_vec(1), e.algebra.basis_vec(3)) == m.level(1).eta[0][2] == F(-1, 4)
    # ... while the top values differ by a sign: (-4)^3 = -64 against 64.
    assert filt.pair(4, e.algebra.unit, e.algebra.unit) == -64
    assert m.level(5).eta == ((64,),)


@pytest.mark.parametrize("name", ["p2", "f0", "f1"])
def test_fano_filtration_matches_surface_example_after_shift(name):
    from mfslab.catalog import surface_from_cb
    from mfslab.frobenius import nilpotent_filtration
    s = SURFACES[name]
    entry = surface_from_cb([list(r) for r in s.c], list(s.b))
    filt = nilpotent_filtration(entry.frobenius, entry.nilpotent)
    m = local_product_direct(s, GWTable("toric", {}, 1), 1)
    # Toric level k corresponds to level k - 1 of the surface example; same basis order.
    for lv in m.levels:
        idx = m.indices(lv.k)
        assert filt.level(lv.k - 1).space.dim - filt.below(lv.k - 1).dim == len(idx)
        vecs = [m.base_vector(a) for a in idx]
        for p, x in enumerate(vecs):
            for q, y in enumerate(vecs):
                assert filt.pair(lv.k - 1, x, y) == lv.eta[p][q]
