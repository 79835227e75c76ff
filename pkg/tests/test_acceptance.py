"""Acceptance criteria, one PASS/FAIL line each.

Each criterion is evaluated once (module-scoped cache) and its line is
printed in the pytest terminal summary (see conftest.py).  Running this
file directly with ``python3 tests/test_acceptance.py`` prints the same
lines.  Tolerances are exact: every comparison is in rational arithmetic.
"""

from __future__ import annotations

import random
from fractions import Fraction as F
from functools import lru_cache

import pytest

from mfslab.catalog import default_entries, p1124, pn, wps
from mfslab.deformed import curvature_check, p3_flat_coords, toric_flat_coords, verify_deformed_coords
from mfslab.frobenius import filtration_check, nilpotent_filtration, quotient_filtration, remark_relation_check
from mfslab.localqh import (
    SURFACES,
    GWTable,
    build_v_model,
    local_product_direct,
    local_product_from_bundle,
    quantum_product_v,
    synthetic_table,
)
from mfslab.mfs import frobenius_structure_check, mfs_check, mfs_difference
from mfslab.mhs import SurfaceHodgeInput, build_mhs, hodge_dims, polarization_check
from mfslab.ringcore import SeriesRing, Subspace, derive
from mfslab.ringcore.linalg import matvec

ORDER = 3
TABLES_PER_TARGET = 20
FAMILY = ("p2", "f0", "f1", "f2", "p3")

RESULTS: dict = {}


def _target(name):
    return "p3" if name == "p3" else SURFACES[name]


def _record(number, title, ok, note=""):
    RESULTS[number] = (ok, title, note)
    return ok, note


# ------------------------------------------------------------ criterion 1

def _basis(a, label):
    return a.basis_vec(a.index(label))


def criterion_1():
    bad = []
    for d, m in ((3, 1), (4, -4), (5, 2)):
        e = pn(d, m)
        a = e.algebra
        filt = nilpotent_filtration(e.frobenius, e.nilpotent)

        def elt(i):
            return a.unit if i == d else _basis(a, "h" if i == 1 else f"h^{i}")

        for i in range(1, d):
            for j in range(1, d):
                if filt.pair(0, elt(i), elt(j)) != (F(1, m) if i + j == d else 0):
                    bad.append((d, m, "level0", i, j))
        if filt.pair(d, a.unit, a.unit) != F(m) ** (d - 1):
            bad.append((d, m, "top"))
    return _record(1, "truncated polynomial pairings for (d, m) = (3, 1), (4, -4), (5, 2)", not bad,
                   f"mismatches: {bad}" if bad else "")


# ------------------------------------------------------------ criterion 2

def _wps_ok(d):
    e = wps(d)
    a = e.algebra
    filt = nilpotent_filtration(e.frobenius, e.nilpotent)

    def H(i):
        return _basis(a, "H" if i == 1 else f"H^{i}")

    def E(i):
        return _basis(a, "E" if i == 1 else f"E^{i}")

    ok = all(filt.pair(0, H(i), H(j)) == (F(1, d * d) if i + j == d + 1 else 0)
             for i in range(1, d + 1) for j in range(1, d + 1))
    ok &= all(filt.pair(1, E(i), E(j)) == (F(1, d) if i + j == d else 0)
              for i in range(1, d) for j in range(1, d))
    ok &= filt.pair(d + 1, a.unit, a.unit) == F(d) ** (d - 1)
    # The quotient by (H) is the truncated polynomial example with m = d, shifted by one level.
    qf, q = quotient_filtration(filt, 0)
    model = nilpotent_filtration(pn(d, d).frobenius, pn(d, d).nilpotent)
    ok &= [lv.k - 1 for lv in qf.levels] == [lv.k for lv in model.levels]
    ok &= all(x.space.dim == y.space.dim for x, y in zip(qf.levels, model.levels))

    def qE(i):
        return tuple(matvec(q.projection, E(i)))

    ok &= all(qf.pair(1, qE(i), qE(j)) == (F(1, d) if i + j == d else 0) for i in range(1, d) for j in range(1, d))
    ok &= qf.pair(d + 1, qf.algebra.unit, qf.algebra.unit) == F(d) ** (d - 1)
    return ok


def _p1124_ok():
    e = p1124()
    a = e.algebra
    filt = nilpotent_filtration(e.frobenius, e.nilpotent)
    Hs = {1: _basis(a, "H"), 2: _basis(a, "H^2"), 3: _basis(a, "H^3")}
    ok = all(filt.pair(0, Hs[i], Hs[j]) == (F(1, 32) if i + j == 4 else 0) for i in Hs for j in Hs)
    ok &= filt.pair(1, _basis(a, "E1"), _basis(a, "E1E2")) == F(1, 4)
    ok &= filt.pair(2, _basis(a, "E2"), _basis(a, "E2")) == F(1, 2)
    ok &= filt.pair(4, a.unit, a.unit) == 8
    qf, q = quotient_filtration(filt, 0)
    m = qf.algebra.dim

    def p(label):
        return tuple(matvec(q.projection, _basis(a, label)))

    I1 = Subspace.from_vectors(m, [p("E1"), p("E1E2")])
    I2 = I1.sum(Subspace.from_vectors(m, [p("E2")]))
    ok &= qf.level(1).space == I1 and qf.level(2).space == I2 and qf.level(3).space == I2
    ok &= qf.level(4).space == Subspace.full(m)
    return ok


def criterion_2():
    parts = {f"wps({d})": _wps_ok(d) for d in (2, 3, 4)}
    parts["P(1,1,2,4)"] = _p1124_ok()
    bad = [k for k, v in parts.items() if not v]
    return _record(2, "weighted projective pairings and quotient filtrations", not bad,
                   f"failing: {bad}" if bad else "")


# ------------------------------------------------------------ criterion 3

def _v_filtration_ok(name, top):
    s = SURFACES[name]
    vm = build_v_model(s)
    full, sliced = local_product_from_bundle(s, GWTable("toric", {}, 1), 1, vm)
    r = s.r
    dims = {k: full.subspace(k).dim for k in range(5)}
    ok = dims[0] == r + 2 and dims[1] == dims[0] + 2 and dims[2] == dims[3] and dims[4] == full.dim
    ok &= full.level(4).eta == ((top,),)
    block = [[F(s.c[i][j]) - F(s.b_dual[i] * s.b_dual[j], s.kappa) for j in range(r)] for i in range(r)]
    gam = [vm.gamma[i + 1] for i in range(r)]
    lv = full.level(2)
    vecs = [[full.base_vector(a)[g] for g in gam] for a in full.indices(2)]
    for p, x in enumerate(vecs):
        for q, y in enumerate(vecs):
            val = sum(x[i] * block[i][j] * y[j] for i in range(r) for j in range(r))
            ok &= lv.eta[p][q] == val
    return ok


def criterion_3():
    parts = {"P2": _v_filtration_ok("p2", 9), "F0": _v_filtration_ok("f0", 8)}
    bad = [k for k, v in parts.items() if not v]
    return _record(3, "bundle filtration ranks, level-2 gamma block and top value for P2 and F0", not bad,
                   f"failing: {bad}" if bad else "")


# ------------------------------------------------------------ criterion 4

def criterion_4():
    ok = True
    direct = local_product_direct("p3", GWTable("p3", {}, 1), 1)
    _, sliced = local_product_from_bundle("p3", GWTable("p3", {}, 1), 1)
    ok &= direct.level(5).eta == sliced.level(5).eta == ((64,),)
    lv = direct.level(1)
    ok &= all(lv.eta[k][l] == (F(-1, 4) if k + l == 2 else 0) for k in range(3) for l in range(3))
    ok &= mfs_difference(direct, sliced) is None
    return _record(4, "P3 level-1 pairing -1/4 delta_(k+l,4) and top value 64", ok)


# -------------------------------------------------------- criteria 5 to 7

@lru_cache(maxsize=None)
def _family():
    """(name, seed, table, direct, sliced) for every target and random table."""
    out = []
    for name in FAMILY:
        t = _target(name)
        for seed in range(TABLES_PER_TARGET):
            table = synthetic_table(t, ORDER, random.Random(1000 * FAMILY.index(name) + seed))
            direct = local_product_direct(t, table, ORDER)
            _, sliced = local_product_from_bundle(t, table, ORDER)
            out.append((name, seed, table, direct, sliced))
    return tuple(out)


def criterion_5():
    bad = []
    for name, seed, _, direct, sliced in _family():
        if not mfs_check(direct).passed or not mfs_check(sliced).passed:
            bad.append((name, seed, "axioms"))
        if mfs_difference(direct, sliced) is not None:
            bad.append((name, seed, "routes"))
    n = len(_family())
    return _record(5, f"MFS axioms and route equality on {n} random tables at order {ORDER}", not bad,
                   f"failing: {bad[:5]}" if bad else "")


def criterion_6():
    bad = []
    for name, seed, _, direct, _ in _family():
        for lv in direct.levels:
            if lv.labels and not curvature_check(direct, lv.k).passed:
                bad.append((name, seed, lv.k))
    return _record(6, f"deformed connection is flat on every level at order {ORDER}", not bad,
                   f"failing: {bad[:5]}" if bad else "")


def criterion_7():
    bad = []
    double_sums = 0
    for name, seed, table, direct, _ in _family():
        if name == "p3":
            cands = p3_flat_coords(table, ORDER)
            if any(b + g <= ORDER for (b,) in table.entries for (g,) in table.entries):
                double_sums += 1
        else:
            cands = toric_flat_coords(SURFACES[name], table, ORDER)
        rep = verify_deformed_coords(direct, cands)
        if not rep.passed:
            bad.append((name, seed, [c.name for c in rep.failures()]))
    ok = not bad and double_sums > 0
    note = ("toric top coordinate is exp(hbar t0)/hbar; the printed exp(hbar t0) fails the hbar equation. "
            f"P3 tables exercising the double sum: {double_sums}")
    if bad:
        note = f"failing: {bad[:5]}; " + note
    return _record(7, f"deformed flat coordinates verify on random tables at order {ORDER}", ok, note)


# ------------------------------------------------------------ criterion 8

def criterion_8():
    good = build_mhs(SurfaceHodgeInput(((F(-2),),), F(8)))
    dims = {pq: d for pq, d in hodge_dims(good).items() if d}
    ok = dims == {(1, 0): 1, (0, 1): 1, (1, 1): 1, (2, 2): 1}
    ok &= polarization_check(good).passed
    flipped = polarization_check(build_mhs(SurfaceHodgeInput(((F(2),),), F(8))))
    ok &= flipped.status_of("H2_positive_definite") == "fail"
    return _record(8, "F0 Hodge numbers, positive polarization, sign flip breaks H2", ok)


# ------------------------------------------------------------ criterion 9

def _remark_entries():
    return [e for e in default_entries() if e.nilpotent is not None]


def criterion_9():
    kernel_bad = [e.name for e in _remark_entries()
                  if not remark_relation_check(e.frobenius, e.nilpotent).passed]
    image_bad = [e.name for e in _remark_entries()
                 if not remark_relation_check(e.frobenius, e.nilpotent, use_image=True).passed]
    ok = not kernel_bad
    note = (f"I_0 = Ker n, I_k = Ker n + W fails on {len(kernel_bad)} of {len(_remark_entries())} entries; "
            f"with the image (n) in place of the kernel it fails on {len(image_bad)}")
    return _record(9, "filtration equals kernel plus shifted weight filtration on every catalog entry", ok, note)


# ----------------------------------------------------------- criterion 10

def _leibniz_cases(count, seed):
    ring = SeriesRing(("t0", "t2"), (("Q1", "t1"), ("Q2", "t2")), 3)
    names = ("t0", "t1", "t2")
    rng = random.Random(seed)

    def elem():
        out = ring.zero()
        for _ in range(rng.randint(0, 4)):
            beta = (rng.randint(0, 2), rng.randint(0, 2))
            mono = {"t0": rng.randint(0, 2), "t2": rng.randint(0, 2)}
            out = out + ring.monomial(beta, mono, F(rng.randint(-5, 5), rng.randint(1, 4)))
        return out

    bad = 0
    for _ in range(count):
        a, b = elem(), elem()
        x, y = rng.choice(names), rng.choice(names)
        if derive(a * b, x) != derive(a, x) * b + a * derive(b, x):
            bad += 1
        elif derive(derive(a, x), y) != derive(derive(a, y), x):
            bad += 1
    return bad


def criterion_10():
    problems = []
    count = 0
    for e in default_entries():
        if e.nilpotent is None:
            continue
        filt = nilpotent_filtration(e.frobenius, e.nilpotent)
        count += 1
        if not filtration_check(filt).passed:
            problems.append(e.name)
        for lv in filt.levels[:-1]:
            qf, _ = quotient_filtration(filt, lv.k)
            count += 1
            if not filtration_check(qf).passed:
                problems.append((e.name, lv.k))
    wdvv = 0
    for name in FAMILY:
        vm = build_v_model(_target(name))
        for seed in range(4):
            table = synthetic_table(_target(name), ORDER, random.Random(77 + seed))
            rep = frobenius_structure_check(quantum_product_v(vm, table, ORDER))
            wdvv += 1
            if rep.status_of("associativity") != "pass" or rep.status_of("potential_symmetry") != "pass":
                problems.append(("wdvv", name, seed))
    leibniz_bad = _leibniz_cases(1000, 2024)
    if leibniz_bad:
        problems.append(("leibniz", leibniz_bad))
    note = f"{count} filtrations, {wdvv} WDVV cases, 1000 derivation cases"
    if problems:
        note = f"failing: {problems[:5]}; " + note
    return _record(10, "property suites: filtration axioms, WDVV, derivation rules", not problems, note)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def format_line(number):
    ok, title, note = RESULTS[number]
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
    return line + (f" ({note})" if note else "")


# ----------------------------------------------------------------- tests

@pytest.mark.parametrize("number", [n for n in range(1, 11) if n != 9])
def test_criterion(number):
    ok, note = CRITERIA[number - 1]()
    assert ok, format_line(number)


def test_criterion_9_records_the_kernel_form_as_failing():
    # The kernel form is evaluated as stated and reported FAIL.  What is
    # asserted here is the observed behaviour: the kernel form fails and the
    # image form holds on every catalog entry.
    ok, _ = criterion_9()
    assert not ok
    for e in _remark_entries():
        assert remark_relation_check(e.frobenius, e.nilpotent, use_image=True).passed, e.name


if __name__ == "__main__":
    for fn in CRITERIA:
        fn()
    for n in sorted(RESULTS):
        print(format_line(n))
