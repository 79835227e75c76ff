"""Command-line front end.

Every subcommand prints one canonical JSON run report on standard output.
Exit status: 0 when every check passes, 1 when a check fails, 2 when the
input is malformed (a message with the input location goes to stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import catalog as catalog_mod
from . import deformed as dfm
from . import localqh
from .fdalg import FDAlgebra, algebra_check
from .frobenius import (
    FrobeniusAlgebra,
    FiltrationError,
    filtration_check,
    frobenius_check,
    mult_matrix_constant,
    nilpotent_filtration,
    quotient_filtration,
    remark_relation_check,
    weight_filtration,
    weight_filtration_check,
)
from .mfs import MFSData, MFSError, at_order, mfs_check
from .mhs import SurfaceHodgeInput, build_mhs, mhs_to_json, polarization_check
from .report import Report
from .ringcore.scalars import parse_rational, rational_to_str
from .serialize import dumps, matrix_from_json

DEFAULT_ORDER = 3


class InputError(Exception):
    """Malformed input; ``location`` names the file and, when known, the position."""

    def __init__(self, message: str, location: str):
        super().__init__(message)
        self.location = location


class Context:
    def __init__(self, argv: Sequence[str], timing: bool):
        self.argv = list(argv)
        self.timing = timing
        self.digests: Dict[str, str] = {}
        self.start = time.perf_counter()

    def read_json(self, path: Optional[str], stdin: bool, what: str) -> Tuple[Any, str]:
        if stdin:
            text, loc = sys.stdin.read(), "<stdin>"
        elif path:
            try:
                with open(path, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise InputError(f"cannot read {what}: {exc.strerror}", path) from None
            loc = path
        else:
            raise InputError(f"no {what} given (pass a file or --stdin)", "<args>")
        self.digests[what] = "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()
        try:
            return json.loads(text), loc
        except json.JSONDecodeError as exc:
            raise InputError(exc.msg, f"{loc}:{exc.lineno}:{exc.colno}") from None

    def finish(self, payload: Dict[str, Any], report: Report, order: Optional[int] = None) -> Tuple[str, int]:
        out: Dict[str, Any] = {"command": self.argv, "inputs": self.digests}
        out.update(payload)
        rep = report.to_json()
        out["checks"] = rep.pop("checks")
        if rep:
            out["meta"] = rep
        if order is not None:
            out["order"] = order
        out["status"] = "pass" if report.passed else "fail"
        if self.timing:
            out["timing_seconds"] = round(time.perf_counter() - self.start, 3)
        return dumps(out), 0 if report.passed else 1


def _parse(fn, data, loc: str):
    try:
        return fn(data)
    except InputError:
        raise
    except (KeyError, ValueError, TypeError, IndexError, ZeroDivisionError, AttributeError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        raise InputError(msg, loc) from None


def _order(args) -> int:
    if getattr(args, "order", None) is not None:
        return args.order
    env = os.environ.get("MFSLAB_ORDER")
    if env is None:
        return DEFAULT_ORDER
    try:
        value = int(env)
    except ValueError:
        raise InputError(f"MFSLAB_ORDER={env!r} is not an integer", "<env>") from None
    if value < 0:
        raise InputError("MFSLAB_ORDER must be nonnegative", "<env>")
    return value


# ------------------------------------------------------------ parsing

def _frobenius_from(data: Dict) -> Tuple[FrobeniusAlgebra, Optional[Tuple]]:
    alg = FDAlgebra.from_json(data["algebra"])
    pairing = matrix_from_json(data["pairing"])
    if len(pairing) != alg.dim or any(len(r) != alg.dim for r in pairing):
        raise ValueError(f"pairing must be {alg.dim} x {alg.dim}")
    nil = data.get("nilpotent")
    nil = tuple(parse_rational(x) for x in nil) if nil is not None else None
    return FrobeniusAlgebra(alg, pairing), nil


def _element(args, f: FrobeniusAlgebra, default: Optional[Tuple]) -> Tuple:
    alg = f.algebra
    if args.element:
        vec = [Fraction(0)] * alg.dim
        for part in args.element.split("+"):
            part = part.strip()
            coef, _, label = part.rpartition("*")
            try:
                vec[alg.index(label)] += parse_rational(coef) if coef else 1
            except KeyError as exc:
                raise InputError(str(exc), "--element") from None
        return tuple(vec)
    if args.vector:
        try:
            vec = tuple(parse_rational(x) for x in json.loads(args.vector))
        except (ValueError, TypeError) as exc:
            raise InputError(str(exc), "--vector") from None
        if len(vec) != alg.dim:
            raise InputError(f"expected {alg.dim} components", "--vector")
        return vec
    if default is None:
        raise InputError("no nilpotent element: pass --element or --vector", "<args>")
    return default


def _frob_json(f: FrobeniusAlgebra) -> Dict:
    return {"algebra": f.algebra.to_json(), "pairing": [[rational_to_str(Fraction(x)) for x in r] for r in f.pairing]}


def _vec_json(v) -> List[str]:
    return [rational_to_str(Fraction(x)) for x in v]


# ---------------------------------------------------------- commands

def cmd_check_frobenius(args, ctx: Context):
    data, loc = ctx.read_json(args.input, args.stdin, "algebra")
    f, _ = _parse(_frobenius_from, data, loc)
    rep = Report()
    rep.extend(algebra_check(f.algebra), "algebra.")
    rep.extend(frobenius_check(f), "frobenius.")
    return ctx.finish({}, rep)


def cmd_nilpotent(args, ctx: Context):
    data, loc = ctx.read_json(args.input, args.stdin, "algebra")
    f, nil = _parse(_frobenius_from, data, loc)
    n = _element(args, f, nil)
    rep = Report()
    rep.extend(frobenius_check(f), "frobenius.")
    try:
        filt = nilpotent_filtration(f, n)
    except FiltrationError as exc:
        rep.add("construction", False, {"reason": str(exc)})
        return ctx.finish({"element": _vec_json(n)}, rep)
    rep.extend(filtration_check(filt), "filtration.")
    payload = {"element": _vec_json(n), "filtration": filt.to_json()}
    if args.remark:
        rep.extend(remark_relation_check(f, n), "kernel_plus_weights.")
        rep.extend(remark_relation_check(f, n, use_image=True), "image_plus_weights.")
    return ctx.finish(payload, rep)


def cmd_quotient(args, ctx: Context):
    data, loc = ctx.read_json(args.input, args.stdin, "algebra")
    f, nil = _parse(_frobenius_from, data, loc)
    n = _element(args, f, nil)
    rep = Report()
    try:
        filt = nilpotent_filtration(f, n)
        qf, q = quotient_filtration(filt, args.level)
    except FiltrationError as exc:
        rep.add("construction", False, {"reason": str(exc)})
        return ctx.finish({}, rep)
    if qf.levels:
        rep.extend(filtration_check(qf), "quotient_filtration.")
    payload = {"quotient_algebra": q.algebra.to_json(),
               "projection": [_vec_json(r) for r in q.projection],
               "filtration": qf.to_json()}
    return ctx.finish(payload, rep)


def cmd_weight_filtration(args, ctx: Context):
    data, loc = ctx.read_json(args.input, args.stdin, "input")
    if isinstance(data, dict) and "matrix" in data:
        N = _parse(lambda d: matrix_from_json(d["matrix"]), data, loc)
    else:
        f, nil = _parse(_frobenius_from, data, loc)
        N = mult_matrix_constant(f.algebra, _element(args, f, nil))
    if any(len(r) != len(N) for r in N):
        raise InputError("matrix must be square", loc)
    rep = Report()
    try:
        W = weight_filtration(N)
    except FiltrationError as exc:
        rep.add("nilpotent", False, {"reason": str(exc)})
        return ctx.finish({}, rep)
    rep.extend(weight_filtration_check(N, W))
    payload = {"weights": [{"l": l, "basis": [_vec_json(v) for v in s.basis]} for l, s in enumerate(W)]}
    return ctx.finish(payload, rep)


def cmd_mhs(args, ctx: Context):
    data, loc = ctx.read_json(args.input, args.stdin, "surface")
    inp = _parse(SurfaceHodgeInput.from_json, data, loc)
    m = _parse(build_mhs, inp, loc)
    return ctx.finish({"mhs": mhs_to_json(m)}, polarization_check(m))


def _mfs_from(data: Dict) -> Tuple[MFSData, Optional[Dict]]:
    if "mfs" in data:
        return MFSData.from_json(data["mfs"]), data.get("source")
    return MFSData.from_json(data), data.get("source")


def cmd_check_mfs(args, ctx: Context):
    data, loc = ctx.read_json(args.input, args.stdin, "mfs")
    m, _ = _parse(_mfs_from, data, loc)
    if args.order is not None:
        m = _parse(lambda mm: at_order(mm, args.order), m, "--order")
    return ctx.finish({}, mfs_check(m), m.ring.order)


def _target_from(args, ctx: Context):
    if args.target == "p3":
        if args.surface:
            raise InputError("--surface does not apply to --target p3", "<args>")
        return "p3"
    if not args.surface:
        raise InputError("toric target needs --surface (a file or one of p2, f0, f1, f2)", "<args>")
    if args.surface in localqh.SURFACES and not os.path.exists(args.surface):
        return localqh.SURFACES[args.surface]
    data, loc = ctx.read_json(args.surface, False, "surface")
    return _parse(localqh.SurfaceData.from_json, data, loc)


def _table_for(args, ctx: Context, target, order: int) -> localqh.GWTable:
    if args.gw is None and not args.stdin:
        name = "p3" if target == "p3" else target.name
        try:
            return localqh.load_table(name)
        except localqh.LocalError as exc:
            raise InputError(str(exc), "--gw") from None
    data, loc = ctx.read_json(None if args.stdin else args.gw, args.stdin, "gw")
    table = _parse(localqh.GWTable.from_json, data, loc)
    _parse(table.validate, target, loc)
    return table


def cmd_local_qh(args, ctx: Context):
    order = _order(args)
    target = _target_from(args, ctx)
    table = _table_for(args, ctx, target, order)
    if any(sum(b) > order for b in table.entries):
        table = table.truncated(order)
    rep = Report()
    direct = localqh.local_product_direct(target, table, order)
    _, sliced = localqh.local_product_from_bundle(target, table, order)
    diff = localqh.mfs_difference(direct, sliced)
    rep.add("route_equality", diff is None, diff)
    if args.check_mfs:
        rep.extend(mfs_check(direct), "mfs.")
    payload: Dict[str, Any] = {
        "levels": [{"k": lv.k, "labels": list(lv.labels),
                    "eta": [_vec_json(r) for r in lv.eta]} for lv in direct.levels],
        "source": {"target": "p3" if target == "p3" else "toric",
                   "surface": None if target == "p3" else target.to_json(),
                   "gw": table.to_json()},
    }
    if args.emit_mfs:
        payload["mfs"] = direct.to_json()
    return ctx.finish(payload, rep, order)


def cmd_deformed(args, ctx: Context):
    data, loc = ctx.read_json(args.mfs, args.stdin, "mfs")
    m, source = _parse(_mfs_from, data, loc)
    order = _order(args) if (args.order is not None or "MFSLAB_ORDER" in os.environ) else m.ring.order
    m = _parse(lambda mm: at_order(mm, order), m, "--order")
    rep = Report()
    try:
        uv = dfm.uv_operators(m)
    except dfm.DeformedError as exc:
        rep.add("uv_closure", False, {"reason": str(exc)})
        return ctx.finish({}, rep, order)
    rep.extend(uv.report, "uv.")
    for lv in m.levels:
        if lv.labels:
            rep.extend(dfm.curvature_check(m, lv.k), f"curvature.level{lv.k}.")
    payload: Dict[str, Any] = {"uv": uv.to_json()}
    payload["uv"].pop("report")
    cands = None
    if args.emit_coords:
        if not source:
            raise InputError("--emit-coords needs a local-qh report with its 'source' block", loc)

        def build(src):
            table = localqh.GWTable.from_json(src["gw"])
            if src["target"] == "p3":
                return dfm.p3_flat_coords(table, order)
            surf = localqh.SurfaceData.from_json(src["surface"])
            return dfm.toric_flat_coords(surf, table, order, literal=args.literal)
        cands = _parse(build, source, loc + ": source")
        payload["coordinates"] = dfm.candidates_to_json(cands)
    if args.verify_coords:
        cdata, cloc = ctx.read_json(args.verify_coords, False, "coordinates")
        cands = _parse(dfm.candidates_from_json, cdata, cloc)
    if cands is not None and (args.verify or args.verify_coords):
        try:
            rep.extend(dfm.verify_deformed_coords(m, cands), "coords.")
        except dfm.DeformedError as exc:
            raise InputError(str(exc), args.verify_coords or loc) from None
    return ctx.finish(payload, rep, order)


def _param(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def cmd_catalog(args, ctx: Context):
    params: Dict[str, Any] = {}
    for key in ("d", "m"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    for key, attr in (("c", "c"), ("b", "b"), ("prim_pairing", "prim_pairing"), ("K", "K")):
        if getattr(args, attr) is not None:
            params[key] = _param(getattr(args, attr))
    try:
        entry = catalog_mod.catalog(args.example, **params)
    except catalog_mod.CatalogError as exc:
        raise InputError(str(exc), "--example") from None
    rep = Report()
    rep.extend(frobenius_check(entry.frobenius), "frobenius.")
    payload = {"example": args.example, "params": entry.params, **_frob_json(entry.frobenius)}
    if entry.nilpotent is not None:
        payload["nilpotent"] = _vec_json(entry.nilpotent)
    return ctx.finish(payload, rep)


# ------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mfslab", description="Exact checks for Frobenius and mixed Frobenius structures.")
    p.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    sub = p.add_subparsers(dest="command", required=True)

    def with_input(sp, name="input"):
        sp.add_argument(name, nargs="?", help="JSON input file")
        sp.add_argument("--stdin", action="store_true", help="read the input from standard input")

    def with_element(sp):
        sp.add_argument("--element", help="nilpotent element as a label sum, e.g. '4*H' or 'n'")
        sp.add_argument("--vector", help="nilpotent element as a JSON list of components")

    sp = sub.add_parser("check-frobenius", help="algebra and Frobenius axioms")
    with_input(sp)
    sp.set_defaults(func=cmd_check_frobenius)

    sp = sub.add_parser("nilpotent", help="filtration from a nilpotent element")
    with_input(sp)
    with_element(sp)
    sp.add_argument("--remark", action="store_true", help="compare with kernel/image plus weight filtration")
    sp.set_defaults(func=cmd_nilpotent)

    sp = sub.add_parser("quotient", help="induced filtration on A / I_k")
    with_input(sp)
    with_element(sp)
    sp.add_argument("--level", type=int, default=0)
    sp.set_defaults(func=cmd_quotient)

    sp = sub.add_parser("weight-filtration", help="monodromy weight filtration")
    with_input(sp)
    with_element(sp)
    sp.set_defaults(func=cmd_weight_filtration)

    sp = sub.add_parser("mhs", help="mixed Hodge structure of a polarized surface")
    with_input(sp)
    sp.set_defaults(func=cmd_mhs)

    sp = sub.add_parser("check-mfs", help="mixed Frobenius structure axioms")
    with_input(sp)
    sp.add_argument("--order", type=int)
    sp.set_defaults(func=cmd_check_mfs)

    sp = sub.add_parser("local-qh", help="local quantum cohomology of a toric surface or P^3")
    sp.add_argument("--surface", help="surface JSON file or a shipped name (p2, f0, f1, f2)")
    sp.add_argument("--target", choices=["toric", "p3"], default="toric")
    sp.add_argument("--gw", help="invariant table JSON (default: the shipped table)")
    sp.add_argument("--stdin", action="store_true", help="read the invariant table from standard input")
    sp.add_argument("--order", type=int)
    sp.add_argument("--check-mfs", action="store_true")
    sp.add_argument("--emit-mfs", action="store_true")
    sp.set_defaults(func=cmd_local_qh)

    sp = sub.add_parser("deformed", help="deformed connection and deformed flat coordinates")
    sp.add_argument("--mfs", help="MFS JSON, or a local-qh report made with --emit-mfs")
    sp.add_argument("--stdin", action="store_true")
    sp.add_argument("--order", type=int)
    sp.add_argument("--emit-coords", action="store_true")
    sp.add_argument("--verify-coords", help="candidate coordinates JSON to verify")
    sp.add_argument("--verify", action="store_true", help="verify the emitted coordinates")
    sp.add_argument("--literal", action="store_true", help="emit exp(hbar t0) as the top toric coordinate")
    sp.set_defaults(func=cmd_deformed)

    sp = sub.add_parser("catalog", help="emit a named example algebra")
    sp.add_argument("--example", required=True)
    sp.add_argument("--d", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--c", help="intersection matrix as JSON")
    sp.add_argument("--b", help="anticanonical coefficients as JSON")
    sp.add_argument("--prim-pairing", dest="prim_pairing", help="primitive pairing as JSON")
    sp.add_argument("--K", dest="K", help="integral of n^2")
    sp.set_defaults(func=cmd_catalog)
    return p


def run(argv: Sequence[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "local-qh" and args.stdin and args.gw:
        stderr.write(dumps({"error": "--gw and --stdin are exclusive", "location": "<args>"}))
        return 2
    ctx = Context(argv, args.timing)
    try:
        text, code = args.func(args, ctx)
    except InputError as exc:
        stderr.write(dumps({"error": str(exc), "location": exc.location}))
        return 2
    except (localqh.LocalError, MFSError) as exc:
        stderr.write(dumps({"error": str(exc), "location": "<input>"}))
        return 2
    stdout.write(text)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
