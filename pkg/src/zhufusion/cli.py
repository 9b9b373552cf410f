"""Command-line front end.

Every command prints one JSON document.  A job can also be given as a JSON
object on stdin (``zhufusion run``) with a ``"cmd"`` field naming the
command and the remaining fields mirroring the long options.

Exit codes: 0 success, 2 bad input, 3 invariant failure, 4 truncation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional

from . import intertwine as it
from . import logtransform as lt
from . import virasoro as vir
from . import zhu
from .exactla import rational_str, to_rational
from .formalcalc import TruncationError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_TRUNCATION = 4


class JobError(Exception):
    def __init__(self, code: str, message: str, exit_code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code
        self.exit_code = exit_code


class InvariantFailure(JobError):
    def __init__(self, message: str, report: Optional[dict] = None):
        super().__init__("INVARIANT_FAILED", message, EXIT_INVARIANT)
        self.report = report


# --- parsing helpers ---------------------------------------------------------------

def _rational(value, name: str) -> Fraction:
    if value is None:
        raise JobError("MISSING_PARAMETER", "parameter %r is required" % name)
    try:
        return to_rational(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise JobError("BAD_RATIONAL", "parameter %r: %s" % (name, exc))


def _json_arg(value, name: str):
    if isinstance(value, str):
        try:
            return json.loads(value)
        except json.JSONDecodeError as exc:
            raise JobError("BAD_JSON", "%s: %s" % (name, exc))
    return value


def _module(kind: str, c, h=None) -> vir.ModuleId:
    try:
        k = vir.Kind.parse(kind)
    except ValueError as exc:
        raise JobError("BAD_MODULE", str(exc))
    c = _rational(c, "c")
    if k is vir.Kind.VACUUM:
        return vir.vacuum(c)
    return vir.ModuleId(k, c, _rational(h, "h"))


def parse_element(data, module: Optional[vir.ModuleId] = None) -> vir.ModuleElement:
    """Accepts the full element JSON, {"terms": [...]} with the module given
    separately, a list of [parts, coeff] pairs, or the names "omega" / "vacuum"."""
    if isinstance(data, str) and data.strip()[:1] in ("[", "{", '"'):
        data = _json_arg(data, "element")
    try:
        if isinstance(data, str):
            if module is None or module.kind is not vir.Kind.VACUUM:
                raise JobError("BAD_ELEMENT", "named states need --module vacuum")
            if data.lower() in ("omega", "w"):
                return vir.omega(module.c)
            if data.lower() in ("vacuum", "1", "one"):
                return vir.lowest_vector(module)
            raise JobError("BAD_ELEMENT", "unknown named state %r" % data)
        if isinstance(data, list):
            if module is None:
                raise JobError("BAD_ELEMENT", "a bare term list needs the module options")
            return vir.element(module, {tuple(p): to_rational(str(c)) for p, c in data})
        if isinstance(data, dict):
            if "module" in data:
                el = vir.ModuleElement.from_json(data)
                if module is not None and el.module != module:
                    raise JobError("BAD_ELEMENT", "element module %r does not match options" % (el.module,))
                return el
            if module is None:
                raise JobError("BAD_ELEMENT", "element without module information")
            return vir.ModuleElement.from_json(dict(data, module=module.to_json()))
    except JobError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise JobError("BAD_ELEMENT", str(exc))
    raise JobError("BAD_ELEMENT", "cannot read element %r" % (data,))


def _matrix(data, name: str):
    data = _json_arg(data, name)
    try:
        return [[to_rational(str(x)) for x in row] for row in data]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise JobError("BAD_MATRIX", "%s: %s" % (name, exc))


def _avmodule(spec: Dict[str, Any], idx: int) -> zhu.AVModule:
    t = spec.get("t%d" % idx)
    if t is not None:
        M = _matrix(t, "t%d" % idx)
        try:
            return zhu.AVModule(len(M), tuple(tuple(r) for r in M))
        except ValueError as exc:
            raise JobError("BAD_MATRIX", str(exc))
    dim = spec.get("dim%d" % idx)
    if dim is None:
        raise JobError("MISSING_PARAMETER", "need dim%d or t%d" % (idx, idx))
    dim = int(dim)
    if dim < 1:
        raise JobError("BAD_PARAMETER", "dim%d must be >= 1" % idx)
    h = _rational(spec.get("h%d" % idx, "0"), "h%d" % idx)
    # scalar action h on a dim-dimensional space
    return zhu.AVModule(dim, tuple(tuple(h if i == j else Fraction(0) for j in range(dim)) for i in range(dim)))


# --- commands ------------------------------------------------------------------------

def cmd_zhu_reduce(spec) -> dict:
    module = _module(spec.get("module", "vacuum"), spec.get("c"), spec.get("h"))
    u = parse_element(spec.get("element"), module)
    try:
        nf = zhu.reduce(u, check=not spec.get("no-check", False))
    except zhu.ReductionMismatch as exc:
        raise InvariantFailure(str(exc))
    except zhu.ReductionError as exc:
        raise JobError("REDUCTION_FAILED", str(exc), EXIT_TRUNCATION)
    return nf.to_json()


def cmd_zhu_product(spec) -> dict:
    V = vir.vacuum(_rational(spec.get("c"), "c"))
    kind = spec.get("module", "vacuum")
    module = _module(kind, spec.get("c"), spec.get("h"))
    a = parse_element(spec.get("a"), V)
    u = parse_element(spec.get("b"), module)
    op = spec.get("op", "star")
    try:
        if op == "star":
            out = zhu.star(a, u, "left")
        elif op == "right-star":
            out = zhu.star(a, u, "right")
        elif op == "circle":
            out = zhu.circle(a, u)
        else:
            raise JobError("BAD_PARAMETER", "op must be star, right-star or circle")
        report = {"element": out.to_json()}
        report["normal_form"] = zhu.reduce(out).to_json()
    except zhu.ReductionMismatch as exc:
        raise InvariantFailure(str(exc))
    except ValueError as exc:
        raise JobError("BAD_ELEMENT", str(exc))
    return report


def cmd_fusion_hom_dim(spec) -> dict:
    O2, O3 = _avmodule(spec, 2), _avmodule(spec, 3)
    try:
        sol = it.fusion_dim_hom(O2, O3, int(spec.get("poly-degree", 4)))
    except RuntimeError as exc:
        raise InvariantFailure(str(exc))
    return {"dimension": sol.dimension, "brute_force_dimension": sol.brute_force_dimension,
            "basis": [b.to_json() for b in sol.basis]}


def _type_params(spec):
    return [_rational(spec.get(k), k) for k in ("c", "h1", "h2", "h3")]


def _depth(spec, key="depth") -> int:
    D = int(spec.get(key, 2))
    if D < 0:
        raise JobError("BAD_PARAMETER", "%s must be >= 0" % key)
    return D


def cmd_intertwine_solve(spec) -> dict:
    params = _type_params(spec)
    D = _depth(spec)
    cap = int(spec.get("weight-cap", it.DEFAULT_WEIGHT_CAP))
    if cap < 2:
        raise JobError("BAD_PARAMETER", "weight-cap must be >= 2")
    pin = bool(spec.get("pin-ophi-zero", False))
    system = it.build_constraints(*params, D, cap)
    sol = it.solve_mode_families(system, pin_ophi_zero=pin)
    report = {"dimension": sol.dimension, "rows": sol.rows, "unknowns": sol.unknowns}
    if D >= 1:
        prev = it.solve_mode_families(it.build_constraints(*params, D - 1, cap), pin_ophi_zero=pin)
        report["stabilized"] = prev.dimension == sol.dimension
        report["previous_dimension"] = prev.dimension
    else:
        report["stabilized"] = False
    if spec.get("families"):
        report["families"] = [f.to_json() for f in sol.basis]
        report["hom"] = [it.extract_hom(f).to_json() for f in sol.basis]
    return report


def cmd_intertwine_check(spec) -> dict:
    data = _json_arg(spec.get("family"), "family")
    if data is None:
        raise JobError("MISSING_PARAMETER", "family is required")
    try:
        phi = it.TruncatedModeFamily.from_json(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise JobError("BAD_FAMILY", str(exc))
    cap = int(spec.get("weight-cap", it.DEFAULT_WEIGHT_CAP))
    instances = spec.get("instances")
    if instances is not None:
        insts = [it.Instance.from_json(x) for x in _json_arg(instances, "instances")]
    else:
        V = phi.kind.V
        basis = [p for d in range(phi.depth + 1) for p in vir.basis_at_degree(phi.kind.W1, d)]
        insts = [inst for ap in vir.basis_up_to(V, cap) for u in basis for v in basis
                 for inst in it.interior_instances(ap, u, v, phi.depth)]
    results = []
    failed = 0
    for inst in insts:
        try:
            ok = it.check_borcherds_residual(phi, inst)
        except TruncationError as exc:
            raise JobError("NOT_INTERIOR", str(exc), EXIT_TRUNCATION)
        failed += not ok
        if not ok or instances is not None:
            results.append(dict(inst.to_json(), ok=ok))
    l1_bad = it.l1_mode_relation_failures(phi)
    report = {"instances": len(insts), "failed": failed, "report": results,
              "l1_mode_relation_failures": len(l1_bad)}
    if failed or l1_bad:
        raise InvariantFailure("%d Borcherds instances and %d L(-1) relations fail" % (failed, len(l1_bad)), report)
    return report


def cmd_log_roundtrip(spec) -> dict:
    data = _json_arg(spec.get("spec"), "spec")
    if data is None:
        raise JobError("MISSING_PARAMETER", "spec is required")
    try:
        gs = [lt.GradedOperatorData.from_json(g) for g in data["modules"]]
        phi = lt.BlockFamily.from_json(data["family"])
    except (KeyError, TypeError, ValueError) as exc:
        raise JobError("BAD_SPEC", str(exc))
    if len(gs) != 3:
        raise JobError("BAD_SPEC", "need L(0) data for exactly three modules")
    try:
        J = lt.from_z_graded(phi, *gs)
    except ValueError as exc:
        raise JobError("BAD_SPEC", str(exc))
    checks = {
        "roundtrip": lt.to_z_graded(J) == phi,
        "log_degree_bound": J.log_degree <= lt.log_degree_bound(*gs),
    }
    # x d/dx x^{L(0)} v = x^{L(0)} L(0) v on every basis vector of every module
    ok = True
    for g in gs:
        for d, n in enumerate(g.dims):
            for p in range(n):
                e = [Fraction(int(q == p)) for q in range(n)]
                for sign in (1, -1):
                    lhs = lt.x_pow_l0(g, sign, e, d).x_ddx()
                    rhs = lt.x_pow_l0(g, sign, [sign * x for x in lt.l0_apply(g, e, d)], d)
                    ok = ok and lhs == rhs
    checks["x_ddx"] = ok
    if "L-1" in data:
        checks["l1_recursion"] = lt.l1_recursion(J, data["L-1"])
    report = {"checks": {k: ("pass" if v else "fail") for k, v in checks.items()},
              "log_degree": J.log_degree}
    if not all(checks.values()):
        raise InvariantFailure("log round trip invariants failed", report)
    return report


COMMANDS = {
    "zhu reduce": cmd_zhu_reduce,
    "zhu product": cmd_zhu_product,
    "fusion hom-dim": cmd_fusion_hom_dim,
    "intertwine solve": cmd_intertwine_solve,
    "intertwine check": cmd_intertwine_check,
    "log roundtrip": cmd_log_roundtrip,
}


def run(spec: Dict[str, Any]) -> dict:
    """Dispatch one job; raises JobError on bad input or failed invariants."""
    if not isinstance(spec, dict):
        raise JobError("BAD_JOB", "job must be a JSON object")
    cmd = spec.get("cmd")
    if cmd not in COMMANDS:
        raise JobError("UNKNOWN_COMMAND", "cmd must be one of %s" % ", ".join(sorted(COMMANDS)))
    norm = {k.replace("_", "-"): v for k, v in spec.items()}
    return COMMANDS[cmd](norm)


# --- argparse ------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zhufusion", description="Zhu algebras and Z-graded intertwining operators for Virasoro modules.")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--self-test", action="store_true", help="run the acceptance checks and print a summary")
    sub = p.add_subparsers(dest="group")

    p_run = sub.add_parser("run", help="read a JSON job from stdin (or --job)")
    p_run.add_argument("--job", help="path to a JSON job file")

    g_zhu = sub.add_parser("zhu", help="Zhu algebra products and normal forms").add_subparsers(dest="action")
    r = g_zhu.add_parser("reduce")
    r.add_argument("--module", default="vacuum", choices=["vacuum", "verma"])
    r.add_argument("--c", required=True)
    r.add_argument("--h")
    r.add_argument("--element", required=True)
    r.add_argument("--no-check", action="store_true", help="skip the quotient cross-check")
    pr = g_zhu.add_parser("product")
    pr.add_argument("--module", default="vacuum", choices=["vacuum", "verma"])
    pr.add_argument("--c", required=True)
    pr.add_argument("--h")
    pr.add_argument("--a", required=True, help="vacuum state")
    pr.add_argument("--b", required=True, help="element of the module")
    pr.add_argument("--op", default="star", choices=["star", "right-star", "circle"])

    g_fus = sub.add_parser("fusion", help="Hom-side fusion dimension").add_subparsers(dest="action")
    f = g_fus.add_parser("hom-dim")
    f.add_argument("--dim2", type=int)
    f.add_argument("--dim3", type=int)
    f.add_argument("--h2", default="0")
    f.add_argument("--h3", default="0")
    f.add_argument("--t2", help="JSON matrix of t on Omega_2")
    f.add_argument("--t3", help="JSON matrix of t on Omega_3")
    f.add_argument("--poly-degree", type=int, default=4)

    g_int = sub.add_parser("intertwine", help="solve or check truncated intertwining operators").add_subparsers(dest="action")
    s = g_int.add_parser("solve")
    for name in ("c", "h1", "h2", "h3"):
        s.add_argument("--" + name, required=True)
    s.add_argument("--depth", type=int, default=2)
    s.add_argument("--weight-cap", type=int, default=it.DEFAULT_WEIGHT_CAP)
    s.add_argument("--pin-ophi-zero", action="store_true")
    s.add_argument("--families", action="store_true", help="include the basis families")
    ch = g_int.add_parser("check")
    ch.add_argument("--family", required=True, help="family JSON or @path")
    ch.add_argument("--instances", help="JSON list of instances (default: all interior ones)")
    ch.add_argument("--weight-cap", type=int, default=it.DEFAULT_WEIGHT_CAP)

    g_log = sub.add_parser("log", help="logarithmic transform checks").add_subparsers(dest="action")
    lr = g_log.add_parser("roundtrip")
    lr.add_argument("--spec", required=True, help="spec JSON or @path")
    return p


def _load(value):
    if isinstance(value, str) and value.startswith("@"):
        with open(value[1:]) as fh:
            return fh.read()
    return value


def _emit(report, out: Optional[str]):
    text = json.dumps(report, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    if args.self_test:
        from .selftest import run_all, format_table
        results = run_all()
        sys.stdout.write(format_table(results) + "\n")
        return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT
    try:
        if args.group == "run":
            text = open(args.job).read() if args.job else sys.stdin.read()
            spec = _json_arg(text, "job")
        elif args.group and getattr(args, "action", None):
            spec = {k.replace("_", "-"): _load(v) for k, v in vars(args).items()
                    if k not in ("group", "action", "out", "self_test") and v is not None}
            spec["cmd"] = "%s %s" % (args.group, args.action)
        else:
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        report = run(spec)
    except InvariantFailure as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}, "report": exc.report}, args.out)
        return exc.exit_code
    except JobError as exc:
        _emit({"error": {"code": exc.code, "message": str(exc)}}, args.out)
        return exc.exit_code
    except TruncationError as exc:
        _emit({"error": {"code": "TRUNCATION", "message": str(exc)}}, args.out)
        return EXIT_TRUNCATION
    except OSError as exc:
        _emit({"error": {"code": "IO_ERROR", "message": str(exc)}}, args.out)
        return EXIT_INPUT
    _emit(report, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
