"""``jlie`` command line: JSON reports on stdout.

Exit status: 0 when every check passed, 1 when a check failed (or an
integration aborted), 2 on parse, schema or flag errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import gko
from .jacobi import JacobiError, UnusableStructureError, hamiltonian_vf, jacobi_bracket, solve_hamiltonian
from .liesys import (
    ExceedsBound,
    LieSystemError,
    assemble_tdvf,
    build_function_algebra,
    check_constant_of_motion,
    lie_closure,
    vg_algebra,
)
from .manifest import ManifestError, load_fixture, load_manifest, read_manifest_text
from .multivec import Multivector
from .numint import IntegrationError, SuperpositionError, com_drift, integrate, riccati_superposition_check
from .scalar import ParseError, ScalarError, UnknownCoordinateError, is_zero, parse_expr

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
DRIFT_TOL = 1e-6


class UsageError(Exception):
    """Bad input: reported with exit status 2."""


def _check(name: str, verdict: Any, certainty: str, passed: bool, **extra) -> dict:
    out = {"name": name, "verdict": str(verdict), "certainty": certainty, "passed": bool(passed)}
    out.update(extra)
    return out


def _digest(inputs: dict) -> str:
    blob = json.dumps(inputs, sort_keys=True, separators=(",", ":"), default=str)
    return "sha256:" + hashlib.sha256(blob.encode()).hexdigest()


def _manifest(path: str):
    try:
        text, _ = read_manifest_text(path)
        return load_manifest(path), text
    except ManifestError as exc:
        raise UsageError(str(exc)) from None
    except ScalarError as exc:
        raise UsageError(f"manifest {path}: {exc}") from None


def _parse(text: str, chart, what: str):
    try:
        return parse_expr(text, chart)
    except (ParseError, UnknownCoordinateError) as exc:
        raise UsageError(f"{what}: {exc}") from None


# -- commands -----------------------------------------------------------------


def cmd_check(args) -> tuple[dict, list, dict]:
    m, text = _manifest(args.manifest)
    J = m.structure(args.seed)
    checks = [
        _check("[L,L] - 2 R^L == 0", J.verdicts[0], J.verdicts[0].certainty, J.verdicts[0].is_zero),
        _check("[R,L] == 0", J.verdicts[1], J.verdicts[1].certainty, J.verdicts[1].is_zero),
    ]
    result = {"usable": J.usable, "poisson": J.is_poisson, "annotations": list(m.annotations)}
    return {"manifest": text}, checks, result


def cmd_bracket(args):
    m, text = _manifest(args.manifest)
    f = _parse(args.f, m.chart, "f")
    g = _parse(args.g, m.chart, "g")
    J = m.structure(args.seed)
    J.require_usable()
    b = jacobi_bracket(J, f, g)
    checks = [_check("structure usable", "usable", J.certainty, True)]
    return {"manifest": text, "f": args.f, "g": args.g}, checks, {"bracket": str(b)}


def cmd_hamiltonian(args):
    m, text = _manifest(args.manifest)
    J = m.structure(args.seed)
    J.require_usable()
    inputs = {"manifest": text, "function": args.function, "max_degree": args.max_degree}
    checks, result = [], {}
    if args.function is not None:
        f = _parse(args.function, m.chart, "function")
        pair = hamiltonian_vf(J, f, args.seed)
        result = {"field": str(pair.field), "components": pair.field.to_json(), "good": pair.good}
        checks.append(_check("X_f computed", "ok", J.certainty, True))
        return inputs, checks, result
    names = list(m.fields)
    funcs = list(m.functions.items())
    if funcs and len(funcs) == len(names):
        for (hname, h), fname in zip(funcs, names):
            v = (hamiltonian_vf(J, h, args.seed).field - m.fields[fname]).zero_verdict(args.seed)
            checks.append(_check(f"X_{hname} == {fname}", v, v.certainty, v.is_zero))
            result[fname] = str(h)
        return inputs, checks, result
    if not names:
        raise UsageError("manifest has no fields; pass --function")
    for fname in names:
        try:
            h = solve_hamiltonian(J, m.fields[fname], args.max_degree)
        except JacobiError as exc:
            checks.append(_check(f"hamiltonian of {fname}", f"inconclusive: {exc}", "n/a", False))
            continue
        if h is None:
            checks.append(_check(f"hamiltonian of {fname}", f"none of degree <= {args.max_degree} (inconclusive)", "n/a", False))
        else:
            checks.append(_check(f"hamiltonian of {fname}", f"h = {h}", "proven", True))
            result[fname] = str(h)
    return inputs, checks, result


def cmd_closure(args):
    m, text = _manifest(args.manifest)
    if not m.fields:
        raise UsageError("manifest has no fields")
    out = lie_closure(list(m.fields.values()), args.max_dim, args.seed)
    inputs = {"manifest": text, "max_dim": args.max_dim}
    if isinstance(out, ExceedsBound):
        return inputs, [_check("closure", f"ExceedsBound({out.max_dim})", "proven", False)], out.to_json()
    cert = "proven" if out.exact else "probable"
    checks = [_check("closure", f"closed at dimension {out.dim}", cert, True)]
    return inputs, checks, out.to_json()


def cmd_com(args):
    m, text = _manifest(args.manifest)
    f = _parse(args.f, m.chart, "f")
    J = m.structure(args.seed)
    J.require_usable()
    if not m.fields or len(m.functions) != len(m.fields):
        raise UsageError("manifest needs one function per field")
    V = vg_algebra(list(m.fields.values()), args.seed)
    A = build_function_algebra(J, V, list(m.functions.values()), args.seed, list(m.functions))
    brackets = {}
    checks = []
    for name, h in zip(A.names, A.generators):
        b = jacobi_bracket(J, f, h)
        v = is_zero(b, args.seed)
        brackets[name] = str(b)
        checks.append(_check(f"{{f, {name}}} == 0", v, v.certainty, v.is_zero))
    result = {"constant_of_motion": check_constant_of_motion(J, f, A, args.seed), "brackets": brackets}
    return {"manifest": text, "f": args.f}, checks, result


def cmd_table(args):
    params: dict[str, Any] = {}
    for key in ("alpha", "r", "bivector"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    for key in ("xi", "eta"):
        val = getattr(args, key)
        if val is not None:
            params[key] = [s.strip() for s in val.split(";")]
    inputs = {"id": args.id, "all": args.all, "params": params, "max_degree": args.max_degree}
    if args.all:
        if args.id or params:
            raise UsageError("--all takes no class id or parameters")
        reports = gko.verify_all(args.seed)
    else:
        if not args.id:
            raise UsageError("give a class id or --all")
        try:
            reports = [gko.verify_table(args.id, params, args.max_degree, args.seed)]
        except (gko.UnknownClassError, gko.ParameterError) as exc:
            raise UsageError(str(exc)) from None
    checks = []
    for r in reports:
        checks.append(_check(r["id"], r["conclusion"], r["certainty"], r["passed"]))
    summary: dict[str, int] = {}
    for r in reports:
        summary[r["expected_verdict"]] = summary.get(r["expected_verdict"], 0) + 1
    return inputs, checks, {"summary": summary, "classes": reports}


_BUILTIN = {"heisenberg": "heisenberg", "sl2": "sl2", "riccati": "riccati_r1"}


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def cmd_integrate(args):
    if (args.system is None) == (args.manifest is None):
        raise UsageError("give exactly one of --system or --manifest")
    if args.system:
        m = load_fixture(_BUILTIN[args.system])
        if args.system == "riccati":
            coeffs = [args.a0, args.a1, args.a2]
        else:
            coeffs = [args.b1, args.b2, args.b3]
        if args.coeffs is not None:
            raise UsageError("--coeffs is for --manifest systems")
    else:
        m, _ = _manifest(args.manifest)
        if args.coeffs is None:
            raise UsageError("--manifest needs --coeffs")
        coeffs = [s.strip() for s in args.coeffs.split(";")]
    if args.superposition is not None and args.system != "riccati":
        raise UsageError("--superposition is only available for --system riccati")
    if not m.fields:
        raise UsageError("system has no fields")
    x0 = _floats(args.x0, "--x0")
    if len(x0) != m.chart.dim:
        raise UsageError(f"--x0 needs {m.chart.dim} values")
    if not args.step > 0 or not args.t1 > args.t0:
        raise UsageError("need step > 0 and t1 > t0")
    try:
        V = vg_algebra(list(m.fields.values()), args.seed)
        X = assemble_tdvf(V, coeffs)
    except (ParseError, UnknownCoordinateError, LieSystemError, ScalarError) as exc:
        raise UsageError(f"system: {exc}") from None
    com = _parse(args.com, m.chart, "--com") if args.com is not None else None
    inputs = {
        "system": args.system or m.to_json(),
        "coefficients": [str(c) for c in X.coefficients],
        "x0": x0,
        "t0": args.t0,
        "t1": args.t1,
        "step": args.step,
        "com": args.com,
        "superposition": args.superposition,
        "k": args.k,
    }
    checks, result = [], {}
    try:
        traj = integrate(X, x0, args.t0, args.t1, args.step)
    except IntegrationError as exc:
        checks.append(_check("integration", str(exc), "numeric", False, time=exc.time))
        return inputs, checks, result
    traj.to_csv(args.csv)
    checks.append(_check("integration", f"{len(traj.times) - 1} RK4 steps", "numeric", True))
    result["final"] = {"t": traj.times[-1], **dict(zip(traj.coords, traj.final))}
    result["csv"] = args.csv
    if com is not None:
        try:
            drift = com_drift(traj, com)
        except IntegrationError as exc:
            checks.append(_check("com_drift", str(exc), "numeric", False))
        else:
            result["com_drift"] = drift
            checks.append(_check("com_drift < 1e-06", f"{drift:.3e}", "numeric", drift < DRIFT_TOL))
    if args.superposition is not None:
        starts = _floats(args.superposition, "--superposition")
        if len(starts) != 3:
            raise UsageError("--superposition needs three initial values")
        try:
            sols = [integrate(X, [s], args.t0, args.t1, args.step) for s in starts]
            rep = riccati_superposition_check(sols, args.k)
        except (IntegrationError, SuperpositionError) as exc:
            checks.append(_check("superposition", str(exc), "numeric", False))
        else:
            result["superposition"] = rep.to_json()
            checks.append(_check("superposition", f"residual {rep.residual:.3e}, cross-ratio drift {rep.cross_ratio_drift:.3e}", "numeric", rep.passed))
    return inputs, checks, result


COMMANDS = {
    "check": cmd_check,
    "bracket": cmd_bracket,
    "hamiltonian": cmd_hamiltonian,
    "closure": cmd_closure,
    "table": cmd_table,
    "integrate": cmd_integrate,
    "com": cmd_com,
}


def _default_seed() -> int:
    raw = os.environ.get("JLIE_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for probabilistic zero tests (env JLIE_SEED, default 0)")
    common.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS, help="indented JSON")
    p = argparse.ArgumentParser(prog="jlie", description="Jacobi manifolds and Jacobi-Lie systems", parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="verify the Jacobi identities of a manifest")
    s.add_argument("manifest")

    s = sub.add_parser("bracket", parents=[common], help="Jacobi bracket {f, g}")
    s.add_argument("manifest")
    s.add_argument("f")
    s.add_argument("g")

    s = sub.add_parser("hamiltonian", parents=[common], help="Hamiltonian fields and functions")
    s.add_argument("manifest")
    s.add_argument("--function", help="report X_f for this function")
    s.add_argument("--max-degree", type=int, default=2, help="polynomial ansatz degree (default 2)")

    s = sub.add_parser("closure", parents=[common], help="Lie closure of the manifest fields")
    s.add_argument("manifest")
    s.add_argument("--max-dim", type=int, default=12)

    s = sub.add_parser("table", parents=[common], help="verify classification entries")
    s.add_argument("id", nargs="?")
    s.add_argument("--all", action="store_true")
    s.add_argument("--alpha")
    s.add_argument("--r", type=int)
    s.add_argument("--bivector", help="coefficient of dx^dy for a candidate Poisson structure")
    s.add_argument("--xi", help="semicolon-separated xi_i(x)")
    s.add_argument("--eta", help="semicolon-separated eta_i(x)")
    s.add_argument("--max-degree", type=int)

    s = sub.add_parser("integrate", parents=[common], help="integrate a t-dependent Lie system")
    s.add_argument("--system", choices=sorted(_BUILTIN))
    s.add_argument("--manifest")
    s.add_argument("--coeffs", help="semicolon-separated b_i(t) for --manifest")
    for name in ("a0", "a1", "a2", "b1", "b2", "b3"):
        s.add_argument(f"--{name}", default="0", help="coefficient as an expression in t")
    s.add_argument("--x0", required=True, help="comma-separated initial point")
    s.add_argument("--t0", type=float, default=0.0)
    s.add_argument("--t1", type=float, default=1.0)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--csv", default="trajectory.csv")
    s.add_argument("--com", help="report the drift of this function")
    s.add_argument("--superposition", help="three comma-separated initial values (riccati)")
    s.add_argument("--k", type=float, default=0.5)

    s = sub.add_parser("com", parents=[common], help="constant-of-motion check")
    s.add_argument("manifest")
    s.add_argument("f")
    return p


_EXPR_COMMANDS = {"bracket", "com"}
_FLAGS = {"--pretty", "-h", "--help"}


def _protect_expressions(argv: list[str]) -> list[str]:
    """Let ``bracket``/``com`` take expressions such as ``-y`` without ``--``.

    Known options are moved ahead of an inserted ``--``; everything else
    after the subcommand is positional.
    """
    cmd = next((i for i, a in enumerate(argv) if a in COMMANDS), None)
    if cmd is None or argv[cmd] not in _EXPR_COMMANDS or "--" in argv[cmd:]:
        return argv
    opts, pos = [], []
    rest = iter(argv[cmd + 1:])
    for a in rest:
        if a in _FLAGS:
            opts.append(a)
        elif a == "--seed":
            opts += [a, next(rest, "")]
        elif a.startswith("--seed="):
            opts.append(a)
        else:
            pos.append(a)
    return argv[: cmd + 1] + opts + ["--"] + pos


def run(argv: Sequence[str] | None = None) -> tuple[int, dict, bool]:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(_protect_expressions(argv))
    if not hasattr(args, "seed"):
        args.seed = _default_seed()
    if not hasattr(args, "pretty"):
        args.pretty = False
    report: dict[str, Any] = {"command": args.command}
    try:
        inputs, checks, result = COMMANDS[args.command](args)
    except UsageError as exc:
        report.update(error=str(exc), status="error")
        return EXIT_USAGE, report, args.pretty
    except UnusableStructureError as exc:
        report.update(error=str(exc), status="failed")
        return EXIT_FAILED, report, args.pretty
    except (gko.GKOError, LieSystemError, ScalarError) as exc:
        report.update(error=str(exc), status="error")
        return EXIT_USAGE, report, args.pretty
    inputs["seed"] = args.seed
    passed = all(c["passed"] for c in checks)
    report.update(
        inputs_digest=_digest(inputs),
        seed=args.seed,
        checks=checks,
        result=result,
        status="ok" if passed else "failed",
    )
    return (EXIT_OK if passed else EXIT_FAILED), report, args.pretty


def main(argv: Sequence[str] | None = None) -> int:
    try:
        code, report, pretty = run(argv)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    print(json.dumps(report, indent=2 if pretty else None, sort_keys=False, default=_json_default))
    return code


def _json_default(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, Multivector):
        return str(o)
    raise TypeError(type(o).__name__)


if __name__ == "__main__":
    sys.exit(main())
