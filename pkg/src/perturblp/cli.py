"""Command-line front end.

Exit codes: 0 success, 1 domain failure (e.g. an infeasible problem where
a value was required), 2 usage, I/O or schema errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import serialization as ser
from .linalg import parse_rational
from .mdp import (
    StationaryPolicy,
    build_bundle,
    build_discounted_lp,
    evaluate_policy,
    verify_reduction,
)
from .perturbed import (
    InfeasibleError,
    SweepReport,
    Variant,
    build_limiting,
    check_assumptions,
    check_equivalence,
    check_es1,
    classify_bases,
    compute_j0,
    instantiate,
    sweep,
)
from .simplex import EnumerationCapExceeded, solve

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

VERBS = (
    "solve", "j0", "es1", "limit", "equiv", "assumptions", "bases", "sweep",
    "mdp-build", "mdp-average", "mdp-reduce", "mdp-eval", "validate",
)


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected an exact rational like 1/8, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="perturblp",
        description="Exact singularly perturbed LPs and their MDP application.",
    )
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def verb(name, help, formats=("json", "table")):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("input", help="problem file (JSON)")
        sp.add_argument("--format", choices=formats, default="json")
        return sp

    sp = verb("solve", "solve an LP, or a perturbed LP at --eps")
    sp.add_argument("--eps", type=_rational, default=None)
    verb("j0", "positivity set J0 of the unperturbed problem")
    verb("es1", "extended Slater condition of order 1")
    sp = verb("limit", "build and solve the limiting LP")
    sp.add_argument("--variant", choices=[v.value for v in Variant], default="theta1")
    verb("equiv", "certify equivalence of the two limiting variants")
    sp = verb("assumptions", "rank assumptions and the boundedness probe")
    sp.add_argument("--eps-probe", type=_rational, default=Fraction(1, 8))
    verb("bases", "classify m-column bases by their determinant polynomial",
         ("json", "table", "csv"))
    sp = verb("sweep", "solve along a geometric eps schedule", ("json", "table", "csv"))
    _sweep_args(sp)
    sp = verb("mdp-build", "emit an LP derived from an MDP")
    sp.add_argument("--target", choices=["perturbed", "discounted", "average", "limiting"],
                    default="perturbed")
    sp.add_argument("--alpha", type=_rational, default=None)
    verb("mdp-average", "solve the average-reward LP")
    sp = verb("mdp-reduce", "verify the discounted-to-average reduction")
    _sweep_args(sp)
    sp = verb("mdp-eval", "evaluate a deterministic stationary policy")
    sp.add_argument("--policy", required=True,
                    help="comma-separated 1-based action per state, e.g. 1,2,1")
    sp.add_argument("--alpha", type=_rational, default=None)
    sp = verb("validate", "check a problem file against its schema")
    sp.add_argument("--kind", choices=ser.KINDS, default=None)
    return parser


def _sweep_args(sp):
    sp.add_argument("--eps0", type=_rational, default=Fraction(1, 2))
    sp.add_argument("--ratio", type=_rational, default=Fraction(1, 2))
    sp.add_argument("--steps", type=int, default=12)


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def _expect(data, *kinds):
    kind = ser.detect_kind(data)
    if kind not in kinds:
        raise UsageError(f"expected a {' or '.join(kinds)} file, got {kind or 'unknown'}")
    return kind


def _perturbed(data):
    _expect(data, "perturbed")
    return ser.perturbed_from_json(data)


def _mdp(data):
    _expect(data, "mdp")
    return ser.mdp_from_json(data)


def _infeasible(msg: str):
    return {"status": "infeasible", "error": msg}, EXIT_DOMAIN


def cmd_solve(data, args):
    kind = _expect(data, "lp", "perturbed")
    if kind == "lp":
        if args.eps is not None:
            raise UsageError("--eps applies only to perturbed LP files")
        lp = ser.lp_from_json(data)
    else:
        eps = Fraction(0) if args.eps is None else args.eps
        if eps < 0:
            raise UsageError("--eps must be nonnegative")
        lp = instantiate(ser.perturbed_from_json(data), eps)
    res = solve(lp)
    return ser.solve_result_to_json(res), EXIT_OK if res.optimal else EXIT_DOMAIN


def cmd_j0(data, args):
    try:
        return ser.j0_to_json(compute_j0(_perturbed(data))), EXIT_OK
    except InfeasibleError as exc:
        return _infeasible(str(exc))


def cmd_es1(data, args):
    try:
        rep = check_es1(_perturbed(data))
    except InfeasibleError as exc:
        return _infeasible(str(exc))
    return ser.es1_to_json(rep), EXIT_OK


def cmd_limit(data, args):
    p = _perturbed(data)
    try:
        lim = build_limiting(p, Variant(args.variant))
    except InfeasibleError as exc:
        return _infeasible(str(exc))
    res = solve(lim.lp)
    return ser.limiting_to_json(lim, res), EXIT_OK if res.optimal else EXIT_DOMAIN


def cmd_equiv(data, args):
    try:
        return ser.equivalence_to_json(check_equivalence(_perturbed(data))), EXIT_OK
    except InfeasibleError as exc:
        return _infeasible(str(exc))


def cmd_assumptions(data, args):
    if args.eps_probe <= 0:
        raise UsageError("--eps-probe must be positive")
    return ser.assumptions_to_json(check_assumptions(_perturbed(data), args.eps_probe)), EXIT_OK


def cmd_bases(data, args):
    try:
        tags = classify_bases(_perturbed(data))
    except EnumerationCapExceeded as exc:
        raise UsageError(str(exc))
    rows = [{"basis": [j + 1 for j in J], "class": cls.value} for J, cls in tags]
    return {"bases": rows}, EXIT_OK


def _check_sweep_args(args):
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.eps0 <= 0 or not 0 < args.ratio < 1:
        raise UsageError("need --eps0 > 0 and 0 < --ratio < 1")


def cmd_sweep(data, args):
    _check_sweep_args(args)
    rep = sweep(_perturbed(data), args.eps0, args.ratio, args.steps)
    return rep, EXIT_OK


def cmd_mdp_build(data, args):
    mdp, file_alpha = _mdp(data)
    bundle = build_bundle(mdp)
    if args.target == "perturbed":
        out = ser.perturbed_to_json(bundle.discounted)
    elif args.target == "average":
        out = ser.lp_to_json(bundle.average)
    elif args.target == "limiting":
        out = ser.lp_to_json(bundle.derived_limiting.lp)
    else:
        alpha = args.alpha if args.alpha is not None else file_alpha
        if alpha is None or not 0 < alpha < 1:
            raise UsageError("the discounted target needs --alpha in (0, 1)")
        out = ser.lp_to_json(build_discounted_lp(bundle.shifted, alpha))
    out["meta"] = {"target": args.target, "shift": ser.q(bundle.shift)}
    return out, EXIT_OK


def cmd_mdp_average(data, args):
    mdp, _ = _mdp(data)
    bundle = build_bundle(mdp)
    res = solve(bundle.average)
    out = {"status": str(res.status), "shift": ser.q(bundle.shift)}
    if not res.optimal:
        return out, EXIT_DOMAIN
    N = mdp.n_states
    offset = bundle.shift * sum(mdp.gamma)
    out["value"] = ser.q(-res.value - offset)
    out["gain"] = ser.qvec([v - bundle.shift for v in res.x[:N]])
    return out, EXIT_OK


def cmd_mdp_reduce(data, args):
    _check_sweep_args(args)
    mdp, _ = _mdp(data)
    rep = verify_reduction(mdp, args.eps0, args.ratio, args.steps)
    return ser.reduction_to_json(rep), EXIT_OK if rep.ok else EXIT_DOMAIN


def cmd_mdp_eval(data, args):
    mdp, file_alpha = _mdp(data)
    try:
        choice = [int(tok) - 1 for tok in args.policy.split(",")]
    except ValueError:
        raise UsageError(f"bad --policy {args.policy!r}")
    if len(choice) != mdp.n_states or any(
        not 0 <= a < m for a, m in zip(choice, mdp.actions)
    ):
        raise UsageError("--policy needs one valid 1-based action per state")
    alpha = args.alpha if args.alpha is not None else file_alpha
    if alpha is not None and not 0 < alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    ev = evaluate_policy(mdp, StationaryPolicy.deterministic(mdp, choice))
    return ser.evaluation_to_json(ev, alpha), EXIT_OK


def cmd_validate(data, args):
    diags = ser.validate(data, args.kind)
    return {"ok": not diags, "diagnostics": diags}, EXIT_OK if not diags else EXIT_USAGE


COMMANDS = {
    "solve": cmd_solve,
    "j0": cmd_j0,
    "es1": cmd_es1,
    "limit": cmd_limit,
    "equiv": cmd_equiv,
    "assumptions": cmd_assumptions,
    "bases": cmd_bases,
    "sweep": cmd_sweep,
    "mdp-build": cmd_mdp_build,
    "mdp-average": cmd_mdp_average,
    "mdp-reduce": cmd_mdp_reduce,
    "mdp-eval": cmd_mdp_eval,
    "validate": cmd_validate,
}


def _cell(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, list):
        sep = "; " if v and isinstance(v[0], list) else " "
        return sep.join(_cell(x) for x in v)
    if isinstance(v, dict):
        return ", ".join(f"{k}={_cell(x)}" for k, x in v.items())
    return str(v)


def _table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_cell(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[k]) for row in cells)) for k, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _key_values(obj: dict, prefix: str = "") -> list[str]:
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict) and v and k not in ("witness",):
            lines += _key_values(v, f"{prefix}{k}.")
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{prefix}{k}:")
            lines += ["  " + ln for ln in _table(v).splitlines()]
        else:
            lines.append(f"{prefix}{k}: {_cell(v)}")
    return lines


def render(result, fmt: str) -> str:
    if isinstance(result, SweepReport):
        if fmt == "csv":
            return ser.sweep_to_csv(result)
        result = ser.sweep_to_json(result)
    elif fmt == "csv":
        # only tabular results reach here; argparse restricts csv to them
        rows = result["bases"]
        return "basis,class\n" + "".join(
            f"{' '.join(map(str, r['basis']))},{r['class']}\n" for r in rows
        )
    if fmt == "table":
        return "\n".join(_key_values(result)) + "\n"
    return ser.dumps(result)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        data = _load(args.input)
        if args.verb != "validate":
            diags = ser.validate(data)
            if diags:
                raise ser.SchemaError(diags)
        result, code = COMMANDS[args.verb](data, args)
    except ser.SchemaError as exc:
        for d in exc.diagnostics:
            print(f"error: {args.input}: {d}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render(result, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
