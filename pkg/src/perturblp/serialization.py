"""JSON/CSV formats for problems and reports.

Rationals are written as ``"p/q"`` (``"p"`` when ``q = 1``).  Indices in
files (free variables, J0, bases, MDP ``"i,a"`` keys, policies) are
1-based; the Python API is 0-based.
"""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from typing import Any

from .linalg import format_rational, parse_rational
from .mdp import Mdp, PolicyEvaluation, ReductionReport, uniform_gamma
from .perturbed import (
    AssumptionReport,
    EquivalenceReport,
    Es1Report,
    J0Set,
    LimitingLp,
    PerturbedLp,
    SweepReport,
)
from .simplex import LpStandardForm, SolveResult

KINDS = ("lp", "perturbed", "mdp")


class SchemaError(ValueError):
    """Input file content does not match its schema."""

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


def q(x: Fraction | None) -> str | None:
    return None if x is None else format_rational(x)


def qvec(v) -> list[str] | None:
    return None if v is None else [format_rational(x) for x in v]


def qmat(A) -> list[list[str]]:
    return [qvec(row) for row in A]


# --- validation -----------------------------------------------------------

class _Checker:
    def __init__(self, data: Any):
        self.data = data
        self.diagnostics: list[str] = []

    def fail(self, path: str, msg: str) -> None:
        self.diagnostics.append(f"{path}: {msg}")

    def count(self, key: str, minimum: int = 0) -> int | None:
        v = self.data.get(key)
        if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
            self.fail(key, f"expected an integer >= {minimum}")
            return None
        return v

    def rational(self, path: str, v) -> Fraction | None:
        try:
            return parse_rational(v)
        except (ValueError, ZeroDivisionError):
            self.fail(path, f"not an exact rational: {v!r}")
            return None

    def vector(self, path: str, v, length: int | None) -> list | None:
        if not isinstance(v, list):
            self.fail(path, "expected a list")
            return None
        if length is not None and len(v) != length:
            self.fail(path, f"has length {len(v)}, expected {length}")
            return None
        out = [self.rational(f"{path}[{k}]", x) for k, x in enumerate(v)]
        return None if any(x is None for x in out) else out

    def matrix(self, key: str, rows: int | None, cols: int | None) -> list | None:
        v = self.data.get(key)
        if not isinstance(v, list):
            self.fail(key, "expected a list of rows")
            return None
        if rows is not None and len(v) != rows:
            self.fail(key, f"has {len(v)} rows, expected {rows}")
            return None
        out = []
        for i, row in enumerate(v):
            if not isinstance(row, list):
                self.fail(f"{key}[{i}]", "expected a list")
                return None
            if cols is not None and len(row) != cols:
                self.fail(f"{key}[{i}]", f"row {i} has length {len(row)}, expected {cols}")
                return None
            out.append(self.vector(f"{key}[{i}]", row, None))
        return None if any(r is None for r in out) else out


def _require_object(data) -> list[str]:
    return [] if isinstance(data, dict) else ["<root>: expected a JSON object"]


def check_lp(data) -> list[str]:
    if errs := _require_object(data):
        return errs
    ch = _Checker(data)
    m, n = ch.count("m"), ch.count("n")
    ch.matrix("A", m, n)
    ch.vector("b", data.get("b"), m)
    ch.vector("c", data.get("c"), n)
    free = data.get("free_vars", [])
    if not isinstance(free, list) or any(
        isinstance(j, bool) or not isinstance(j, int) or n is not None and not 1 <= j <= n
        for j in free
    ):
        ch.fail("free_vars", f"expected a list of indices in 1..{n}")
    return ch.diagnostics


def check_perturbed(data) -> list[str]:
    if errs := _require_object(data):
        return errs
    ch = _Checker(data)
    m, n = ch.count("m"), ch.count("n")
    for key in ("A0", "A1"):
        ch.matrix(key, m, n)
    for key, length in (("b0", m), ("b1", m), ("c0", n), ("c1", n)):
        ch.vector(key, data.get(key), length)
    return ch.diagnostics


def _pair_key(i: int, a: int) -> str:
    return f"{i + 1},{a + 1}"


def check_mdp(data) -> list[str]:
    if errs := _require_object(data):
        return errs
    ch = _Checker(data)
    N = ch.count("N", 1)
    actions = data.get("actions")
    if not isinstance(actions, list) or (N is not None and len(actions) != N) or any(
        isinstance(m, bool) or not isinstance(m, int) or m < 1 for m in actions
    ):
        ch.fail("actions", f"expected {N} positive action counts")
        return ch.diagnostics
    if N is None:
        return ch.diagnostics
    rewards = data.get("rewards")
    transitions = data.get("transitions")
    if not isinstance(rewards, dict):
        ch.fail("rewards", 'expected an object keyed by "i,a"')
    if not isinstance(transitions, dict):
        ch.fail("transitions", 'expected an object keyed by "i,a"')
    if ch.diagnostics:
        return ch.diagnostics
    expected = {_pair_key(i, a) for i, m in enumerate(actions) for a in range(m)}
    for name, table in (("rewards", rewards), ("transitions", transitions)):
        for key in sorted(set(table) - expected):
            ch.fail(f"{name}[{key!r}]", "no such state-action pair")
        for key in sorted(expected - set(table)):
            ch.fail(f"{name}[{key!r}]", "missing")
    for key in sorted(expected & set(rewards)):
        ch.rational(f"rewards[{key!r}]", rewards[key])
    for key in sorted(expected & set(transitions)):
        row = ch.vector(f"transitions[{key!r}]", transitions[key], N)
        if row is None:
            continue
        if any(p < 0 for p in row):
            ch.fail(f"transitions[{key!r}]", "negative probability")
        total = sum(row, Fraction(0))
        if total != 1:
            ch.fail(f"transitions[{key!r}]", f"probabilities sum to {total}, not 1")
    if "gamma" in data:
        gamma = ch.vector("gamma", data["gamma"], N)
        if gamma is not None and any(g <= 0 for g in gamma):
            ch.fail("gamma", "weights must be positive")
    if "alpha" in data:
        alpha = ch.rational("alpha", data["alpha"])
        if alpha is not None and not 0 < alpha < 1:
            ch.fail("alpha", "must lie in (0, 1)")
    return ch.diagnostics


_CHECKS = {"lp": check_lp, "perturbed": check_perturbed, "mdp": check_mdp}


def detect_kind(data) -> str | None:
    if not isinstance(data, dict):
        return None
    if "transitions" in data or "N" in data:
        return "mdp"
    if "A0" in data:
        return "perturbed"
    if "A" in data:
        return "lp"
    return None


def validate(data, kind: str | None = None) -> list[str]:
    """Full-schema diagnostics for parsed JSON; an empty list means valid."""
    kind = kind or detect_kind(data)
    if kind is None:
        return ["<root>: cannot tell whether this is an lp, perturbed or mdp file"]
    return _CHECKS[kind](data)


# --- problems -------------------------------------------------------------

def lp_to_json(lp: LpStandardForm) -> dict:
    return {
        "m": lp.m,
        "n": lp.n,
        "A": qmat(lp.A),
        "b": qvec(lp.b),
        "c": qvec(lp.c),
        "free_vars": [j + 1 for j in sorted(lp.free_vars)],
    }


def lp_from_json(data) -> LpStandardForm:
    if diags := check_lp(data):
        raise SchemaError(diags)
    conv = [[parse_rational(x) for x in row] for row in data["A"]]
    return LpStandardForm(
        conv,
        [parse_rational(x) for x in data["b"]],
        [parse_rational(x) for x in data["c"]],
        frozenset(j - 1 for j in data.get("free_vars", [])),
    )


def perturbed_to_json(p: PerturbedLp) -> dict:
    return {
        "m": p.m,
        "n": p.n,
        "A0": qmat(p.A0),
        "A1": qmat(p.A1),
        "b0": qvec(p.b0),
        "b1": qvec(p.b1),
        "c0": qvec(p.c0),
        "c1": qvec(p.c1),
    }


def perturbed_from_json(data) -> PerturbedLp:
    if diags := check_perturbed(data):
        raise SchemaError(diags)
    mat = lambda k: [[parse_rational(x) for x in row] for row in data[k]]  # noqa: E731
    vec = lambda k: [parse_rational(x) for x in data[k]]  # noqa: E731
    return PerturbedLp(mat("A0"), mat("A1"), vec("b0"), vec("b1"), vec("c0"), vec("c1"))


def mdp_to_json(mdp: Mdp, alpha: Fraction | None = None) -> dict:
    out = {
        "N": mdp.n_states,
        "actions": mdp.actions,
        "rewards": {_pair_key(i, a): q(mdp.rewards[i][a]) for i, a in mdp.pairs()},
        "transitions": {_pair_key(i, a): qvec(mdp.transitions[i][a]) for i, a in mdp.pairs()},
        "gamma": qvec(mdp.gamma),
    }
    if alpha is not None:
        out["alpha"] = q(alpha)
    return out


def mdp_from_json(data) -> tuple[Mdp, Fraction | None]:
    """The MDP and the optional discount factor stored alongside it."""
    if diags := check_mdp(data):
        raise SchemaError(diags)
    N = data["N"]
    rewards, transitions = [], []
    for i, m in enumerate(data["actions"]):
        rewards.append([parse_rational(data["rewards"][_pair_key(i, a)]) for a in range(m)])
        transitions.append([
            [parse_rational(x) for x in data["transitions"][_pair_key(i, a)]] for a in range(m)
        ])
    gamma = [parse_rational(x) for x in data["gamma"]] if "gamma" in data else uniform_gamma(N)
    alpha = parse_rational(data["alpha"]) if "alpha" in data else None
    return Mdp(rewards, transitions, gamma), alpha


# --- results --------------------------------------------------------------

def solve_result_to_json(res: SolveResult) -> dict:
    out: dict[str, Any] = {"status": str(res.status), "value": q(res.value), "x": qvec(res.x)}
    if res.optimal:
        out["basis"] = [j + 1 for j in res.basis]
        out["dual"] = qvec(res.dual)
    return out


def j0_to_json(j0: J0Set) -> dict:
    return {"indices": [j + 1 for j in j0.indices], "witness": qvec(j0.witness)}


def es1_to_json(rep: Es1Report) -> dict:
    witness = None
    if rep.witness is not None:
        witness = {"x0": qvec(rep.witness[0]), "x1": qvec(rep.witness[1])}
    return {"holds": rep.holds, "margin": q(rep.margin), "witness": witness}


def limiting_to_json(lim: LimitingLp, res: SolveResult | None = None) -> dict:
    out: dict[str, Any] = {
        "variant": lim.variant.value,
        "j0": None if lim.j0 is None else [j + 1 for j in lim.j0.indices],
        "lp": lp_to_json(lim.lp),
    }
    if res is not None:
        out["status"] = str(res.status)
        out["value"] = q(res.value)
        if res.optimal:
            x0, x1 = lim.split(res.x)
            out["x0"], out["x1"] = qvec(x0), qvec(x1)
    return out


def equivalence_to_json(rep: EquivalenceReport) -> dict:
    return {
        "equivalent_certified": rep.certified,
        "reason": None if rep.reason is None else rep.reason.value,
        "theta1": {"status": str(rep.theta1.status), "value": q(rep.theta1.value)},
        "simplified": {"status": str(rep.simplified.status), "value": q(rep.simplified.value)},
    }


def assumptions_to_json(rep: AssumptionReport) -> dict:
    return {
        "h1": rep.h1,
        "h2": rep.h2,
        "h0star_probe": rep.h0star_probe,
        "probe_points": qvec(rep.probe_points),
        "note": "h0star_probe samples finitely many eps; it is not a proof of boundedness",
    }


def sweep_to_json(rep: SweepReport) -> dict:
    return {
        "limit_status": str(rep.limit_status),
        "limit_value": q(rep.limit_value),
        "points": [
            {
                "eps": q(pt.eps),
                "status": str(pt.status),
                "value": q(pt.value),
                "gap": q(pt.gap),
                "distance": q(pt.distance),
                "theta1_distance": q(pt.theta1_distance),
            }
            for pt in rep.points
        ],
    }


SWEEP_CSV_COLUMNS = ("eps", "status", "value", "gap", "distance")


def sweep_to_csv(rep: SweepReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_CSV_COLUMNS)
    for pt in rep.points:
        w.writerow([q(pt.eps), str(pt.status), q(pt.value) or "", q(pt.gap) or "",
                    q(pt.distance) or ""])
    return buf.getvalue()


def reduction_to_json(rep: ReductionReport) -> dict:
    return {
        "ok": rep.ok,
        "failures": rep.failures,
        "shift": q(rep.shift),
        "assumptions": assumptions_to_json(rep.assumptions),
        "es1": es1_to_json(rep.es1),
        "sweep": sweep_to_json(rep.sweep),
        "values": {
            "limiting": q(rep.limiting_value),
            "average": q(rep.average_value),
            "brute_force": q(rep.brute_force_value),
        },
    }


def evaluation_to_json(ev: PolicyEvaluation, alpha: Fraction | None = None) -> dict:
    out: dict[str, Any] = {
        "P": qmat(ev.P),
        "r": qvec(ev.r),
        "Pstar": qmat(ev.Pstar),
        "g": qvec(ev.g),
        "h": qvec(ev.h),
    }
    if alpha is not None:
        v = ev.v_alpha(alpha)
        out["alpha"] = q(alpha)
        out["v_alpha"] = qvec(v)
        out["blackwell_gap"] = qvec(
            [vi - gi - (1 - alpha) * hi for vi, gi, hi in zip(v, ev.g, ev.h)]
        )
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"
