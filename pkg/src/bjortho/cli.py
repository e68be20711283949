"""Command-line frontend: ``python -m bjortho <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import oracle
from .norms import NormSpec, Vec, format_p, parse_p
from .op_space import (
    Op,
    attainment_set,
    load_matrix,
    op_line,
    op_norm_info,
    restricted_norm_complement,
    OP_PREDICATES,
)
from .theorems import VERIFIERS, TheoremVerdict, verify_hilbert_char
from .vec_ortho import Outcome, Verdict, _line_norm, evaluate

EXIT = {Outcome.HOLDS: 0, Outcome.FAILS: 1, Outcome.MARGINAL: 3}
EXIT_BAD_INPUT = 2

PRED_NAMES = {
    "bj": "bj",
    "plus": "plus",
    "minus": "minus",
    "plus-eps": "plus_eps",
    "minus-eps": "minus_eps",
    "eps-d": "dragomir",
    "eps-b": "chmielinski",
    "ip-eps": "ip",
}
OP_PRED_NAMES = {"bj": "bj", "eps-d": "dragomir", "eps-b": "chmielinski"}
EPS_LOW, EPS_HIGH = 0.05, 0.95


class InputError(ValueError):
    """Malformed command-line input."""


@dataclass
class RunReport:
    command: list[str]
    seed: int | None
    instances: int
    tallies: dict[str, dict[str, int]] = field(default_factory=dict)
    disagreements: list[dict[str, Any]] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)
    wall_time: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d = {
            "command": self.command,
            "seed": self.seed,
            "instances": self.instances,
            "tallies": self.tallies,
            "disagreements": self.disagreements,
            "details": self.details,
        }
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


# --- parsing helpers ---------------------------------------------------------


def parse_space(text: str) -> NormSpec:
    """``p:dim`` such as ``2:3`` or ``inf:4``."""
    try:
        p, dim = text.split(":")
        return NormSpec(int(dim), parse_p(p))
    except ValueError as exc:
        raise InputError(f"bad --space {text!r}: expected p:dim ({exc})") from None


def parse_csv_vec(text: str, space: NormSpec) -> Vec:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise InputError(f"bad vector {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise InputError(f"vector {text!r} has non-finite entries")
    if len(vals) != space.dim:
        raise InputError(f"vector {text!r} has {len(vals)} entries, space has dimension {space.dim}")
    return Vec(vals, space)


def parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(t) for t in text.split(":"))
    except ValueError:
        raise InputError(f"bad --range {text!r}: expected lo:hi") from None
    if not lo <= hi:
        raise InputError("empty --range")
    return lo, hi


def parse_eps_mode(text: str) -> float | None:
    """``random`` gives None, ``fixed:v`` gives v."""
    if text == "random":
        return None
    if text.startswith("fixed:"):
        try:
            v = float(text[6:])
        except ValueError:
            raise InputError(f"bad --eps-mode {text!r}") from None
        if not 0 <= v < 1:
            raise InputError("epsilon must lie in [0, 1)")
        return v
    raise InputError(f"bad --eps-mode {text!r}: expected fixed:v or random")


def _eps(v: float) -> float:
    if not 0 <= v < 1:
        raise InputError("epsilon must lie in [0, 1)")
    return v


def _fmt(x: float | None) -> str:
    return "none" if x is None else f"{x:.12g}"


def _verdict_dict(v: Verdict) -> dict[str, Any]:
    return {
        "outcome": v.outcome.value,
        "margin": v.margin if math.isfinite(v.margin) else "inf",
        "witness_lambda": v.witness_lambda,
        "approximate": v.approximate,
    }


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _print_verdict(label: str, v: Verdict) -> None:
    approx = " (approximate)" if v.approximate else ""
    print(f"{label}: {v.outcome}{approx}  margin={_fmt(v.margin)}  lambda={_fmt(v.witness_lambda)}")


# --- commands ----------------------------------------------------------------


def cmd_check(args: argparse.Namespace) -> int:
    space = parse_space(args.space)
    x, y = parse_csv_vec(args.x, space), parse_csv_vec(args.y, space)
    eps = _eps(args.eps)
    kind = PRED_NAMES[args.pred]
    if kind == "ip" and not space.is_hilbert:
        raise InputError("ip-eps needs p = 2")
    v = evaluate(kind, x, y, eps)
    _print_verdict("verdict", v)
    report = RunReport(_argv(args), None, 1, details={"predicate": args.pred, "space": str(space), "eps": eps, "verdict": _verdict_dict(v)})
    if args.oracle:
        if kind == "ip":
            raise InputError("no grid oracle for ip-eps")
        o = oracle.oracle_predicate(kind, x, y, eps, points=args.oracle_points, zoom=args.oracle_zoom)
        _print_verdict("oracle", o)
        report.details["oracle"] = _verdict_dict(o)
    if args.out:
        _emit(report.to_json(), args.out)
    return EXIT[v.outcome]


def cmd_op_check(args: argparse.Namespace) -> int:
    T, A = load_matrix(args.T), load_matrix(args.A)
    if T.domain != A.domain or T.codomain != A.codomain:
        raise InputError("T and A act between different spaces")
    eps = _eps(args.eps)
    kind = OP_PRED_NAMES[args.pred]
    v = OP_PREDICATES[kind](T, A, eps)
    nT, eT = op_norm_info(T)
    nA, eA = op_norm_info(A)
    mt = "zero operator" if T.is_zero() else attainment_set(T).summary()
    _print_verdict("verdict", v)
    print(f"||T|| = {_fmt(nT)}{'' if eT else ' (lower bound)'}")
    print(f"||A|| = {_fmt(nA)}{'' if eA else ' (lower bound)'}")
    print(f"M_T: {mt}")
    details = {"predicate": args.pred, "eps": eps, "norm_T": nT, "norm_A": nA, "attainment": mt, "verdict": _verdict_dict(v)}
    if args.oracle:
        o = oracle.oracle_op_predicate(kind, T, A, eps, lambda_points=args.oracle_lambda_points, samples=args.oracle_samples)
        _print_verdict("oracle", o)
        details["oracle"] = _verdict_dict(o)
    if args.out:
        _emit(RunReport(_argv(args), None, 1, details=details).to_json(), args.out)
    return EXIT[v.outcome]


def random_instance(theorem: str, p: float, dim: int, seed: int, eps_fixed: float | None) -> tuple[Op, Op, float]:
    """Trial generator: standard normal entries, seeded per trial."""
    rng = np.random.default_rng(seed)
    T = Op.on(rng.standard_normal((dim, dim)), p)
    A = Op.on(rng.standard_normal((dim, dim)), p)
    eps = rng.uniform(EPS_LOW, EPS_HIGH) if eps_fixed is None else eps_fixed
    if theorem == "bj":
        eps = 0.0
    return T, A, float(eps)


def _run_trial(job: tuple[str, float, int, int, float | None]) -> tuple[int, dict[str, Any], TheoremVerdict]:
    theorem, p, dim, seed, eps_fixed = job
    T, A, eps = random_instance(theorem, p, dim, seed, eps_fixed)
    tv = VERIFIERS[theorem](T, A, eps, seed=seed)
    inst = {"seed": seed, "T": T.entries.tolist(), "A": A.entries.tolist(), "eps": eps}
    return seed, inst, tv


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("BJORTHO_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, jobs: list) -> list:
    n = _workers()
    if n <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as ex:
        # map keeps submission order, so the report does not depend on timing
        return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * n))))


def tally(name: str, results: Sequence[tuple[int, dict[str, Any], TheoremVerdict]]) -> tuple[dict[str, int], list[dict[str, Any]], dict[str, int]]:
    counts = {"agree": 0, "disagree": 0, "skipped": 0}
    reasons: dict[str, int] = {}
    bad = []
    for _, inst, tv in results:
        if tv.skipped:
            counts["skipped"] += 1
            reasons[tv.skip_reason] = reasons.get(tv.skip_reason, 0) + 1
        elif tv.agree:
            counts["agree"] += 1
        else:
            counts["disagree"] += 1
            bad.append({**inst, **tv.to_dict()})
    return counts, bad, dict(sorted(reasons.items()))


def cmd_verify(args: argparse.Namespace) -> int:
    p = _parse_p_arg(args.space)
    if args.theorem == "hilbert" and p != 2.0:
        raise InputError("the hilbert theorem needs --space 2")
    if args.trials < 0 or args.dim < 1:
        raise InputError("--trials must be >= 0 and --dim >= 1")
    eps_fixed = parse_eps_mode(args.eps_mode)
    t0 = time.perf_counter()
    jobs = [(args.theorem, p, args.dim, args.seed + i, eps_fixed) for i in range(args.trials)]
    results = _map(_run_trial, jobs)
    counts, bad, reasons = tally(args.theorem, results)
    report = RunReport(
        _argv(args),
        args.seed,
        args.trials,
        {args.theorem: counts},
        bad,
        {
            "theorem": args.theorem,
            "space": format_p(p),
            "dim": args.dim,
            "eps_mode": args.eps_mode,
            "skip_reasons": reasons,
            "skipped_fraction": counts["skipped"] / args.trials if args.trials else 0.0,
        },
    )
    if args.timing:
        report.wall_time = time.perf_counter() - t0
    _emit(report.to_json(), args.out)
    if args.out and args.out != "-":
        print(f"{args.theorem}: agree={counts['agree']} disagree={counts['disagree']} skipped={counts['skipped']}")
    return 1 if counts["disagree"] else 0


def cmd_curve(args: argparse.Namespace) -> int:
    lo, hi = parse_range(args.range)
    if args.points < 2:
        raise InputError("--points must be at least 2")
    if args.T or args.A:
        if not (args.T and args.A):
            raise InputError("give both --T and --A")
        T, A = load_matrix(args.T), load_matrix(args.A)
        if T.domain != A.domain or T.codomain != A.codomain:
            raise InputError("T and A act between different spaces")
        f = op_line(T, A)
    else:
        if not (args.x and args.y and args.space):
            raise InputError("give --space, --x and --y, or --T and --A")
        space = parse_space(args.space)
        f = _line_norm(parse_csv_vec(args.x, space), parse_csv_vec(args.y, space))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda", "norm"])
    for t in np.linspace(lo, hi, args.points):
        w.writerow([repr(float(t)), repr(float(f(float(t))))])
    _emit(buf.getvalue(), args.out)
    return 0


def remark_operator(dim: int) -> Op:
    """diag(1, 1/2 - 1/(n+2) for n = 2..dim) on l_2."""
    if dim < 2:
        raise InputError("--dim must be at least 2")
    d = [1.0] + [0.5 - 1.0 / (n + 2) for n in range(2, dim + 1)]
    return Op.on(np.diag(d), 2.0)


def cmd_fixture_remark(args: argparse.Namespace) -> int:
    T = remark_operator(args.dim)
    eps_fixed = parse_eps_mode(args.eps_mode)
    M = attainment_set(T)
    nT, _ = op_norm_info(T)
    rest = restricted_norm_complement(T, M.basis)
    expected = 0.5 - 1.0 / (args.dim + 2)
    results = []
    for i in range(args.trials):
        s = args.seed + i
        rng = np.random.default_rng(s)
        A = Op.on(rng.standard_normal((args.dim, args.dim)), 2.0)
        eps = float(rng.uniform(EPS_LOW, EPS_HIGH)) if eps_fixed is None else eps_fixed
        tv = verify_hilbert_char(T, A, eps)
        results.append((s, {"seed": s, "A": A.entries.tolist(), "eps": eps}, tv))
    counts, bad, reasons = tally("hilbert", results)
    pts = M.finite_points()
    report = RunReport(
        _argv(args),
        args.seed,
        args.trials,
        {"hilbert": counts},
        bad,
        {
            "dim": args.dim,
            "norm": nT,
            "attainment": M.summary(),
            "attainment_points": pts.tolist(),
            "restricted_norm": rest,
            "restricted_norm_expected": expected,
            "norm_gap": nT - rest,
            "structural_condition": rest < nT,
            "skip_reasons": reasons,
        },
    )
    _emit(report.to_json(), args.out)
    if args.out and args.out != "-":
        print(f"||T|| = {_fmt(nT)}  restricted = {_fmt(rest)}  M_T: {M.summary()}")
    return 1 if counts["disagree"] else 0


def _parse_p_arg(text: str) -> float:
    try:
        return parse_p(text)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _argv(args: argparse.Namespace) -> list[str]:
    return list(getattr(args, "argv", []))


# --- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bjortho", description="Birkhoff-James orthogonality checks for vectors and matrices.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="decide a vector predicate")
    c.add_argument("--pred", required=True, choices=sorted(PRED_NAMES))
    c.add_argument("--space", required=True, help="p:dim, e.g. 2:3 or inf:4")
    c.add_argument("--x", required=True, help="comma-separated coordinates")
    c.add_argument("--y", required=True)
    c.add_argument("--eps", type=float, default=0.0)
    c.add_argument("--oracle", action="store_true", help="also run the brute-force grid oracle")
    c.add_argument("--oracle-points", type=int, default=oracle.DEFAULT_POINTS)
    c.add_argument("--oracle-zoom", type=int, default=0)
    c.add_argument("--out", help="write a JSON report here")
    c.set_defaults(func=cmd_check)

    o = sub.add_parser("op-check", help="decide an operator predicate")
    o.add_argument("--pred", required=True, choices=sorted(OP_PRED_NAMES))
    o.add_argument("--T", required=True, help="matrix file")
    o.add_argument("--A", required=True, help="matrix file")
    o.add_argument("--eps", type=float, default=0.0)
    o.add_argument("--oracle", action="store_true")
    o.add_argument("--oracle-lambda-points", type=int, default=1001)
    o.add_argument("--oracle-samples", type=int, default=10**4)
    o.add_argument("--out")
    o.set_defaults(func=cmd_op_check)

    v = sub.add_parser("verify", help="run a theorem verifier on seeded random instances")
    v.add_argument("--theorem", required=True, choices=list(VERIFIERS))
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--dim", type=int, default=3)
    v.add_argument("--space", default="2", help="p for both domain and codomain")
    v.add_argument("--eps-mode", default="random", help="fixed:v or random")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="report file (default stdout)")
    v.add_argument("--timing", action="store_true", help="record wall time in the report")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("curve", help="tabulate lambda -> ||x + lambda y|| or ||T + lambda A||")
    k.add_argument("--space")
    k.add_argument("--x")
    k.add_argument("--y")
    k.add_argument("--T")
    k.add_argument("--A")
    k.add_argument("--range", default="-2:2", help="lo:hi")
    k.add_argument("--points", type=int, default=201)
    k.add_argument("--out", help="CSV file (default stdout)")
    k.set_defaults(func=cmd_curve)

    r = sub.add_parser("fixture-remark", help="truncated diagonal operator with a strict norm gap")
    r.add_argument("--dim", type=int, default=50)
    r.add_argument("--trials", type=int, default=100)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--eps-mode", default="random")
    r.add_argument("--out")
    r.set_defaults(func=cmd_fixture_remark)
    return ap


# flags whose values may start with a minus sign, e.g. --range -2:2 or --x -1,0
_SIGNED = ("--range", "--x", "--y", "--eps")


def _attach_signed(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _SIGNED and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] in set("0123456789.i"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_attach_signed(argv))
    args.argv = argv
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # InputError, MatrixFormatError, SpaceMismatch and friends
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
