"""``geoscale`` command line: solve, verify, omega, sweep.

Exit codes: 0 success, 1 domain error (bad instance, refused alpha, failed
invariant, theorem mismatch), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis
from .model import (InstanceError, format_rational, objective_geometric,
                    objective_linear, parse_instance, parse_rational,
                    simplex_instance)
from .oracles import Policy
from .scaling import (ConfigError, EngineConfig, StepLimitExceeded, Variant,
                      check_invariants, default_mu0, run, trace_to_dict)

POLICIES = ("max-ratio", "max-gain", "min-gain", "lex", "random")


class DomainError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid rational {text!r} (expected p/q or an integer)") from None


def _rational_list(text: str) -> list[Fraction]:
    return [_rational(part) for part in text.split(",") if part.strip()]


def _int_range(text: str) -> list[int]:
    """``"3..8"``, ``"3,5,8"`` or a mix such as ``"3..5,8"``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid n range {text!r} (use 3..8 or 3,5,8)") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty n range {text!r}")
    return out


def _default_seed() -> int:
    raw = os.environ.get("GEOSCALE_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise DomainError(f"GEOSCALE_SEED={raw!r} is not an integer") from None


def _policy(args) -> Policy:
    seed = args.seed if args.seed is not None else _default_seed()
    return Policy.parse(args.policy, seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoscale",
        description="Exact geometric scaling over 0/1 polytopes.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run the engine and print its trace")
    src = solve.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", type=Path, help="instance JSON file")
    src.add_argument("--simplex", type=int, metavar="N",
                     help="use the simplex x^0..x^N starting at the origin")
    solve.add_argument("--objective", choices=("linear", "pow2", "alpha-pow"),
                       default="linear",
                       help="objective for --simplex (alpha-pow uses ceil(alpha))")
    solve.add_argument("--variant", choices=("mra", "feasibility"), default="mra")
    solve.add_argument("--policy", choices=POLICIES, default="max-ratio")
    solve.add_argument("--seed", type=int, default=None)
    solve.add_argument("--mu0", type=_rational, default=None)
    solve.add_argument("--alpha", type=_rational, default=Fraction(2))
    solve.add_argument("--early-stop", action="store_true")
    mode = solve.add_mutually_exclusive_group()
    mode.add_argument("--certify", dest="certify", action="store_true",
                      default=True, help="finish with an optimality pass (default)")
    mode.add_argument("--literal", dest="certify", action="store_false",
                      help="stop exactly when mu < 1/n")
    solve.add_argument("--step-limit", type=int, default=None)
    solve.add_argument("--trace-out", type=Path, default=None,
                       help="write the trace here instead of stdout")

    verify = sub.add_parser("verify", help="check a step-count theorem")
    verify.add_argument("--theorem", required=True,
                        help="2.1, 3.1, 4.1 or 4.4 (or thm_2_1 ...)")
    verify.add_argument("--n", type=_int_range, required=True, dest="ns")
    verify.add_argument("--alpha", type=_rational, default=None)
    verify.add_argument("--policy", choices=POLICIES, default="max-gain")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--early-stop", action="store_true")
    verify.add_argument("--format", choices=("text", "csv", "json"), default="text")

    omega = sub.add_parser("omega", help="jump-count bounds and band tables")
    omega.add_argument("--alpha", type=_rational, default=None)
    omega.add_argument("--bands", action="store_true",
                       help="print the band table up to --alpha-max")
    omega.add_argument("--alpha-max", type=_rational, default=Fraction(2))
    omega.add_argument("--definition", choices=analysis.DEFINITIONS,
                       default=analysis.PAPER)
    omega.add_argument("--format", choices=("text", "json"), default="text")

    sw = sub.add_parser("sweep", help="geometric-objective runs over a grid")
    sw.add_argument("--alpha", type=_rational_list, required=True, dest="alphas")
    sw.add_argument("--n", type=_int_range, required=True, dest="ns")
    sw.add_argument("--policy", choices=POLICIES, default="max-gain")
    sw.add_argument("--seed", type=int, default=None)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--format", choices=("text", "csv", "json"), default="csv")
    return parser


def _instance_from_args(args):
    if args.instance is not None:
        try:
            text = args.instance.read_text()
        except OSError as exc:
            raise DomainError(f"--instance {args.instance}: {exc.strerror}") from None
        try:
            return parse_instance(text)
        except InstanceError as exc:
            raise DomainError(f"--instance {args.instance}: {exc}") from None
    n = args.simplex
    if n < 1:
        raise DomainError(f"--simplex {n}: dimension must be at least 1")
    if args.objective == "linear":
        c = objective_linear(n)
    elif args.objective == "pow2":
        c = objective_geometric(n, 2)
    else:
        c = objective_geometric(n, max(2, math.ceil(args.alpha)))
    return simplex_instance(n, c)


def cmd_solve(args, out) -> int:
    inst = _instance_from_args(args)
    if args.alpha <= 1:
        raise DomainError(f"--alpha {args.alpha}: must be greater than 1")
    mu0 = args.mu0 if args.mu0 is not None else default_mu0(inst)
    if mu0 <= inst.c_inf:
        raise DomainError(f"--mu0 {mu0}: must exceed ||c||_inf = {inst.c_inf}")
    cfg = EngineConfig(mu0=mu0, variant=Variant(args.variant),
                       policy=_policy(args), alpha=args.alpha,
                       early_stop=args.early_stop, certify=args.certify,
                       step_limit=args.step_limit)
    try:
        trace = run(inst, cfg)
    except ConfigError as exc:
        raise DomainError(str(exc)) from None
    except StepLimitExceeded as exc:
        raise DomainError(f"--step-limit {args.step_limit}: {exc}") from None
    problems = check_invariants(inst, trace)
    if problems:
        raise DomainError("trace failed invariant checks:\n  " + "\n  ".join(problems))
    text = json.dumps(trace_to_dict(trace), indent=2) + "\n"
    if args.trace_out is not None:
        args.trace_out.write_text(text)
        s = trace.summary
        out.write(f"augment={s.augment_count} halve={s.halve_count} "
                  f"certified={str(s.certified).lower()} "
                  f"final_value={s.final_value}\n")
    else:
        out.write(text)
    return 0


def _emit_reports(reports, fmt, out, header: str):
    if fmt == "csv":
        out.write(analysis.reports_to_csv(reports))
    elif fmt == "json":
        out.write(json.dumps({"header": header,
                              "reports": [r.to_dict() for r in reports]},
                             indent=2) + "\n")
    else:
        out.write(f"# {header}\n")
        out.write(analysis.reports_to_table(reports))


def cmd_verify(args, out) -> int:
    try:
        theorem = analysis.theorem_id(args.theorem)
    except ValueError as exc:
        raise DomainError(f"--theorem: {exc}") from None
    policy = _policy(args)
    reports = []
    for n in args.ns:
        try:
            reports.append(analysis.verify_theorem(
                theorem, n, alpha=args.alpha, policy=policy,
                early_stop=args.early_stop))
        except analysis.AlphaRefused as exc:
            raise DomainError(f"--alpha {args.alpha}: {exc}") from None
        except ValueError as exc:
            raise DomainError(f"--n {n}: {exc}") from None
    header = f"verify {theorem} seed={policy.seed}"
    _emit_reports(reports, args.format, out, header)
    return 0 if all(r.match for r in reports) else 1


def cmd_omega(args, out) -> int:
    if args.bands:
        if args.alpha_max <= 1:
            raise DomainError(f"--alpha-max {args.alpha_max}: must exceed 1")
        bands = analysis.omega_bands(args.definition, args.alpha_max)
        if args.format == "json":
            out.write(json.dumps({"definition": args.definition,
                                  "bands": analysis.bands_to_dict(bands)},
                                 indent=2) + "\n")
        else:
            for b in bands:
                out.write(f"{b}\n")
        return 0
    if args.alpha is None:
        raise DomainError("omega: give --alpha or --bands")
    if args.alpha <= 1:
        raise DomainError(f"--alpha {args.alpha}: must be greater than 1")
    rep = analysis.omega_report(args.alpha)
    if args.format == "json":
        out.write(json.dumps(rep.to_dict(), indent=2) + "\n")
    else:
        out.write(f"{rep}\n")
    return 0


def cmd_sweep(args, out) -> int:
    for a in args.alphas:
        if a <= 1:
            raise DomainError(f"--alpha {format_rational(a)}: must exceed 1")
    if any(n < 1 for n in args.ns):
        raise DomainError(f"--n: dimensions must be positive, got {args.ns}")
    policy = _policy(args)
    reports = analysis.sweep(args.alphas, args.ns, policy, jobs=max(1, args.jobs))
    _emit_reports(reports, args.format, out, f"sweep seed={policy.seed}")
    return 0


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "omega": cmd_omega,
            "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, sys.stdout)
    except DomainError as exc:
        print(f"geoscale {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
