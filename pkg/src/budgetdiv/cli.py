"""Command-line surface: solve, ir, axioms, construct, experiment.

Exit codes: 0 success, 1 usage error, 2 input error (unreadable or malformed
profile, bad family/rule syntax), 3 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .axioms import check_afs, check_efficiency, check_gfs, check_positive_share
from .concave import SolverError
from .constructions import FAMILY_SYNTAX, construct
from .core import (
    Distribution,
    Profile,
    ProfileFormatError,
    read_profile_file,
    utility_vector,
    write_profile,
    write_profile_file,
)
from .experiment import ExperimentConfig, run_experiment
from .manipulation import profile_incentive_ratio
from .rules import parse_rule_spec, solve

USAGE_EXIT = 1
INPUT_EXIT = 2
SOLVER_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _fmt_scalar(value):
    if isinstance(value, Fraction):
        return str(value)
    return f"{float(value):.12f}"


def _print_distribution(profile, dist):
    parts = []
    for x, share in enumerate(dist.shares):
        if share > 0:
            parts.append(f"{profile.names[x]}={_fmt_scalar(share)}")
    print(" ".join(parts))
    utilities = utility_vector(profile, dist)
    print("utilities: " + " ".join(_fmt_scalar(u) for u in utilities))


def _ballot_str(profile, ballot):
    return "{" + ",".join(profile.names[x] for x in sorted(ballot)) + "}"


def cmd_solve(args):
    rule = parse_rule_spec(args.rule)
    profile = read_profile_file(args.profile)
    exact = True if args.exact else (False if args.float else None)
    dist = solve(rule, profile, exact=exact)
    _print_distribution(profile, dist)
    return 0


def cmd_ir(args):
    rule = parse_rule_spec(args.rule)
    profile = read_profile_file(args.profile)
    exact = False if args.float else None
    report = profile_incentive_ratio(rule, profile, exact=exact)
    for resp in report.responses:
        print(f"voter {resp.voter + 1}: best deviation {_ballot_str(profile, resp.ballot)}"
              f" utility {_fmt_scalar(resp.truthful_utility)} -> {_fmt_scalar(resp.best_utility)}"
              f" ratio {_fmt_scalar(resp.ratio)}")
    best = report.best_voter
    if best is not None:
        print(f"manipulator: voter {best + 1}")
    print(f"IR = {_fmt_scalar(report.profile_ratio)}")
    print(f"manipulable: {'yes' if report.manipulable else 'no'}")
    return 0


def cmd_axioms(args):
    rule = parse_rule_spec(args.rule)
    profile = read_profile_file(args.profile)
    exact = False if args.float else None
    dist = solve(rule, profile, exact=exact)
    _print_distribution(profile, dist)
    checks = (
        ("PS", check_positive_share),
        ("GFS", check_gfs),
        ("AFS", check_afs),
        ("efficiency", check_efficiency),
    )
    for name, fn in checks:
        verdict = fn(profile, dist)
        if verdict.satisfied:
            print(f"{name}: satisfied")
        else:
            print(f"{name}: VIOLATED (margin {verdict.margin}) witness: "
                  f"{_describe_witness(profile, verdict.witness)}")
    return 0


def _describe_witness(profile, witness):
    if isinstance(witness, int):
        return f"voter {witness + 1}"
    if isinstance(witness, Distribution):
        pairs = (f"{profile.names[x]}={s}" for x, s in enumerate(witness.shares) if s > 0)
        return "dominating distribution " + " ".join(pairs)
    if isinstance(witness, tuple) and len(witness) == 2:
        left, voters = witness
        if isinstance(left, frozenset):
            cands = ",".join(sorted(profile.names[x] for x in left))
            vs = ",".join(str(v + 1) for v in voters)
            return f"candidates {{{cands}}} voters {{{vs}}}"
        vs = ",".join(str(v + 1) for v in voters)
        return f"candidate {profile.names[left]} voters {{{vs}}}"
    return repr(witness)


def cmd_construct(args):
    built = construct(args.family)
    stem = str(built.family).replace(":", "-").replace(",", "-")
    if args.stdout:
        print("# truthful")
        sys.stdout.write(write_profile(built.profile))
        print("# manipulated")
        sys.stdout.write(write_profile(built.manipulated))
    else:
        out_dir = args.out_dir or "."
        os.makedirs(out_dir, exist_ok=True)
        truthful_path = os.path.join(out_dir, f"{stem}.truthful.profile")
        manipulated_path = os.path.join(out_dir, f"{stem}.manipulated.profile")
        write_profile_file(built.profile, truthful_path)
        write_profile_file(built.manipulated, manipulated_path)
        print(truthful_path)
        print(manipulated_path)
    deviation = _ballot_str(built.profile, built.manipulated.ballots[built.manipulator])
    print(f"manipulator: voter {built.manipulator + 1} deviates to {deviation}")
    return 0


def cmd_experiment(args):
    rules = tuple(parse_rule_spec(tok) for tok in args.rules.split(","))
    n_list = tuple(int(tok) for tok in args.n_list.split(","))
    config = ExperimentConfig(
        model=args.model,
        n_list=n_list,
        m=args.m,
        trials=args.trials,
        rules=rules,
        seed=args.seed,
        jobs=args.jobs,
        p_approve=args.p_approve,
        radius=args.radius,
        dimension=args.dimension,
        phi=args.phi,
    )
    run_experiment(config, args.out, dump_path=args.dump)
    return 0


def build_parser():
    parser = _Parser(prog="budgetdiv",
                     description="Approval-based budget division rules and manipulation analysis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve",
                       help="run a rule on a profile and print the distribution")
    p.add_argument("rule", help="nash | egal | fut | mp | scwm:ALPHA | mix:LAMBDA:BASE")
    p.add_argument("profile", help="path to a v1 profile file")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="require the exact engine")
    mode.add_argument("--float", action="store_true", help="allow the fast float engine")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ir",
                       help="exhaustive manipulation search and incentive ratio")
    p.add_argument("rule")
    p.add_argument("profile")
    p.add_argument("--float", action="store_true", help="allow the fast float engine")
    p.set_defaults(func=cmd_ir)

    p = sub.add_parser("axioms",
                       help="check PS, GFS, AFS, and efficiency of a rule's output")
    p.add_argument("rule")
    p.add_argument("profile")
    p.add_argument("--float", action="store_true", help="allow the fast float engine")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("construct",
                       help="emit a worst-case profile pair: " + FAMILY_SYNTAX)
    p.add_argument("family")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--stdout", action="store_true", help="print profiles instead of writing files")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("experiment",
                       help="sample profiles and tabulate incentive-ratio statistics")
    p.add_argument("--model", required=True, choices=("ic", "euclidean", "mallows"))
    p.add_argument("--n-list", required=True, help="comma-separated voter counts")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--rules", required=True, help="comma-separated rule specs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    p.add_argument("--jobs", type=int, default=int(os.environ.get("BUDGETDIV_JOBS", "1")))
    p.add_argument("--dump", default=None, help="sidecar path for per-profile IR values")
    p.add_argument("--p-approve", type=float, default=0.3)
    p.add_argument("--radius", type=float, default=0.4)
    p.add_argument("--dimension", type=int, default=3)
    p.add_argument("--phi", type=float, default=0.75)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else USAGE_EXIT
    try:
        return args.func(args)
    except ProfileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_EXIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_EXIT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return SOLVER_EXIT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
