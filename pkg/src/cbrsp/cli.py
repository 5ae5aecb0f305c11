"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 verification mismatch.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis as an
from . import verify as vf
from .channels import (CHARLIE_PRESETS, CharlieBasis, FiveQubitChannelSpec, InvalidChannelSpec,
                       SevenQubitChannelSpec, enumerate_five_qubit_specs, enumerate_seven_qubit_specs,
                       parse_channel)
from .protocols import (EnumerateAll, Forced, KnowledgeSplit, Sampled, TargetState, run_cjbrsp,
                        run_deterministic_cbrsp, run_probabilistic_cbrsp)

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# tokens accepted by --force, per measurement kind
_TOKENS = {"q": ("q1", "q2"), "u": ("u0", "u1"), "v": ("v0", "v1"), "c": ("a", "b")}
_FORCE_LAYOUT = {"prob": "qqc", "det": "uvuvc", "cj": "uvuvc"}


def parse_target(text: str) -> TargetState:
    try:
        theta, phi = (float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"target must be 'theta,phi' in radians, got {text!r}") from None
    try:
        return TargetState(theta, phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_force(text: str, protocol: str) -> Forced:
    layout = _FORCE_LAYOUT[protocol]
    tokens = [t.strip() for t in text.split(",")]
    if len(tokens) != len(layout):
        raise UsageError(f"--force for {protocol} needs {len(layout)} tokens "
                         f"({','.join(_TOKENS[k][0] + '|' + _TOKENS[k][1] for k in layout)}), got {text!r}")
    out = []
    for token, kind in zip(tokens, layout):
        if token not in _TOKENS[kind]:
            raise UsageError(f"expected one of {_TOKENS[kind]} at this position, got {token!r}")
        out.append(_TOKENS[kind].index(token))
    return Forced(tuple(out))


def parse_floats(text: str) -> list[float]:
    try:
        values = an.parse_grid(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not values:
        raise UsageError(f"empty value list {text!r}")
    return values


def _channel(text: str, charlie: str | None):
    try:
        spec = parse_channel(text)
        if charlie is not None:
            basis = CharlieBasis.parse(charlie)
            spec = type(spec)(*_spec_fields(spec), sign=spec.sign, charlie=basis)
    except InvalidChannelSpec as exc:
        raise UsageError(str(exc)) from None
    return spec


def _spec_fields(spec):
    if isinstance(spec, FiveQubitChannelSpec):
        return spec.psi1, spec.psi2, spec.psi3, spec.psi4
    return spec.ghz1, spec.ghz2, spec.ghz3, spec.ghz4


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# --- commands ----------------------------------------------------------------

def cmd_enumerate(args) -> int:
    charlie = CharlieBasis.parse(args.charlie)
    if args.family == "five":
        specs = enumerate_five_qubit_specs(charlie)
    else:
        specs = enumerate_seven_qubit_specs(args.family, charlie)
    _emit("\n".join([f"count={len(specs)}"] + [str(s) for s in specs]), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    spec = _channel(args.channel, args.charlie)
    t_ab, t_ba = parse_target(args.t1), parse_target(args.t2)
    if args.all and (args.force or args.seed is not None):
        raise UsageError("--all cannot be combined with --force or --seed")
    if args.force and args.seed is not None:
        raise UsageError("--force cannot be combined with --seed")
    if args.all:
        policy = EnumerateAll()
    elif args.force:
        policy = parse_force(args.force, args.protocol)
    else:
        policy = Sampled(args.seed if args.seed is not None else 0)

    if args.protocol == "cj":
        if isinstance(spec, FiveQubitChannelSpec):
            spec = SevenQubitChannelSpec.from_five(spec, ancillas=_ancillas(args.ancillas))
        elif args.ancillas is not None:
            raise UsageError("--ancillas only applies to a five-qubit channel")
        result = run_cjbrsp(spec, t_ab, t_ba, KnowledgeSplit(), policy)
    else:
        if not isinstance(spec, FiveQubitChannelSpec):
            raise UsageError(f"protocol {args.protocol} needs a five-qubit channel")
        if args.ancillas is not None:
            raise UsageError("--ancillas only applies to the cj protocol")
        runner = run_probabilistic_cbrsp if args.protocol == "prob" else run_deterministic_cbrsp
        result = runner(spec, t_ab, t_ba, policy)
    doc = [r.to_dict() for r in result] if isinstance(result, list) else result.to_dict()
    _emit(json.dumps(doc, indent=2), args.out)
    return EXIT_OK


def _ancillas(text: str | None) -> tuple[int, int]:
    if text is None:
        return (0, 0)
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--ancillas must be 'a,b' with bits 0/1, got {text!r}") from None
    if a not in (0, 1) or b not in (0, 1):
        raise UsageError(f"--ancillas must be 'a,b' with bits 0/1, got {text!r}")
    return a, b


def cmd_sweep(args) -> int:
    etas = parse_floats(args.eta)
    if any(not 0 <= e <= 1 for e in etas):
        raise UsageError("eta values must lie in [0, 1]")
    lists = [parse_floats(x) for x in (args.theta1, args.theta2, args.phi1, args.phi2)]
    models = ("ad", "pd") if args.noise == "both" else (args.noise,)
    try:
        records = an.sweep(etas, *lists, models=models)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = an.records_to_csv(records) if args.format == "csv" else an.records_to_json(records)
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = vf.run_suite(args.suite)
    lines = [r.line() for r in results]
    failed = [r for r in results if not r.passed]
    lines.append(f"suite={args.suite} checks={len(results)} failed={len(failed)}")
    _emit("\n".join(lines), args.out)
    return EXIT_MISMATCH if failed else EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cbrsp", description="Controlled bidirectional remote state preparation simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enumerate-channels", help="list admissible channel specs")
    e.add_argument("--family", choices=("five", "low", "high"), default="five")
    e.add_argument("--charlie", choices=sorted(CHARLIE_PRESETS), default="comp")
    e.add_argument("--out")
    e.set_defaults(func=cmd_enumerate)

    r = sub.add_parser("run", help="run one protocol and print its transcript")
    r.add_argument("protocol", choices=("prob", "det", "cj"))
    r.add_argument("--channel", default="cao-an", help="preset name or canonical spec string")
    r.add_argument("--charlie", help="override the controller basis (comp, pm, angles:t:p)")
    r.add_argument("--t1", required=True, help="A->B target 'theta,phi'")
    r.add_argument("--t2", required=True, help="B->A target 'theta,phi'")
    r.add_argument("--force", help="comma-separated outcomes, e.g. q2,q2,a or u0,v1,u1,v0,b")
    r.add_argument("--seed", type=int)
    r.add_argument("--all", action="store_true", help="enumerate every branch")
    r.add_argument("--ancillas", help="ancilla bits 'a,b' when deriving a GHZ channel (cj)")
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="noisy probabilistic fidelity over a grid")
    s.add_argument("--noise", choices=("ad", "pd", "both"), default="both")
    s.add_argument("--eta", default="0:1:0.05", help="start:stop:step or comma list")
    s.add_argument("--theta1", default="0.7853981633974483")
    s.add_argument("--theta2", default="0.7853981633974483")
    s.add_argument("--phi1", default="0")
    s.add_argument("--phi2", default="0")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", choices=sorted(vf.SUITES), default="all")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cbrsp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
