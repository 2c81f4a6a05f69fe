"""``cqdsim`` command line: run, sweep and verify.

Exit codes: 0 success, 1 configuration error, 2 abort under ``--strict``,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from ..errors import ConfigError
from .config import SWEEP_AXES, RunSpec, load_config, merge_overrides, spec_from_mapping
from .runner import run_spec, run_sweep
from .verify import run_verify

EXIT_OK, EXIT_CONFIG, EXIT_STRICT_ABORT, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 means strict-abort here
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--protocol", help="protocol id, e.g. cqd-sp, cqd-5stage, cdsqc-swap")
    p.add_argument("--rounds", type=int)
    p.add_argument("--seed", type=int, help="64-bit master seed")
    p.add_argument("--config", help="YAML or JSON run configuration")
    p.add_argument("--alice-bits", help="bit string or random:<n>")
    p.add_argument("--bob-bits", help="bit string or random:<n>")
    p.add_argument("--loss", type=float, help="per-hop loss probability")
    p.add_argument("--depol", type=float, help="per-hop depolarizing probability")
    p.add_argument("--eve", choices=("none", "intercept-resend"))
    p.add_argument("--eve-fraction", type=float)
    p.add_argument("--eve-basis", choices=("random", "rectilinear", "diagonal"))
    p.add_argument("--decoy-mode", choices=("permutation", "bs"))
    p.add_argument("--decoy-fraction", type=float)
    p.add_argument("--min-decoys", type=int)
    p.add_argument("--threshold", type=float, help="per-link QBER abort threshold")
    p.add_argument("--bell-efficiency", type=float)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cqdsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run a seeded batch of sessions")
    _add_run_args(run)
    run.add_argument("--strict", action="store_true", help="exit 2 if any session aborted")
    sweep = sub.add_parser("sweep", help="run once per value of one channel parameter")
    _add_run_args(sweep)
    sweep.add_argument("--axis", required=True, help=f"one of {', '.join(SWEEP_AXES)}")
    sweep.add_argument("--values", required=True, help="comma-separated values")
    verify = sub.add_parser("verify", help="run the RNG-free analytic checks")
    verify.add_argument("--convention", choices=("cqd", "textbook"), default="cqd",
                        help=argparse.SUPPRESS)  # fault injection for tests
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    raw: dict[str, Any] = load_config(args.config) if args.config else {}
    overrides = {
        "protocol": args.protocol, "rounds": args.rounds, "seed": args.seed,
        "messages.alice": args.alice_bits, "messages.bob": args.bob_bits,
        "channel.loss": args.loss, "channel.depol": args.depol,
        "channel.eve.kind": args.eve, "channel.eve.fraction": args.eve_fraction,
        "channel.eve.basis_policy": args.eve_basis,
        "decoy.mode": args.decoy_mode, "decoy.fraction": args.decoy_fraction,
        "decoy.min_decoys": args.min_decoys, "decoy.threshold": args.threshold,
        "bell_efficiency": args.bell_efficiency,
    }
    return spec_from_mapping(merge_overrides(raw, overrides))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    report = run_spec(spec)
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    agg = report.to_dict()["aggregates"]
    print(f"rounds={agg['rounds']} abort_rate={agg['abort_rate']} "
          f"alice_err={agg['alice_error_rate']} bob_err={agg['bob_error_rate']}", file=sys.stderr)
    if args.strict and report.any_aborted:
        return EXIT_STRICT_ABORT
    return EXIT_OK


def _parse_values(text: str) -> list[float]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return [float(t) for t in items]
    except ValueError:
        raise ConfigError("--values", f"not a list of numbers: {text!r}") from None


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    result = run_sweep(spec, args.axis, _parse_values(args.values))
    _emit(result.to_csv() if args.format == "csv" else json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n",
          args.out)
    for col, flag in result.monotonic().items():
        if flag != "no":
            print(f"monotonic {col}: {flag}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    ok, lines = run_verify(args.convention)
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_verify(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
