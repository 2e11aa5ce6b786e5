"""Command line entry point: ``noisyqpc <scenario> [flags]``.

Exit status: 0 when every row's verdict passes, 1 on a statistical
violation, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import SCENARIOS, ExperimentSpec, SpecError, run_experiment

_HELP = {
    "epr-sweep": "EPR protocol failure rate (Charlie reports 1 on equal inputs) vs the closed forms",
    "css-keydist": "CSS key distribution: completed runs that deliver a wrong key",
    "css-qpc": "CSS comparison: completed runs reporting 1 on equal inputs",
    "eve-attack": "intercept-resend abort rate (n = decoys per channel, or check bits with --protocol css)",
    "dishonest-charlie": "rate at which a lying Charlie is caught over m + 1 rounds",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyqpc", description="Quantum private comparison over noisy channels.")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=_HELP[name], description=_HELP[name])
        p.add_argument("--config", type=Path, help="JSON file with experiment settings; flags override it")
        p.add_argument("--p", type=float, nargs="+", help="noise strength grid (depolarizing p or bit-flip p)")
        p.add_argument("--q", type=float, nargs="+", help="phase-flip grid (with --noise bitphase)")
        p.add_argument("--n", type=int, nargs="+", help="message/key length grid")
        p.add_argument("--m", type=int, nargs="+", help="known-round count grid (dishonest-charlie)")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--threshold", type=float, help="abort threshold on the decoy/check error rate")
        p.add_argument("--out", help="CSV path; stdout when omitted")
        p.add_argument("--code", help="code-pair file (default: Steane)")
        p.add_argument("--noise", choices=("depolarizing", "bitphase"))
        p.add_argument("--protocol", choices=("epr", "css"), help="eve-attack target")
        p.add_argument("--decoys", type=int, help="EPR decoys per channel (default n)")
        p.add_argument("--check-bits", type=int, dest="check_bits")
        p.add_argument("--strategy", help="dishonest Charlie: honest, always-flip, flip-one, flip-prob")
        p.add_argument("--rho", type=float, help="flip probability for --strategy flip-prob")
        p.add_argument("--full-protocol", action="store_true", default=None, dest="full_protocol")
        p.add_argument("--workers", type=int)
    return parser


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    data: dict = {}
    if args.config is not None:
        data = json.loads(args.config.read_text())
        if not isinstance(data, dict):
            raise SpecError("config must be a JSON object")
    data["scenario"] = args.scenario
    for key, value in vars(args).items():
        if key in ("config", "scenario") or value is None:
            continue
        data[key] = value
    return ExperimentSpec.from_mapping(data)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_args(args)
        text, rows = run_experiment(spec)
    except (OSError, ValueError) as err:
        print(f"noisyqpc: error: {err}", file=sys.stderr)
        return 2
    if spec.out is None:
        sys.stdout.write(text)
    failed = [r for r in rows if r["verdict"] == "fail"]
    for r in failed:
        print(f"noisyqpc: {r['scenario']} cell seed={r['seed']} outside {3:g} sigma: "
              f"empirical {r['empirical']:.6f} vs analytic {r['analytic']:.6f}", file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
