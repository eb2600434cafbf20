"""Command-line entry point.

Exit codes: 0 success / all inequalities satisfied, 2 bad input or I/O
failure, 3 at least one inequality violated (or non-member).  Code 1 is left
to unexpected crashes.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import _jsonio
from .consistency import derive_chsh_facets, generate_consistency_inequalities, lhv_membership
from .harness import ConfigError, ExperimentConfig, QmSource, ShotFileError, estimate, load_config, run_experiment
from .labels import MEASURED_PAIRS, SETTINGS, CorrelationSet, pretty_pair
from .reporting import build_report, membership_text, report_csv, report_text

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_VIOLATED = 3

DEFAULT_SHOTS = 10000


def _parse_angles(text: str) -> dict[str, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError(f"--angles needs four comma-separated radians (A,A',B,B'), got {text!r}")
    try:
        return dict(zip(SETTINGS, (float(p) for p in parts)))
    except ValueError:
        raise ConfigError(f"--angles values must be numbers, got {text!r}") from None


def cmd_simulate(args) -> int:
    if args.config is None and args.angles is None:
        raise ConfigError("simulate needs --config or --angles")
    if args.config is not None:
        config = load_config(args.config)
        source, shots, seed, pairs = config.source, config.shots_per_pair, config.seed, config.pairs
        if args.angles is not None:
            source = QmSource(_parse_angles(args.angles))
    else:
        source, shots, seed, pairs = QmSource(_parse_angles(args.angles)), DEFAULT_SHOTS, 0, MEASURED_PAIRS
    config = ExperimentConfig(source, args.shots if args.shots is not None else shots,
                              args.seed if args.seed is not None else seed, pairs)
    result = run_experiment(config, args.out)
    summary = result.summary()
    if args.json:
        print(_jsonio.dumps(summary))
    else:
        print(f"wrote {len(result.files)} shot files to {args.out}")
        for pair, row in summary.items():
            print(f"  {pretty_pair(pair):8s} E = {row['E']: .6f}  SE = {row['SE']:.6f}  N = {row['N']}")
    return EXIT_OK


def _analyze(shot_dir):
    path = Path(shot_dir)
    if not path.exists():
        raise ShotFileError(f"shot directory not found: {path}")
    return build_report(estimate(path))


def cmd_analyze(args) -> int:
    bundle = _analyze(args.shots_dir)
    if args.json:
        print(_jsonio.dumps(bundle.to_dict()))
    else:
        print(report_text(bundle))
    return EXIT_VIOLATED if bundle.violated else EXIT_OK


def cmd_report(args) -> int:
    bundle = _analyze(args.shots_dir)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as f:
        _jsonio.dump(bundle.to_dict(), f)
    (out / "report.csv").write_text(report_csv(bundle))
    if args.json:
        print(_jsonio.dumps(bundle.to_dict()))
    else:
        print(report_text(bundle))
        print(f"\nwrote {out / 'report.json'} and {out / 'report.csv'}")
    return EXIT_VIOLATED if bundle.violated else EXIT_OK


def cmd_facets(args) -> int:
    base = generate_consistency_inequalities()
    facets = derive_chsh_facets(base)
    if args.json:
        print(_jsonio.dumps([i.to_dict() for i in base + facets]))
        return EXIT_OK
    for ineq in base:
        print(f"{ineq.name:10s} {ineq.text()}")
    for f in facets:
        parents = " + ".join(p.name for p in f.parents)
        print(f"{f.name:10s} {f.text()}   [{parents}, eliminates {pretty_pair(f.eliminated)}]")
    return EXIT_OK


def cmd_membership(args) -> int:
    values = args.values
    bad = [v for v in values if not -1 <= v <= 1]
    if bad:
        raise ConfigError(f"correlations must lie in [-1, 1], got {bad}")
    result = lhv_membership(CorrelationSet.from_measured(values))
    if args.json:
        print(_jsonio.dumps(result.to_dict()))
    else:
        print(membership_text(result))
    return EXIT_OK if result.is_member else EXIT_VIOLATED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eprbkit", description="EPRB correlation experiments and CHSH analysis")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate shot files from a QM or LHV source")
    p.add_argument("--config", help="experiment config (JSON)")
    p.add_argument("--out", required=True, help="output directory for shot files")
    p.add_argument("--shots", type=int, help="shots per setting pair (overrides config)")
    p.add_argument("--seed", type=int, help="random seed (overrides config)")
    p.add_argument("--angles", help="QM analyzer angles A,A',B,B' in radians")
    p.add_argument("--json", action="store_true", help="print the summary as JSON")
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (("analyze", cmd_analyze, "evaluate inequalities on shot files"),
                                 ("report", cmd_report, "write JSON and CSV inequality reports")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("shots_dir", help="directory of shots_*.jsonl files")
        if name == "report":
            p.add_argument("--out", required=True, help="directory for report.json and report.csv")
        p.add_argument("--json", action="store_true")
        p.set_defaults(func=func)

    p = sub.add_parser("facets", help="list the 16 consistency inequalities and 8 CHSH facets")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_facets)

    p = sub.add_parser("membership", help="test (AB, AB', A'B, A'B') against the local polytope")
    p.add_argument("values", nargs=4, type=float, metavar="E", help="AB AB' A'B A'B'")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_membership)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ShotFileError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
