"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 I/O failure (argparse usage
errors also exit with 2).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import channels, metrics, shots, tomography
from .qmath import check_density_matrix, matrix_from_json
from .reproduce import report_to_csv, report_to_json, reproduce_paper


class ValidationFailure(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _source(args) -> shots.SourceModel:
    return shots.SourceModel(args.rate, args.duration, args.reps)


def _load_state(spec: str) -> np.ndarray:
    """A named state or a path to a matrix JSON file."""
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        return check_density_matrix(matrix_from_json(json.loads(path.read_text())), tol=1e-8)
    return shots.named_state(spec)


def _load_channel(spec: str | None):
    if spec in (None, "none"):
        return None
    path = Path(spec)
    if path.suffix == ".json" or path.exists():
        return channels.channel_from_json(json.loads(path.read_text()))
    return channels.named_channel(spec)


def _load_records(path: str) -> list[shots.CountRecord]:
    text = Path(path).read_text()
    if path.endswith(".json"):
        return shots.records_from_json(json.loads(text))
    return shots.records_from_csv(text)


def cmd_minimal_p(args) -> int:
    p = channels.minimal_spa_admixture(args.dim)
    formula = args.dim / (args.dim + 1)
    print(f"{p:.9f}")
    print(f"formula d/(d+1) = {formula:.9f}")
    return 0 if abs(p - formula) < 1e-9 else 1


def cmd_choi(args) -> int:
    rep = _load_channel(args.channel)
    if rep is None:
        raise ValidationFailure("a channel is required")
    _emit(_dump(channels.channel_to_json(channels.convert(rep, args.to))), args.out)
    return 0


def cmd_simulate(args) -> int:
    channel = _load_channel(args.channel)
    rho = _load_state(args.input_state) if args.kind == "qst" else None
    records = shots.generate_tomography_dataset(
        args.kind,
        channel=channel,
        source=_source(args),
        master_seed=args.seed,
        rho=rho,
        input_label=args.input_state if args.kind == "qst" else "",
        noiseless=args.noiseless,
        workers=args.jobs,
    )
    if args.format == "csv":
        text = shots.records_to_csv(records)
    else:
        kind = None if channel is None else channels.kind_of(channel)
        text = _dump(shots.records_to_json(records, kind=args.kind, source=_source(args), channel_kind=kind, master_seed=args.seed))
    _emit(text, args.out)
    return 0


def _records_for(args, kind):
    if args.data:
        return _load_records(args.data)
    return shots.generate_tomography_dataset(
        kind,
        channel=_load_channel(args.channel),
        source=_source(args),
        master_seed=args.seed,
        rho=_load_state(args.input_state) if kind == "qst" else None,
        noiseless=args.noiseless,
    )


def cmd_qst(args) -> int:
    result = tomography.qst_mle(_records_for(args, "qst"), record_trace=args.trace)
    _emit(_dump(result.to_json(include_trace=args.trace)), args.out)
    return 0


def cmd_qpt(args) -> int:
    result = tomography.qpt_mle(_records_for(args, "qpt"), record_trace=args.trace)
    _emit(_dump(result.to_json(include_trace=args.trace)), args.out)
    return 0


def cmd_fidelity(args) -> int:
    a_obj = json.loads(Path(args.a).read_text())
    b_obj = json.loads(Path(args.b).read_text())
    if args.kind in ("uhlmann", "overlap"):
        report = metrics.state_fidelity_report(matrix_from_json(a_obj), matrix_from_json(b_obj), args.kind)
    else:
        a, b = channels.channel_from_json(a_obj), channels.channel_from_json(b_obj)
        result = metrics.process_and_average_fidelity(a, b, samples=args.samples, seed=args.seed)
        value = result.process if args.kind == "process" else result.average
        report = metrics.FidelityReport(value, args.kind, (metrics.content_hash(a_obj), metrics.content_hash(b_obj)))
    _emit(_dump(report.to_json()), args.out)
    return 0


def cmd_reproduce(args) -> int:
    report = reproduce_paper(args.seed, _source(args), trials=args.trials, qpt_trials=args.qpt_trials, jobs=args.jobs)
    text = report_to_csv(report) if args.format == "csv" else report_to_json(report)
    _emit(text, args.out)
    return 0 if report["all_passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--rate", type=float, default=4000.0, help="coincidence rate, counts/s")
    common.add_argument("--duration", type=float, default=1.0, help="seconds per setting")
    common.add_argument("--reps", type=int, default=3, help="repetitions per setting")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--jobs", type=int, default=1)

    parser = argparse.ArgumentParser(prog="spa-transpose", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("minimal-p", help="minimal admixture making the SPA completely positive")
    p.add_argument("--dim", type=int, required=True, choices=(2, 3, 4))
    p.set_defaults(func=cmd_minimal_p)

    p = sub.add_parser("choi", parents=[common], help="convert a channel between representations")
    p.add_argument("--channel", required=True, help=f"name ({', '.join(channels.NAMED_CHANNELS)}) or JSON file")
    p.add_argument("--to", default="choi", choices=channels.KINDS)
    p.set_defaults(func=cmd_choi)

    p = sub.add_parser("simulate", parents=[common], help="simulate a tomography count dataset")
    p.add_argument("--kind", default="qst", choices=("qst", "qpt"))
    p.add_argument("--input-state", default="eq4")
    p.add_argument("--channel", default="none")
    p.add_argument("--noiseless", action="store_true")
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.set_defaults(func=cmd_simulate)

    for name, func in (("qst", cmd_qst), ("qpt", cmd_qpt)):
        p = sub.add_parser(name, parents=[common], help=f"maximum-likelihood {name.upper()}")
        p.add_argument("data", nargs="?", help="dataset CSV/JSON; simulated when omitted")
        p.add_argument("--input-state", default="eq4")
        p.add_argument("--channel", default="none" if name == "qst" else "spa-mp")
        p.add_argument("--noiseless", action="store_true")
        p.add_argument("--trace", action="store_true", help="include the log-likelihood trace")
        p.set_defaults(func=func)

    p = sub.add_parser("fidelity", parents=[common], help="fidelity between two states or channels")
    p.add_argument("--kind", default="uhlmann", choices=metrics.FIDELITY_KINDS)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("reproduce-paper", parents=[common], help="run every check and write a report")
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--qpt-trials", type=int, default=20)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ValidationFailure, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
