"""Command-line interface: ``sepcheck gen-state | analyze | sweep | soundness``."""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

from .battery import CRITERIA, analyze
from .criteria import (BUILTIN_SPECS, CriterionError, CriterionSpec, LocalOperatorSet,
                       check_soundness, soundness_fuzz)
from .io import FAMILY_NAMES, StateFileError, gen_state, load_state, parse_params, parse_shape
from .linalg import LinalgError
from .states import StateError
from .sweeps import FAMILIES, SweepError, sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_FUZZ = 4
FUZZ_THRESHOLD = 1e-9


class UsageError(Exception):
    pass


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_gen_state(args) -> int:
    sf = gen_state(args.family, parse_params(args.params), args.seed)
    _emit(sf.to_json(), args.output)
    return EXIT_OK


def _load_ops(path: str) -> LocalOperatorSet:
    try:
        return LocalOperatorSet.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise StateFileError(f"cannot read operator file {path}: {exc}") from None


def cmd_analyze(args) -> int:
    rho, meta = load_state(args.state)
    ops = "auto" if args.ops == "auto" else _load_ops(args.ops)
    report = analyze(rho, args.criteria, ops, metadata=meta, seed=args.seed)
    _emit(json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n", args.output)
    return EXIT_OK


def _fmt(x) -> str:
    return repr(float(x))


def cmd_sweep(args) -> int:
    try:
        rows = sweep(args.family, args.grid, args.method, seed=args.seed, n_restarts=args.restarts)
    except SweepError as exc:
        raise UsageError(str(exc)) from None
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "lhs", "rhs", "margin", "detected"])
    for r in rows:
        w.writerow([_fmt(r.param), _fmt(r.lhs), _fmt(r.rhs), _fmt(r.margin), str(r.detected).lower()])
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _load_spec(text: str) -> CriterionSpec:
    if text in BUILTIN_SPECS:
        return BUILTIN_SPECS[text]
    path = Path(text)
    if not path.exists():
        raise UsageError(f"{text!r} is neither a built-in spec ({', '.join(BUILTIN_SPECS)}) nor a file")
    try:
        return CriterionSpec.from_json(path.read_text())
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise StateFileError(f"malformed spec file {text}: {exc}") from None


def cmd_soundness(args) -> int:
    spec = _load_spec(args.spec)
    report = check_soundness(spec)
    if not report.sound:
        print(f"refusing to fuzz unsound spec {spec.name!r}", file=sys.stderr)
        print(report.ledger(), file=sys.stderr)
        return EXIT_INPUT
    dims = parse_shape(args.shape)
    fuzz = soundness_fuzz(spec, dims, args.samples, args.ops_per_state, args.seed)
    ok = fuzz.passed(FUZZ_THRESHOLD)
    out = {"spec": spec.name, "shape": list(dims), "samples": fuzz.n_samples,
           "operator_sets_per_sample": fuzz.n_operator_sets, "seed": args.seed,
           "max_margin": fuzz.max_margin, "worst_sample": fuzz.worst_sample,
           "threshold": FUZZ_THRESHOLD, "passed": ok}
    print(json.dumps(out, indent=2))
    return EXIT_OK if ok else EXIT_FUZZ


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sepcheck", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-state", help="write a state family to a JSON state file")
    g.add_argument("--family", required=True, choices=FAMILY_NAMES)
    g.add_argument("--params", default="", help="comma-separated key=value pairs")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=cmd_gen_state)

    a = sub.add_parser("analyze", help="run the criteria battery on a state file")
    a.add_argument("--state", required=True)
    a.add_argument("--criteria", default="all",
                   help=f"'all', 'bipartite' or a comma list of: {', '.join(CRITERIA)}")
    a.add_argument("--ops", default="auto", help="'auto' or an operator JSON file")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("-o", "--output", default=None)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="evaluate a criterion along a one-parameter family")
    s.add_argument("--family", required=True, choices=FAMILIES)
    s.add_argument("--grid", required=True, help="start:stop:step, inclusive")
    s.add_argument("--method", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--restarts", type=int, default=32)
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("soundness", help="fuzz a criterion against random separable states")
    f.add_argument("--spec", required=True, help="built-in name or spec JSON file")
    f.add_argument("--shape", default=None, help="local dims, e.g. 2x2x2")
    f.add_argument("--samples", type=int, default=1000)
    f.add_argument("--ops-per-state", type=int, default=20)
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=cmd_soundness)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "soundness" and args.shape is None:
        spec_parties = BUILTIN_SPECS[args.spec].n_parties if args.spec in BUILTIN_SPECS else None
        if spec_parties is None:
            ap.error("--shape is required for spec files")
        args.shape = "x".join(["2"] * spec_parties)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sepcheck: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StateError, LinalgError, StateFileError, CriterionError, OSError) as exc:
        print(f"sepcheck: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
