"""``tgbench`` command line: run, grid, convert, check."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..data import dtdg_to_ctdg, label_sidecar_path, load_dtdg_json, write_event_csv
from ..errors import TGBenchError
from .check import run_checks
from .config import SEED_ENV, parse_config
from .grid import PRESETS, GridSpec, expand_grid
from .runner import run_and_emit


def _parse_value(text: str):
    """Values given on the command line are JSON when they parse as JSON, strings otherwise."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _assignments(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise TGBenchError(f"expected KEY=VALUE, got {item!r}")
        out[key.strip()] = _parse_value(value)
    return out


def _cmd_run(args) -> int:
    raw = json.loads(Path(args.config).read_text()) if args.config else {}
    raw.update(_assignments(args.set))
    if args.seed is not None:
        raw["seed"] = args.seed
    cfg = parse_config(raw, apply_env=args.seed is None)
    out = args.out or cfg.out_dir
    reports, code = run_and_emit([cfg], 1, out)
    rep = reports[0]
    if rep.status != "ok":
        print(f"run {cfg.run_id()} failed: {rep.error}", file=sys.stderr)
    else:
        shown = ", ".join(f"{k}={v:.4f}" for k, v in sorted(rep.metrics.items()))
        print(f"run {cfg.run_id()} ({cfg.name or cfg.model}): {shown}")
    print(f"results written to {out}")
    return code


def _cmd_grid(args) -> int:
    base, vary, preset = {}, {}, args.preset or ""
    if args.spec:
        spec = json.loads(Path(args.spec).read_text())
        unknown = set(spec) - {"base", "vary", "preset"}
        if unknown:
            raise TGBenchError(f"grid spec: unknown key(s) {sorted(unknown)}")
        base, vary = dict(spec.get("base", {})), dict(spec.get("vary", {}))
        preset = preset or spec.get("preset", "")
    if args.data:
        base["dataset"] = args.data
    base.update(_assignments(args.set))
    if args.seeds:
        vary["seed"] = [int(s) for s in args.seeds.split(",")]
    elif os.environ.get(SEED_ENV):
        base["seed"] = int(os.environ[SEED_ENV])
    configs = expand_grid(GridSpec(base=base, vary=vary, preset=preset))
    print(f"running {len(configs)} configuration(s) with {args.jobs} worker(s)")
    reports, code = run_and_emit(configs, args.jobs, args.out, preset=preset)
    failed = [r for r in reports if r.status != "ok"]
    for r in failed:
        print(f"failed: {r.config.get('name') or r.config.get('model')}: {r.error}", file=sys.stderr)
    print(f"{len(reports) - len(failed)}/{len(reports)} runs completed; results in {args.out}")
    return code


def _cmd_convert(args) -> int:
    seq = load_dtdg_json(args.input, lag=args.lag, standardize=args.standardize)
    stream = dtdg_to_ctdg(seq, event_cap=args.event_cap)
    labels = Path(args.labels) if args.labels else label_sidecar_path(args.out)
    write_event_csv(stream, args.out, labels)
    per_snapshot = sum(s.num_edges for s in seq) if args.event_cap is None else None
    print(f"wrote {len(stream)} events (feature_dim={stream.feature_dim}) to {args.out}")
    print(f"wrote labels for {seq.num_nodes} nodes x {len(seq)} timestamps to {labels}")
    if per_snapshot is not None and per_snapshot != len(stream):
        print("event count does not match the snapshot edge count", file=sys.stderr)
        return 1
    return 0


def _cmd_check(args) -> int:
    return run_checks(seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgbench", description="Temporal graph model benchmark.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a JSON config")
    p.add_argument("--config", help="JSON config file (defaults apply to missing keys)")
    p.add_argument("--seed", type=int, help=f"override the seed (takes precedence over {SEED_ENV})")
    p.add_argument("--out", help="output directory (defaults to the config's out_dir)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("grid", help="run a preset table or a Cartesian grid")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--spec", help='JSON grid spec {"base": {...}, "vary": {"field": [...]}}')
    p.add_argument("--data", help="dataset path (or synthetic:covid / synthetic:interactions)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="number of worker processes")
    p.add_argument("--seeds", help="comma-separated seeds to repeat every row with")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a base config field")
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("convert", help="convert a DTDG JSON file to an event CSV plus label sidecar")
    p.add_argument("--in", dest="input", required=True, help="DTDG JSON file")
    p.add_argument("--lag", type=int, default=8)
    p.add_argument("--out", required=True, help="event CSV to write")
    p.add_argument("--labels", help="label sidecar path (default: <out stem>_labels.csv)")
    p.add_argument("--event-cap", type=int, help="keep at most this many events per timestamp")
    p.add_argument("--standardize", choices=("global", "per_node"), default="global")
    p.set_defaults(func=_cmd_convert)

    p = sub.add_parser("check", help="run the gradient and oracle self-checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TGBenchError, OSError, json.JSONDecodeError) as exc:
        print(f"tgbench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
