"""Command-line entry point.

Exit status: 0 on success, 1 when the input (config, data, arguments) is
invalid, 2 when a run fails at runtime.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import defaultdict
from dataclasses import replace
from pathlib import Path

from . import dataset, metrics, synthgen
from .config import PipelineConfig, load_config
from .neuralkit.checks import TOLERANCE, run_all
from .pipeline import PipelineError, Variant, run_pipeline

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class InvalidInput(Exception):
    pass


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if args.config is not None:
        try:
            cfg = load_config(args.config)
        except OSError as exc:
            raise InvalidInput(f"cannot read config: {exc}") from None
        except ValueError as exc:
            raise InvalidInput(f"{args.config}: {exc}") from None
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args) -> int:
    cfg = _config(args)
    synth = cfg.synth if args.seed is None else replace(cfg.synth, seed=args.seed)
    path = _out_dir(args) / "synth.csv"
    samples = synthgen.generate_dataset(synth)
    dataset.write_csv(samples, path)
    print(f"wrote {len(samples)} samples to {path}")
    return EXIT_OK


def _run(args, variant: Variant) -> int:
    cfg = _config(args)
    if args.data is not None and not Path(args.data).is_file():
        raise InvalidInput(f"data file not found: {args.data}")
    out = _out_dir(args)
    result = run_pipeline(cfg, args.data, out, variant, baselines=args.baselines,
                          save_models=args.save_models)
    summary = {"variant": variant.value, "selected": result.selected,
               "selection_scores": result.selection_scores,
               "test_size": result.test_size, "pool_counts": result.pool_counts[0],
               "aggregate": metrics.aggregate(result.reports)}
    for name, reps in result.baselines.items():
        summary[f"baseline_{name}"] = metrics.aggregate(reps)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    return _run(args, Variant.FULL)


def cmd_ablate(args) -> int:
    try:
        variant = Variant(args.variant)
    except ValueError:
        raise InvalidInput(f"unknown variant {args.variant!r}; "
                           f"choose from {[v.value for v in Variant]}") from None
    return _run(args, variant)


def cmd_eval(args) -> int:
    """Aggregate every ``report_<variant>_<repeat>.json`` under ``--out``."""
    root = Path(args.out)
    if not root.is_dir():
        raise InvalidInput(f"no such report directory: {root}")
    groups = defaultdict(list)
    for path in sorted(root.glob("report_*_*.json")):
        try:
            rep = metrics.RunReport.read(path)
        except (ValueError, KeyError) as exc:
            raise InvalidInput(f"{path}: malformed report ({exc})") from None
        groups[rep.variant].append(rep)
    if not groups:
        raise InvalidInput(f"no report_*.json files in {root}")
    if args.variant is not None:
        groups = {k: v for k, v in groups.items() if k == args.variant}
    summary = {name: metrics.aggregate(reps) for name, reps in sorted(groups.items())}
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_grad_check(args) -> int:
    results = run_all(0 if args.seed is None else args.seed)
    worst = max(results.values())
    for name, err in results.items():
        print(f"{'ok  ' if err < TOLERANCE else 'FAIL'} {name:24s} {err:.3e}")
    print(f"max relative error {worst:.3e} (tolerance {TOLERANCE:g})")
    return EXIT_OK if worst < TOLERANCE else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--seed", type=int, help="master seed override")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--data", help="CSV of raw samples (default: synthetic data)")
    run.add_argument("--baselines", action="store_true",
                     help="also train a lone CNN and a lone FCN per repeat")
    run.add_argument("--save-models", action="store_true",
                     help="write SAE-GAN and ensemble checkpoints to --out")

    parser = argparse.ArgumentParser(prog="faultloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="write a synthetic dataset CSV"
                   ).set_defaults(func=cmd_synth)
    sub.add_parser("pipeline", parents=[common, run], help="run the full method"
                   ).set_defaults(func=cmd_pipeline)
    p = sub.add_parser("ablate", parents=[common, run], help="run one ablation variant")
    p.add_argument("--variant", required=True, help=", ".join(v.value for v in Variant))
    p.set_defaults(func=cmd_ablate)
    p = sub.add_parser("eval", parents=[common], help="aggregate reports in --out")
    p.add_argument("--variant", help="only this variant")
    p.set_defaults(func=cmd_eval)
    sub.add_parser("grad-check", parents=[common], help="finite-difference gradient checks"
                   ).set_defaults(func=cmd_grad_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; usage errors are invalid input here
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        invalid = exc.stage == "load" and isinstance(exc.cause, (ValueError, OSError))
        return EXIT_INVALID if invalid else EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
