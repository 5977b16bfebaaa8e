"""Command-line front end.

Subcommands:

* ``generate``  build a labeled dataset file from a JSON config,
* ``train``     train the multitask model or a single-task variant,
* ``eval``      score a checkpoint (multitask) or a cascade (sequential)
                on a dataset, dumping metrics and raw predictions,
* ``assess``    grade samples with a multitask checkpoint and write the
                line-oriented assessment report,
* ``baseline``  alias for ``eval --mode sequential``.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error,
4 data or shape validation error, 5 unexpected internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .assessment import AssessmentThresholds, assess, assessment_row, write_report
from .baseline import SequentialAssessor
from .experiments.config import desk_config, full_scale_config, load_config, save_config
from .experiments.dataset import Dataset, build_dataset
from .experiments.metrics import evaluate_multitask, evaluate_sequential, write_rows_csv
from .experiments.training import save_result, train, write_log_csv
from .features import feature_tensor
from .net.checkpoint import load_model


def _add_generate(sub):
    p = sub.add_parser("generate", help="build a labeled dataset file")
    p.add_argument("--config", help="JSON experiment config (defaults to the desk preset)")
    p.add_argument("--preset", choices=("desk", "full"), default="desk")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, help="override the config master seed")
    p.add_argument("--count-per-kind", type=int, help="override samples per threat kind")
    p.add_argument("--dump-config", help="also write the effective config JSON here")


def _add_train(sub):
    p = sub.add_parser("train", help="train a model on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=("multitask", "intent", "capability"),
                   default="multitask")
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--resume", help="checkpoint to continue from")
    p.add_argument("--log", help="write the per-step loss log CSV here")


def _eval_args(p):
    p.add_argument("--dataset", required=True)
    p.add_argument("--ckpt", required=True,
                   help="multitask checkpoint, or the regression model in sequential mode")
    p.add_argument("--ckpt2", help="classifier checkpoint (sequential mode)")
    p.add_argument("--theta", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4],
                   help="gate thresholds for the sequential sweep")
    p.add_argument("--high-ber", type=float, default=1e-2)
    p.add_argument("--low-ber", type=float, default=1e-4)
    p.add_argument("--rows-out", help="write raw prediction rows CSV here")


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate checkpoints on a dataset")
    p.add_argument("--mode", choices=("multitask", "sequential"), default="multitask")
    _eval_args(p)


def _add_baseline(sub):
    p = sub.add_parser("baseline", help="sequential-cascade evaluation (eval --mode sequential)")
    _eval_args(p)


def _add_assess(sub):
    p = sub.add_parser("assess", help="grade samples and write the assessment report")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--input", required=True,
                   help="dataset file, or .npz with a complex 'samples' series")
    p.add_argument("--config", help="experiment config JSON (required for .npz input)")
    p.add_argument("--out", required=True)
    p.add_argument("--high-ber", type=float, default=1e-2)
    p.add_argument("--low-ber", type=float, default=1e-4)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpaware", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_train(sub)
    _add_eval(sub)
    _add_baseline(sub)
    _add_assess(sub)
    return parser


def cmd_generate(args) -> int:
    if args.config:
        config = load_config(args.config)
    else:
        config = desk_config() if args.preset == "desk" else full_scale_config()
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    per_kind = args.count_per_kind or config.train_per_kind
    if args.dump_config:
        save_config(args.dump_config, config)
    count = build_dataset(args.out, config, per_kind=per_kind,
                          master_seed=config.master_seed)
    print(f"wrote {count} samples to {args.out} (seed {config.master_seed})")
    return 0


def cmd_train(args) -> int:
    ds = Dataset(args.dataset)
    config = ds.config
    tensors, intent_idx, log_ber, _ = ds.load_arrays()
    epochs = args.epochs or config.regime.epochs
    batch_size = args.batch_size or config.regime.batch_size
    seed = args.seed if args.seed is not None else config.regime.train_seed
    result = train(tensors, intent_idx, log_ber, config.net, task=args.mode,
                   epochs=epochs, batch_size=batch_size, seed=seed,
                   resume_from=args.resume)
    save_result(args.out, result, seed=seed, batch_size=batch_size)
    if args.log:
        write_log_csv(args.log, result.log)
    final = result.log[-1]["loss_total"] if result.log else float("nan")
    print(f"trained {args.mode} for {len(result.log)} steps "
          f"(label variance {result.label_variance:.6g}, final loss {final:.6g}); "
          f"saved {args.out}")
    return 0


def _run_eval(args, mode: str) -> int:
    ds = Dataset(args.dataset)
    tensors, intent_idx, log_ber, _ = ds.load_arrays()
    thresholds = AssessmentThresholds(high_ber=args.high_ber, low_ber=args.low_ber)
    all_rows = []
    if mode == "multitask":
        model, _, _ = load_model(args.ckpt)
        report, rows = evaluate_multitask(model, tensors, intent_idx, log_ber,
                                          thresholds)
        print("\n".join(report.summary_lines()))
        all_rows = rows
    else:
        if not args.ckpt2:
            raise ValueError("sequential mode needs --ckpt (regression) and --ckpt2 (classifier)")
        regressor, _, _ = load_model(args.ckpt)
        classifier, _, _ = load_model(args.ckpt2)
        for theta in args.theta:
            assessor = SequentialAssessor(regressor, classifier, theta, thresholds)
            report, rows = evaluate_sequential(assessor, tensors, intent_idx, log_ber)
            print("\n".join(report.summary_lines()))
            print(f"  classifier invocations: {report.extra['classifier_invocations']}"
                  f" / {len(rows)} (gated {report.extra['gated_count']})")
            all_rows = rows
    if args.rows_out:
        write_rows_csv(args.rows_out, all_rows)
    return 0


def cmd_eval(args) -> int:
    return _run_eval(args, args.mode)


def cmd_baseline(args) -> int:
    return _run_eval(args, "sequential")


def cmd_assess(args) -> int:
    model, _, _ = load_model(args.ckpt)
    thresholds = AssessmentThresholds(high_ber=args.high_ber, low_ber=args.low_ber)
    path = Path(args.input)
    if path.read_bytes()[:4] == b"CPAD":
        ds = Dataset(path)
        tensors, _, _, _ = ds.load_arrays()
    else:
        if not args.config:
            raise ValueError("--config is required for raw .npz input")
        config = load_config(args.config)
        payload = np.load(path)
        if "samples" not in payload:
            raise ValueError(f"{path}: expected an array named 'samples'")
        feats = feature_tensor(payload["samples"], config.frame, config.feature)
        tensors = feats.data[None, ...]
    probs, rho_hat = model.predict_batched(tensors)
    rows = [assessment_row(i, assess(p, float(r), thresholds))
            for i, (p, r) in enumerate(zip(probs, rho_hat))]
    write_report(args.out, rows)
    print(f"assessed {len(rows)} samples; report written to {args.out}")
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "baseline": cmd_baseline,
    "assess": cmd_assess,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"cpaware: I/O error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"cpaware: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover
        print(f"cpaware: internal error: {exc!r}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
