"""Command line pipeline: ingest -> train-cnn -> extract -> train-svm -> evaluate.

Configuration values resolve in precedence order: built-in defaults, then a
JSON ``--config`` file, then the ``--desk-scale`` preset, then explicit
flags.  Exit codes: 0 success, 2 usage or precondition violation, 3 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data.images import ImageDecodeError, load_and_preprocess
from .data.manifest import (
    DatasetLayoutError,
    DatasetManifest,
    SplitSpec,
    scan_directory,
    split_manifest,
    write_manifest_csv,
)
from .estimators import KernelSvm, VggClassifier
from .featstore import FeatureFormatError, LabeledFeatureSet, read_features, write_features
from .metrics import confusion, compute_report, write_confusion_csv, write_report_csv
from .nn.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .nn.training import TrainingDivergedError
from .svm.model import SvmFormatError, load_svm, save_svm

__all__ = ["main", "console_main", "DEFAULTS", "DESK_SCALE_PRESET", "resolve_config"]

DEFAULTS = {
    "root": None,
    "out": None,
    "variant": "vgg19",
    "side": 224,
    "scale": 1.0,
    "seed": 0,
    "fraction": 0.7,
    "epochs": 200,
    "lr": 0.001,
    "batch": 32,
    "momentum": 0.9,
    "kernel": "rbf",
    "margin": "soft",
    "c": 0.001,
    "gamma": 0.001,
    "standardize": False,
    "skip_bad": False,
}

DESK_SCALE_PRESET = {"side": 32, "scale": 0.125, "epochs": 20}

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_PRECONDITION_ERRORS = (
    DatasetLayoutError,
    ImageDecodeError,
    CheckpointError,
    SvmFormatError,
    FeatureFormatError,
    ValueError,
    FileNotFoundError,
)


@dataclass(frozen=True)
class PipelineConfig:
    root: str | None
    out: str | None
    variant: str
    side: int
    scale: float
    seed: int
    fraction: float
    epochs: int
    lr: float
    batch: int
    momentum: float
    kernel: str
    margin: str
    c: float
    gamma: float
    standardize: bool
    skip_bad: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Merge defaults, config file, desk-scale preset and explicit flags."""
    values = dict(DEFAULTS)

    config_path = getattr(args, "config", None)
    if config_path:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config file {config_path}: {exc}") from exc
        unknown = set(loaded) - set(values)
        if unknown:
            raise ValueError(f"unknown config keys in {config_path}: {sorted(unknown)}")
        values.update(loaded)

    if getattr(args, "desk_scale", None):
        values.update(DESK_SCALE_PRESET)

    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    return PipelineConfig(**values)


def _require(config: PipelineConfig, *fields: str) -> None:
    for name in fields:
        if getattr(config, name) is None:
            raise ValueError(f"--{name} is required for this command")


def _out_dir(config: PipelineConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(stage: str, message: str) -> None:
    print(f"[{stage}] {message}")


# ---------------------------------------------------------------------------
# stage helpers

def _scan_and_split(config: PipelineConfig) -> tuple[DatasetManifest, DatasetManifest, DatasetManifest]:
    manifest = scan_directory(config.root, skip_bad=config.skip_bad)
    train, test = split_manifest(manifest, SplitSpec(config.fraction, config.seed))
    overlap = set(train.source_ids) & set(test.source_ids)
    if overlap:
        raise RuntimeError(f"train/test leakage: {len(overlap)} shared samples")
    return manifest, train, test


def _load_arrays(manifest: DatasetManifest, side: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.empty((len(manifest), 3, side, side), dtype=np.float32)
    for i, ((sid, _), path) in enumerate(zip(manifest.entries, manifest.paths())):
        X[i] = load_and_preprocess(path, side, source_id=sid).pixels
    return X, manifest.labels


def _signed(labels: np.ndarray) -> np.ndarray:
    """Class indices {0, 1} -> SVM labels {-1, +1}."""
    return (2 * labels - 1).astype(np.int64)


def _extract_features(net, manifest: DatasetManifest, side: int) -> LabeledFeatureSet:
    vectors = np.empty((len(manifest), net.config.feature_dim), dtype=np.float32)
    for i, path in enumerate(manifest.paths()):
        sample = load_and_preprocess(path, side)
        vectors[i] = net.features(sample.pixels.astype(np.float32))
    return LabeledFeatureSet(vectors=vectors, labels=_signed(manifest.labels))


def _train_cnn(config: PipelineConfig) -> tuple[Path, Path]:
    _require(config, "root", "out")
    out = _out_dir(config)
    _, train, test = _scan_and_split(config)
    _say("train-cnn", f"{len(train)} train / {len(test)} test samples, classes {train.class_names}")

    X_train, y_train = _load_arrays(train, config.side)
    X_test, y_test = _load_arrays(test, config.side)

    clf = VggClassifier(
        variant=config.variant,
        input_side=config.side,
        channel_scale=config.scale,
        learning_rate=config.lr,
        epochs=config.epochs,
        batch_size=config.batch,
        momentum=config.momentum,
        seed=config.seed,
    )
    clf.fit(X_train, y_train, eval_set=(X_test, y_test))

    log_path = out / "train_log.csv"
    clf.history_.to_csv(log_path)
    final = clf.history_.records[-1]
    _say(
        "train-cnn",
        f"final train accuracy {final.train_accuracy:.4f} (loss {final.train_loss:.4f}), "
        f"test accuracy {final.test_accuracy:.4f} (loss {final.test_loss:.4f})",
    )

    ckpt_path = out / "model.hvgg"
    save_checkpoint(
        clf.net_,
        ckpt_path,
        extra={
            "split_seed": config.seed,
            "train_fraction": config.fraction,
            "class_names": list(train.class_names),
        },
    )
    _say("train-cnn", f"wrote {ckpt_path} and {log_path}")
    return ckpt_path, log_path


def _extract(config: PipelineConfig, checkpoint: str | None, seed_flag: int | None) -> tuple[Path, Path]:
    _require(config, "root", "out")
    out = _out_dir(config)
    ckpt_path = Path(checkpoint) if checkpoint else out / "model.hvgg"
    net, extra = load_checkpoint(ckpt_path)

    stored_seed = int(extra["split_seed"])
    if seed_flag is not None and seed_flag != stored_seed:
        raise ValueError(
            f"--seed {seed_flag} does not match the checkpoint's split seed {stored_seed}; "
            "extraction must reuse the training split to avoid train/test leakage"
        )
    split = SplitSpec(float(extra["train_fraction"]), stored_seed)

    manifest = scan_directory(config.root, skip_bad=config.skip_bad)
    if list(manifest.class_names) != list(extra["class_names"]):
        raise ValueError(
            f"dataset classes {manifest.class_names} do not match the checkpoint's "
            f"{tuple(extra['class_names'])}"
        )
    train, test = split_manifest(manifest, split)
    overlap = set(train.source_ids) & set(test.source_ids)
    if overlap:
        raise RuntimeError(f"train/test leakage: {len(overlap)} shared samples")

    side = net.config.input_side
    train_path, test_path = out / "train.hfv", out / "test.hfv"
    write_features(_extract_features(net, train, side), train_path)
    write_features(_extract_features(net, test, side), test_path)
    _say(
        "extract",
        f"wrote {train_path} ({len(train)} x {net.config.feature_dim}) and "
        f"{test_path} ({len(test)} x {net.config.feature_dim})",
    )
    return train_path, test_path


def _train_svm_cmd(config: PipelineConfig, features_path: str | None) -> Path:
    _require(config, "out")
    out = _out_dir(config)
    path = Path(features_path) if features_path else out / "train.hfv"
    features = read_features(path)

    clf = KernelSvm(
        kernel=config.kernel,
        gamma=config.gamma,
        C=config.c,
        margin=config.margin,
        standardize=config.standardize,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        clf.fit(features.vectors, features.labels)
    for w in caught:
        _say("train-svm", f"warning: {w.message}")

    model = clf.model_
    status = "converged" if model.converged else f"did NOT converge ({model.iterations} updates)"
    _say(
        "train-svm",
        f"{model.n_support} support vectors of {len(features)} samples; {status}; "
        f"kernel={config.kernel} margin={config.margin} C={config.c} gamma={config.gamma}",
    )
    model_path = out / "model.hsvm"
    save_svm(model, model_path)
    _say("train-svm", f"wrote {model_path}")
    return model_path


def _evaluate(config: PipelineConfig, model_path: str | None, features_path: str | None, label: str | None) -> Path:
    _require(config, "out")
    out = _out_dir(config)
    mpath = Path(model_path) if model_path else out / "model.hsvm"
    fpath = Path(features_path) if features_path else out / "test.hfv"
    model = load_svm(mpath)
    features = read_features(fpath)
    if features.feature_dim != model.feature_dim:
        raise ValueError(
            f"feature dimension {features.feature_dim} does not match model "
            f"dimension {model.feature_dim}"
        )

    predicted = model.predict(features.vectors)
    cm = confusion(predicted, features.labels)
    hinge = model.hinge_loss(features.vectors, features.labels)
    report = compute_report(cm, hinge=hinge)

    row = {
        "stage": "svm",
        "model": label or mpath.stem,
        "kernel": model.kernel.kind,
        "margin": model.margin,
        "accuracy": report.accuracy,
        "precision": report.precision,
        "sensitivity": report.sensitivity,
        "f_score": report.f_score,
        "hinge_loss": report.hinge,
    }
    report_path = out / "report.csv"
    write_report_csv([row], report_path)
    write_confusion_csv(cm, out / "confusion.csv")
    _say(
        "evaluate",
        f"accuracy={_p(report.accuracy)} precision={_p(report.precision)} "
        f"sensitivity={_p(report.sensitivity)} f_score={_p(report.f_score)} hinge={_p(report.hinge)}",
    )
    _say("evaluate", f"wrote {report_path} and {out / 'confusion.csv'}")
    return report_path


def _p(value) -> str:
    return "n/a" if value is None else f"{value:.4f}"


# ---------------------------------------------------------------------------
# subcommands

def cmd_ingest(args) -> int:
    config = resolve_config(args)
    _require(config, "root", "out")
    out = _out_dir(config)
    manifest = scan_directory(config.root, skip_bad=config.skip_bad)
    path = out / "manifest.csv"
    write_manifest_csv(manifest, path)
    n0, n1 = manifest.class_counts()
    _say("ingest", f"{len(manifest)} images: {manifest.class_names[0]}={n0}, {manifest.class_names[1]}={n1}")
    _say("ingest", f"wrote {path}")
    return EXIT_OK


def cmd_train_cnn(args) -> int:
    config = resolve_config(args)
    _train_cnn(config)
    return EXIT_OK


def cmd_extract(args) -> int:
    config = resolve_config(args)
    _extract(config, args.checkpoint, args.seed)
    return EXIT_OK


def cmd_train_svm(args) -> int:
    config = resolve_config(args)
    _train_svm_cmd(config, args.features)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = resolve_config(args)
    _evaluate(config, args.model, args.features, args.label)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = resolve_config(args)
    _require(config, "root", "out")
    out = _out_dir(config)

    manifest, train, test = _scan_and_split(config)
    write_manifest_csv(manifest, out / "manifest.csv")

    _train_cnn(config)
    _extract(config, None, None)
    _train_svm_cmd(config, None)

    # Assemble the two-stage report: the CNN test row plus the SVM row.
    net, _ = load_checkpoint(out / "model.hvgg")
    X_test, y_test = _load_arrays(test, config.side)
    logits = np.concatenate(
        [net.forward(X_test[lo : lo + config.batch]) for lo in range(0, len(X_test), config.batch)]
    )
    cnn_pred = _signed(logits.argmax(axis=1))
    cnn_report = compute_report(confusion(cnn_pred, _signed(y_test)))

    model = load_svm(out / "model.hsvm")
    features = read_features(out / "test.hfv")
    svm_pred = model.predict(features.vectors)
    cm = confusion(svm_pred, features.labels)
    svm_report = compute_report(cm, hinge=model.hinge_loss(features.vectors, features.labels))

    rows = [
        {
            "stage": "cnn",
            "model": config.variant,
            "kernel": "",
            "margin": "",
            "accuracy": cnn_report.accuracy,
            "precision": cnn_report.precision,
            "sensitivity": cnn_report.sensitivity,
            "f_score": cnn_report.f_score,
            "hinge_loss": None,
        },
        {
            "stage": "svm",
            "model": config.variant,
            "kernel": model.kernel.kind,
            "margin": model.margin,
            "accuracy": svm_report.accuracy,
            "precision": svm_report.precision,
            "sensitivity": svm_report.sensitivity,
            "f_score": svm_report.f_score,
            "hinge_loss": svm_report.hinge,
        },
    ]
    report_path = out / "report.csv"
    write_report_csv(rows, report_path)
    write_confusion_csv(cm, out / "confusion.csv")
    _say("pipeline", f"done; SVM test accuracy {_p(svm_report.accuracy)}; wrote {report_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--root", help="dataset root with two class subdirectories")
    parser.add_argument("--out", help="output directory for artifacts")
    parser.add_argument("--config", help="JSON config file; explicit flags win")
    parser.add_argument("--seed", type=int, help="seed threaded through split/init/shuffle")
    parser.add_argument("--skip-bad", dest="skip_bad", action="store_true", default=None,
                        help="skip undecodable images instead of failing")
    parser.add_argument("--dump-config", action="store_true",
                        help="print the resolved configuration as JSON and exit")


def _add_cnn(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--variant", choices=["vgg11", "vgg13", "vgg16", "vgg19"])
    parser.add_argument("--side", type=int, help="input image side length")
    parser.add_argument("--scale", type=float, help="channel scale in (0, 1]")
    parser.add_argument("--fraction", type=float, help="train fraction of the split")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--lr", type=float, help="learning rate")
    parser.add_argument("--batch", type=int, help="training batch size")
    parser.add_argument("--momentum", type=float)
    parser.add_argument("--desk-scale", dest="desk_scale", action="store_true", default=None,
                        help="preset: side=32, scale=1/8, epochs=20")


def _add_svm(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kernel", choices=["linear", "rbf"])
    parser.add_argument("--margin", choices=["soft", "hard"])
    parser.add_argument("--c", type=float, help="soft-margin penalty C")
    parser.add_argument("--gamma", type=float, help="RBF kernel width")
    parser.add_argument("--standardize", action="store_true", default=None,
                        help="z-score features with train statistics")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vggsvm",
        description="Two-stage image classification: VGG feature extraction + kernel SVM.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="scan a dataset tree and export its manifest")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-cnn", help="train the CNN and write checkpoint + training log")
    _add_common(p)
    _add_cnn(p)
    p.set_defaults(func=cmd_train_cnn)

    p = sub.add_parser("extract", help="export train/test feature files from a checkpoint")
    _add_common(p)
    p.add_argument("--checkpoint", help="checkpoint path (default: OUT/model.hvgg)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train-svm", help="train the kernel SVM on extracted features")
    _add_common(p)
    _add_svm(p)
    p.add_argument("--features", help="training feature file (default: OUT/train.hfv)")
    p.set_defaults(func=cmd_train_svm)

    p = sub.add_parser("evaluate", help="evaluate an SVM model on a feature file")
    _add_common(p)
    p.add_argument("--model", help="model path (default: OUT/model.hsvm)")
    p.add_argument("--features", help="feature file (default: OUT/test.hfv)")
    p.add_argument("--label", help="model column value in the report")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run all stages end to end")
    _add_common(p)
    _add_cnn(p)
    _add_svm(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    stage = args.command
    try:
        if getattr(args, "dump_config", False):
            print(resolve_config(args).to_json())
            return EXIT_OK
        return args.func(args)
    except _PRECONDITION_ERRORS as exc:
        print(f"{stage}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrainingDivergedError, RuntimeError, OSError) as exc:
        print(f"{stage}: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
