"""Command-line entry point: ``tweetinfo {stats,train,predict,ensemble,evaluate}``.

Training is driven by a flat ``key = value`` config file (``#`` starts a
comment). Relative paths are resolved against the config file's directory.

Keys::

    train, valid, output_dir            paths (train/valid required)
    encoder                             toy | bertweet | roberta-base | ... (default toy)
    hidden_dim, max_len, vocab_size     encoder shape (vocab_size: toy only)
    pretrained                          hub id or local path overriding the registry
    normalize                           true/false, @USER/HTTPURL rewriting
    batch_size, epochs, weight_decay    optimizer loop
    learning_rates                      comma-separated grid, e.g. 1e-5,2e-5,5e-5
    lr_multiplier                       grid scale (default 200 for toy, 1 otherwise)
    seed                                single source of randomness
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from tweetinfo import __version__
from tweetinfo.checkpoint import load_checkpoint
from tweetinfo.corpus import Label, compute_stats, load_split, read_predictions, write_predictions
from tweetinfo.ensemble import SCHEMES, combine_batch, read_probabilities, write_probabilities
from tweetinfo.errors import ConfigurationError, JoinError, TweetInfoError
from tweetinfo.metrics import evaluate
from tweetinfo.model import ENCODER_REGISTRY, EncoderSpec, build_classifier, to_prob_vector
from tweetinfo.preprocess import DEFAULT_MAX_LEN
from tweetinfo.trainer import DEFAULT_LEARNING_RATES, TrainConfig, grid_search

log = logging.getLogger("tweetinfo")


@dataclass
class RunConfig:
    train: Optional[Path] = None
    valid: Optional[Path] = None
    output_dir: Path = Path("runs")
    encoder: str = "toy"
    hidden_dim: Optional[int] = None
    max_len: int = DEFAULT_MAX_LEN
    vocab_size: int = 4096
    pretrained: Optional[str] = None
    normalize: bool = True
    batch_size: int = 32
    learning_rates: tuple = DEFAULT_LEARNING_RATES
    lr_multiplier: Optional[float] = None
    epochs: int = 30
    weight_decay: float = 0.01
    seed: int = 0

    def encoder_spec(self) -> EncoderSpec:
        if self.encoder == "toy":
            return EncoderSpec("toy", self.hidden_dim or 32, self.max_len, self.vocab_size, self.normalize)
        if self.encoder not in ENCODER_REGISTRY:
            raise ConfigurationError(f"unknown encoder {self.encoder!r}")
        kwargs = dict(max_len=self.max_len, normalize=self.normalize)
        if self.pretrained:
            kwargs["pretrained"] = self.pretrained
        spec = EncoderSpec.for_pretrained(self.encoder, **kwargs)
        if self.hidden_dim is not None and self.hidden_dim != spec.hidden_dim:
            spec = dataclasses.replace(spec, hidden_dim=self.hidden_dim)
        return spec

    def train_config(self) -> TrainConfig:
        return TrainConfig(batch_size=self.batch_size, learning_rates=self.learning_rates,
                           epochs=self.epochs, weight_decay=self.weight_decay, seed=self.seed,
                           max_len=self.max_len, lr_multiplier=self.lr_multiplier)

    def validate(self) -> None:
        for key in ("train", "valid"):
            path = getattr(self, key)
            if path is None:
                raise ConfigurationError(f"config key {key!r} is required")
            if not path.is_file():
                raise ConfigurationError(f"{key} file not found: {path}")
        self.encoder_spec()
        self.train_config()


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


_PARSERS = {
    "train": Path, "valid": Path, "output_dir": Path,
    "encoder": str.strip, "pretrained": str.strip,
    "hidden_dim": int, "max_len": int, "vocab_size": int, "batch_size": int, "epochs": int, "seed": int,
    "weight_decay": float, "lr_multiplier": float,
    "normalize": _parse_bool, "learning_rates": _parse_floats,
}


def parse_config(path) -> RunConfig:
    path = Path(path)
    values, unknown = {}, []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _PARSERS:
                unknown.append(key)
                continue
            try:
                values[key] = _PARSERS[key](value)
            except ValueError as err:
                raise ConfigurationError(f"{path}:{lineno}: bad value for {key!r}: {err}") from None
    if unknown:
        raise ConfigurationError(f"{path}: unknown config key(s): {', '.join(unknown)}")
    for key in ("train", "valid", "output_dir"):
        if key in values and not values[key].is_absolute():
            values[key] = path.parent / values[key]
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    stats = {}
    print("split\tINFORMATIVE\tUNINFORMATIVE\tunlabeled\ttotal")
    for path in args.paths:
        if not Path(path).is_file():
            raise FileNotFoundError(f"no such file: {path}")
        s = compute_stats(load_split(path, expect_labels=False))
        name = Path(path).name
        stats[name] = s
        print(f"{name}\t{s[Label.INFORMATIVE]}\t{s[Label.UNINFORMATIVE]}\t{s.unlabeled}\t{s.total}")
    if args.figure:
        from tweetinfo.plotting import plot_label_counts
        plot_label_counts(stats, args.figure)
    return 0


def cmd_train(args) -> int:
    cfg = parse_config(args.config)
    if args.output_dir:
        cfg.output_dir = Path(args.output_dir)
    cfg.validate()
    spec = cfg.encoder_spec()
    train = load_split(cfg.train, expect_labels=True, name="train")
    valid = load_split(cfg.valid, expect_labels=True, name="valid")
    init = build_classifier(spec, seed=cfg.seed)
    result = grid_search(cfg.train_config(), train, valid, init, out_dir=cfg.output_dir)
    if not args.no_figure:
        from tweetinfo.plotting import plot_training_curves
        plot_training_curves(result.history, cfg.output_dir / "curves.png", best=(result.best_lr, result.best_epoch))
    print(f"best_lr={result.best_lr:g} best_epoch={result.best_epoch} dev_f1={result.best_dev_f1:.4f}")
    print(f"checkpoint: {result.best_checkpoint}")
    return 0


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.checkpoint)
    clf = ckpt.build()
    split = load_split(args.input, expect_labels=False)
    probs = clf.predict_proba(split.texts, args.batch_size)
    write_predictions(split.ids, [Label.from_prob(y) for y in probs], args.output)
    if args.probs:
        write_probabilities(args.probs, split.ids, [to_prob_vector(y) for y in probs])
    return 0


def cmd_ensemble(args) -> int:
    tables = [read_probabilities(p) for p in args.prob_files]
    combined = combine_batch(tables, args.scheme)
    write_predictions([i for i, _ in combined], [y for _, y in combined], args.output)
    return 0


def join_on_id(gold_ids, gold_labels, pred_ids, pred_labels):
    pred = dict(zip(pred_ids, pred_labels))
    if len(pred) != len(pred_ids):
        raise JoinError("prediction file repeats an id")
    missing = [i for i in gold_ids if i not in pred]
    if missing:
        raise JoinError(f"prediction file is missing {len(missing)} gold id(s), first: {missing[0]!r}")
    extra = set(pred) - set(gold_ids)
    if extra:
        raise JoinError(f"prediction file has {len(extra)} id(s) not in gold, e.g. {sorted(extra)[0]!r}")
    return list(gold_labels), [pred[i] for i in gold_ids]


def cmd_evaluate(args) -> int:
    gold = load_split(args.gold, expect_labels=True, name="valid")
    pred_ids, pred_labels = read_predictions(args.pred)
    g, p = join_on_id(gold.ids, gold.labels, pred_ids, pred_labels)
    report = evaluate(g, p)
    print(report.to_json() if args.json else report.render())
    if args.report:
        Path(args.report).write_text(report.to_tsv(), encoding="utf-8")
    if args.figure:
        from tweetinfo.plotting import plot_confusion
        plot_confusion(report, args.figure)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tweetinfo", description="Informative COVID-19 tweet classification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-epoch progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="per-label counts of split files")
    p.add_argument("paths", nargs="+", help="tab-separated split files")
    p.add_argument("--figure", help="also write a bar chart to this image path")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("train", help="grid-search fine-tuning from a config file")
    p.add_argument("config", help="flat key = value config file")
    p.add_argument("--output-dir", help="override the config's output_dir")
    p.add_argument("--no-figure", action="store_true", help="skip writing curves.png")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="label a split with a trained checkpoint")
    p.add_argument("--checkpoint", required=True, help="checkpoint file or directory holding checkpoint.npz")
    p.add_argument("--input", required=True, help="split file (labels optional)")
    p.add_argument("--output", required=True, help="prediction file to write (id<TAB>LABEL)")
    p.add_argument("--probs", help="also write id<TAB>p_uninformative<TAB>p_informative here")
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("ensemble", help="combine per-model probability files")
    p.add_argument("prob_files", nargs="+", help="probability files written by 'predict --probs'")
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--output", required=True, help="prediction file to write")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("evaluate", help="positive-class P/R/F1 of a prediction file")
    p.add_argument("--gold", required=True, help="labeled split file")
    p.add_argument("--pred", required=True, help="prediction file (id<TAB>LABEL)")
    p.add_argument("--json", action="store_true", help="print the machine-readable report")
    p.add_argument("--report", help="also write a tab-separated report here")
    p.add_argument("--figure", help="also write a confusion-matrix image here")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (TweetInfoError, OSError, ValueError, ArithmeticError) as err:
        print(f"tweetinfo {args.command}: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
