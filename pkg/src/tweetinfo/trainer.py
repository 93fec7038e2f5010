"""Fine-tuning with a learning-rate grid and best-epoch checkpoint selection.

Each learning rate starts from an identical copy of the initial classifier and
runs the full epoch budget (no early stopping, no schedule). After every epoch
the model is scored on the validation split; the selected checkpoint is the
(lr, epoch) pair with the highest dev F1 across the whole grid, ties going to
the earlier epoch and then to the smaller learning rate.

Output directory layout written by :func:`grid_search` when ``out_dir`` is given::

    out_dir/
      train.log              one "lr=<v> epoch=<k> loss=<x> dev_f1=<y>" line per epoch
      lr=<v>/checkpoint.npz  best epoch for that learning rate
      best/checkpoint.npz    globally selected checkpoint
      best/manifest.json     best_lr, best_epoch, dev_f1, ...
"""

from __future__ import annotations

import copy
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F

from tweetinfo.checkpoint import save_checkpoint
from tweetinfo.corpus import DatasetSplit, Label
from tweetinfo.errors import ConfigurationError, DivergedError
from tweetinfo.metrics import evaluate
from tweetinfo.model import TweetClassifier

log = logging.getLogger(__name__)

DEFAULT_LEARNING_RATES = (1e-5, 2e-5, 5e-5)
TOY_LR_MULTIPLIER = 200.0


class AdamW(torch.optim.Optimizer):
    """Adam with weight decay applied directly to the parameters.

    The decay step ``p <- p * (1 - lr * weight_decay)`` is kept out of the
    moment estimates, so it does not get rescaled by the adaptive denominator.
    """

    def __init__(self, params, lr=1e-3, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01):
        if lr <= 0:
            raise ValueError(f"learning rate must be positive, got {lr}")
        if weight_decay < 0:
            raise ValueError(f"weight decay must be non-negative, got {weight_decay}")
        super().__init__(params, dict(lr=lr, betas=betas, eps=eps, weight_decay=weight_decay))

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()
        for group in self.param_groups:
            lr, wd, eps = group["lr"], group["weight_decay"], group["eps"]
            beta1, beta2 = group["betas"]
            for p in group["params"]:
                if p.grad is None:
                    continue
                state = self.state[p]
                if not state:
                    state["step"] = 0
                    state["exp_avg"] = torch.zeros_like(p)
                    state["exp_avg_sq"] = torch.zeros_like(p)
                state["step"] += 1
                t = state["step"]
                m, v = state["exp_avg"], state["exp_avg_sq"]
                m.mul_(beta1).add_(p.grad, alpha=1 - beta1)
                v.mul_(beta2).addcmul_(p.grad, p.grad, value=1 - beta2)
                if wd:
                    p.mul_(1 - lr * wd)
                denom = (v.sqrt() / math.sqrt(1 - beta2 ** t)).add_(eps)
                p.addcdiv_(m, denom, value=-lr / (1 - beta1 ** t))
        return loss


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    learning_rates: tuple = DEFAULT_LEARNING_RATES
    epochs: int = 30
    weight_decay: float = 0.01
    seed: int = 0
    max_len: int = 128
    lr_multiplier: Optional[float] = None  # None: TOY_LR_MULTIPLIER for the toy encoder, 1 otherwise

    def __post_init__(self):
        object.__setattr__(self, "learning_rates", tuple(float(lr) for lr in self.learning_rates))
        if not self.learning_rates:
            raise ConfigurationError("learning_rates must not be empty")
        if any(not lr > 0 for lr in self.learning_rates):
            raise ConfigurationError(f"learning rates must be positive, got {self.learning_rates}")
        if len(set(self.learning_rates)) != len(self.learning_rates):
            raise ConfigurationError(f"duplicate learning rates in {self.learning_rates}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be at least 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be at least 1, got {self.epochs}")
        if self.weight_decay < 0:
            raise ConfigurationError(f"weight_decay must be non-negative, got {self.weight_decay}")
        if self.max_len < 2:
            raise ConfigurationError(f"max_len must be at least 2, got {self.max_len}")
        if self.lr_multiplier is not None and not self.lr_multiplier > 0:
            raise ConfigurationError(f"lr_multiplier must be positive, got {self.lr_multiplier}")

    def effective_lr(self, lr: float, model: TweetClassifier) -> float:
        mult = self.lr_multiplier
        if mult is None:
            mult = TOY_LR_MULTIPLIER if model.spec.is_toy else 1.0
        return lr * mult


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_f1: float
    steps: int  # optimization steps taken so far in this run


@dataclass
class LrRun:
    """History of one learning rate plus its best-epoch parameters."""

    lr: float
    history: list
    best_epoch: int
    best_dev_f1: float
    best_params: Optional[dict] = field(default=None, repr=False)
    checkpoint_path: Optional[Path] = None


@dataclass
class TrainResult:
    best_lr: float
    best_epoch: int
    best_dev_f1: float
    history: dict  # lr -> list[EpochRecord]
    best_params: dict = field(repr=False, default_factory=dict)
    best_checkpoint: Optional[Path] = None

    def manifest(self, **extra) -> dict:
        data = {
            "best_lr": self.best_lr,
            "best_epoch": self.best_epoch,
            "dev_f1": self.best_dev_f1,
            "history": {repr(lr): [asdict(r) for r in recs] for lr, recs in self.history.items()},
        }
        data.update(extra)
        return data


def format_log_line(lr: float, rec: EpochRecord) -> str:
    return f"lr={lr:g} epoch={rec.epoch} loss={rec.train_loss:.6f} dev_f1={rec.dev_f1:.4f}"


def epoch_order(n: int, seed: int, epoch: int) -> np.ndarray:
    """Shuffle order for one epoch; a pure function of (seed, epoch)."""
    return np.random.default_rng([seed, epoch]).permutation(n)


def select_best(histories: dict) -> tuple[float, int, float]:
    """Pick (lr, epoch, dev_f1) maximizing dev F1; ties: earlier epoch, then smaller lr."""
    best_key, best = None, None
    for lr, records in histories.items():
        for rec in records:
            key = (rec.dev_f1, -rec.epoch, -lr)
            if best_key is None or key > best_key:
                best_key, best = key, (lr, rec.epoch, rec.dev_f1)
    if best is None:
        raise ValueError("no epoch records to select from")
    return best


def dev_f1(model: TweetClassifier, split: DatasetSplit, batch_size: int) -> float:
    probs = model.predict_proba(split.texts, batch_size)
    pred = [Label.from_prob(y) for y in probs]
    return evaluate(split.labels, pred).f1


def _require_labeled(split: DatasetSplit, what: str) -> None:
    if not split.is_labeled:
        raise ValueError(f"{what} split must be fully labeled")


def train_one(config: TrainConfig, lr: float, train: DatasetSplit, valid: DatasetSplit,
              model: TweetClassifier, on_epoch=None) -> LrRun:
    """Train ``model`` in place for ``config.epochs`` epochs at grid rate ``lr``.

    Only the best-so-far parameter snapshot is retained. ``on_epoch(lr, record)``
    is called after each epoch.
    """
    if len(train) == 0:
        raise ValueError("training split is empty")
    if len(valid) == 0:
        raise ValueError("validation split is empty")
    if not lr > 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    _require_labeled(train, "training")
    _require_labeled(valid, "validation")

    torch.manual_seed(config.seed)
    optimizer = AdamW(model.parameters(), lr=config.effective_lr(lr, model),
                      weight_decay=config.weight_decay)
    texts = train.texts
    targets = torch.tensor([int(y) for y in train.labels], dtype=torch.float64)
    history, best_params, best_epoch, best_f1 = [], None, 0, -1.0
    step = 0
    for epoch in range(1, config.epochs + 1):
        model.train()
        order = epoch_order(len(texts), config.seed, epoch)
        total, count = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            ids, mask = model.batch_inputs([texts[i] for i in idx])
            logits = model(ids, mask)
            loss = F.binary_cross_entropy_with_logits(logits, targets[idx].to(logits.dtype))
            step += 1
            if not torch.isfinite(loss):
                raise DivergedError(f"non-finite loss at step {step} (epoch {epoch})", step=step)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item() * len(idx)
            count += len(idx)
        rec = EpochRecord(epoch, total / count, dev_f1(model, valid, config.batch_size), step)
        history.append(rec)
        if on_epoch is not None:
            on_epoch(lr, rec)
        if rec.dev_f1 > best_f1:
            best_f1, best_epoch, best_params = rec.dev_f1, epoch, model.get_params()
    return LrRun(lr, history, best_epoch, best_f1, best_params)


def grid_search(config: TrainConfig, train: DatasetSplit, valid: DatasetSplit,
                init: TweetClassifier, out_dir=None, extra_meta: Optional[dict] = None) -> TrainResult:
    """Run :func:`train_one` for every learning rate and select the global best.

    With ``out_dir``, each run's best checkpoint is written to disk and dropped
    from memory, so at most one snapshot per lr plus the global best is held.
    """
    out = Path(out_dir) if out_dir is not None else None
    log_file = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        log_file = open(out / "train.log", "w", encoding="utf-8")

    def on_epoch(lr, rec):
        line = format_log_line(lr, rec)
        log.info(line)
        if log_file is not None:
            log_file.write(line + "\n")
            log_file.flush()

    meta = {"seed": config.seed, **(extra_meta or {})}
    runs: dict = {}
    best_so_far: Optional[LrRun] = None
    try:
        for lr in config.learning_rates:
            model = copy.deepcopy(init)
            try:
                run = train_one(config, lr, train, valid, model, on_epoch=on_epoch)
            except DivergedError as err:
                raise DivergedError(f"lr={lr:g}: {err}", step=err.step) from err
            except ValueError as err:
                raise type(err)(f"lr={lr:g}: {err}") from err
            if out is not None:
                lr_dir = out / f"lr={lr:g}"
                lr_dir.mkdir(exist_ok=True)
                run.checkpoint_path = save_checkpoint(
                    lr_dir, init.spec, run.best_params,
                    {**meta, "lr": lr, "epoch": run.best_epoch, "dev_f1": run.best_dev_f1})
            runs[lr] = run
            best_lr, _, _ = select_best({k: r.history for k, r in runs.items()})
            if out is not None:
                # snapshots other than the current global best live on disk only
                for k, r in runs.items():
                    if k != best_lr:
                        r.best_params = None
            best_so_far = runs[best_lr]
    finally:
        if log_file is not None:
            log_file.close()

    histories = {lr: r.history for lr, r in runs.items()}
    best_lr, best_epoch, best_f1 = select_best(histories)
    assert best_so_far is not None and best_so_far.lr == best_lr and best_so_far.best_epoch == best_epoch
    result = TrainResult(best_lr, best_epoch, best_f1, histories, best_so_far.best_params)
    if out is not None:
        best_dir = out / "best"
        best_dir.mkdir(exist_ok=True)
        effective = config.effective_lr(best_lr, init)
        result.best_checkpoint = save_checkpoint(
            best_dir, init.spec, result.best_params,
            {**meta, "lr": best_lr, "epoch": best_epoch, "dev_f1": best_f1})
        manifest = result.manifest(effective_lr=effective, encoder=init.spec.name, **meta)
        _write_json(best_dir / "manifest.json", manifest)
    return result


def _write_json(path: Path, data: dict) -> None:
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)
