"""Self-describing checkpoint archives.

A checkpoint is an uncompressed ``.npz`` archive (readable with ``numpy.load``). Every parameter array is
stored under its own key; the reserved key ``__meta__`` holds UTF-8 JSON with
``format_version``, the encoder spec and free-form metadata. Arrays are saved
verbatim, so a save/load cycle is bit-exact.
"""

from __future__ import annotations

import json
import os
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from tweetinfo.errors import CheckpointError, ConfigurationError
from tweetinfo.model import EncoderSpec, TweetClassifier, build_classifier

FORMAT_VERSION = 1
META_KEY = "__meta__"
CHECKPOINT_NAME = "checkpoint.npz"


@dataclass
class Checkpoint:
    spec: EncoderSpec
    params: dict
    meta: dict = field(default_factory=dict)

    def build(self, **pretrained_kwargs) -> TweetClassifier:
        clf = build_classifier(self.spec, **pretrained_kwargs)
        clf.set_params(self.params)
        return clf


def save_checkpoint(path, spec: EncoderSpec, params: Mapping[str, np.ndarray], meta: Optional[dict] = None) -> Path:
    """Write atomically: the archive goes to a temporary sibling, then is renamed."""
    path = Path(path)
    if path.is_dir():
        path = path / CHECKPOINT_NAME
    if META_KEY in params:
        raise ValueError(f"parameter name {META_KEY!r} is reserved")
    header = {"format_version": FORMAT_VERSION, "spec": spec.to_dict(), "meta": meta or {}}
    blob = np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    arrays = {name: np.asarray(value) for name, value in params.items()}
    tmp = path.with_name(f".{path.name}.tmp")
    with zipfile.ZipFile(tmp, "w", zipfile.ZIP_STORED, allowZip64=True) as zf:
        for name, value in [(META_KEY, blob), *sorted(arrays.items())]:
            # fixed timestamp: identical parameters give identical bytes
            info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
            with zf.open(info, "w", force_zip64=True) as member:
                np.lib.format.write_array(member, value, allow_pickle=False)
    os.replace(tmp, path)
    return path


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if path.is_dir():
        path = path / CHECKPOINT_NAME
    try:
        with np.load(path, allow_pickle=False) as archive:
            if META_KEY not in archive.files:
                raise CheckpointError(f"{path}: not a checkpoint (no {META_KEY} record)")
            header = json.loads(archive[META_KEY].tobytes().decode("utf-8"))
            params = {name: archive[name] for name in archive.files if name != META_KEY}
    except CheckpointError:
        raise
    except (zipfile.BadZipFile, ValueError, KeyError, EOFError, TypeError, AttributeError) as err:
        raise CheckpointError(
            f"{path}: corrupted checkpoint, cannot read format_version (expected {FORMAT_VERSION}): {err}") from None
    version = header.get("format_version") if isinstance(header, dict) else None
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format_version {version!r} (expected {FORMAT_VERSION})")
    try:
        spec = EncoderSpec.from_dict(header["spec"])
    except (KeyError, ConfigurationError) as err:
        raise CheckpointError(f"{path}: invalid encoder spec in checkpoint: {err}") from None
    return Checkpoint(spec, params, header.get("meta", {}))


def save_classifier(path, clf: TweetClassifier, meta: Optional[dict] = None) -> Path:
    return save_checkpoint(path, clf.spec, clf.get_params(), meta)
