"""Contextual encoders, first-token pooling and the sigmoid classification head.

A classifier is an encoder producing one vector per framed token plus a linear
head reading the first (begin-of-sequence) vector::

    y = sigmoid(w . h1 + b)

Two encoder families share one interface (``tokenize``, ``bos``/``eos``,
``token_ids``, ``forward(ids, mask)``):

* :class:`ToyEncoder`, a hashed-vocabulary embedding with sinusoidal positions
  and a single self-attention block, small enough for CPU tests;
* :class:`PretrainedEncoder`, an adapter over a ``transformers`` model, used for
  the registry names other than ``toy``. ``transformers`` is only imported when
  such an encoder is requested.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import asdict, dataclass
from typing import Mapping, Optional, Sequence

import numpy as np
import torch
from torch import nn

from tweetinfo.errors import ConfigurationError
from tweetinfo.preprocess import DEFAULT_MAX_LEN, TokenSequence, frame, normalize

# registry name -> (hub id, hidden size); None marks the built-in toy encoder
ENCODER_REGISTRY = {
    "toy": None,
    "bertweet": ("vinai/bertweet-base", 768),
    "roberta-base": ("roberta-base", 768),
    "roberta-large": ("roberta-large", 1024),
    "xlm-roberta-base": ("xlm-roberta-base", 768),
    "xlm-roberta-large": ("xlm-roberta-large", 1024),
    "electra-base": ("google/electra-base-discriminator", 768),
    "electra-large": ("google/electra-large-discriminator", 1024),
}

TOY_SPECIALS = ("<pad>", "<s>", "</s>")
PAD_ID, BOS_ID, EOS_ID = 0, 1, 2

# Outputs of sigmoid() stay inside the open unit interval.
_PROB_FLOOR = np.finfo(np.float64).tiny
_PROB_CEIL = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class EncoderSpec:
    name: str = "toy"
    hidden_dim: int = 32
    max_len: int = DEFAULT_MAX_LEN
    vocab_size: int = 4096
    normalize: bool = True
    pretrained: Optional[str] = None

    def __post_init__(self):
        if self.name not in ENCODER_REGISTRY:
            raise ConfigurationError(
                f"unknown encoder {self.name!r}; choose from {', '.join(ENCODER_REGISTRY)}")
        if self.hidden_dim < 1:
            raise ConfigurationError(f"hidden_dim must be positive, got {self.hidden_dim}")
        if self.max_len < 2:
            raise ConfigurationError(f"max_len must be at least 2, got {self.max_len}")
        if self.name == "toy" and self.vocab_size <= len(TOY_SPECIALS):
            raise ConfigurationError(f"vocab_size must exceed {len(TOY_SPECIALS)}, got {self.vocab_size}")

    @classmethod
    def for_pretrained(cls, name: str, **kwargs) -> "EncoderSpec":
        if ENCODER_REGISTRY.get(name) is None:
            raise ConfigurationError(f"{name!r} is not a pretrained encoder")
        hub_id, hidden = ENCODER_REGISTRY[name]
        kwargs.setdefault("pretrained", hub_id)
        return cls(name=name, hidden_dim=hidden, **kwargs)

    @property
    def is_toy(self) -> bool:
        return self.name == "toy"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping) -> "EncoderSpec":
        try:
            return cls(**data)
        except TypeError as err:
            raise ConfigurationError(f"invalid encoder spec: {err}") from None


def sinusoidal_positions(max_len: int, dim: int) -> torch.Tensor:
    position = torch.arange(max_len, dtype=torch.float64).unsqueeze(1)
    freq = torch.exp(torch.arange(0, dim, 2, dtype=torch.float64) * (-math.log(10000.0) / dim))
    table = torch.zeros(max_len, dim, dtype=torch.float64)
    table[:, 0::2] = torch.sin(position * freq)
    table[:, 1::2] = torch.cos(position * freq)[:, : dim // 2]
    return table


class ToyEncoder(nn.Module):
    """Hashed embeddings + sinusoidal positions + one residual self-attention block."""

    bos = TOY_SPECIALS[BOS_ID]
    eos = TOY_SPECIALS[EOS_ID]
    pad_id = PAD_ID

    def __init__(self, spec: EncoderSpec, generator: Optional[torch.Generator] = None):
        super().__init__()
        self.spec = spec
        d, v = spec.hidden_dim, spec.vocab_size
        scale = d ** -0.5

        def init(*shape, std):
            return nn.Parameter(torch.randn(*shape, generator=generator, dtype=torch.float64) * std)

        self.embedding = init(v, d, std=scale)
        self.query = init(d, d, std=scale)
        self.key = init(d, d, std=scale)
        self.value = init(d, d, std=scale)
        self.output = init(d, d, std=scale)
        self.register_buffer("positions", sinusoidal_positions(spec.max_len, d), persistent=False)

    @staticmethod
    def tokenize(text: str) -> list[str]:
        return text.lower().split()

    def token_id(self, token: str) -> int:
        if token in TOY_SPECIALS:
            return TOY_SPECIALS.index(token)
        n_hashed = self.spec.vocab_size - len(TOY_SPECIALS)
        return len(TOY_SPECIALS) + zlib.crc32(token.encode("utf-8")) % n_hashed

    def token_ids(self, seq: TokenSequence) -> list[int]:
        return [self.token_id(tok) for tok in seq]

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Map ``(batch, n)`` ids and a 0/1 key mask to ``(batch, n, d)`` vectors."""
        n = ids.shape[1]
        x = self.embedding[ids] + self.positions[:n]
        q, k, v = x @ self.query, x @ self.key, x @ self.value
        scores = (q @ k.transpose(1, 2)) / math.sqrt(self.spec.hidden_dim)
        scores = scores.masked_fill(~mask.bool().unsqueeze(1), float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        return x + (attn @ v) @ self.output

    def load_params(self, params: Mapping[str, np.ndarray]) -> None:
        d, v = self.spec.hidden_dim, self.spec.vocab_size
        expected = {"embedding": (v, d), "query": (d, d), "key": (d, d), "value": (d, d), "output": (d, d)}
        missing = sorted(set(expected) - set(params))
        if missing:
            raise ConfigurationError(f"toy encoder parameters missing: {', '.join(missing)}")
        for name, shape in expected.items():
            got = tuple(np.shape(params[name]))
            if got != shape:
                raise ConfigurationError(f"parameter {name!r} has shape {got}, expected {shape} for hidden_dim={d}")
        with torch.no_grad():
            for name in expected:
                getattr(self, name).copy_(torch.as_tensor(np.asarray(params[name], dtype=np.float64)))


class PretrainedEncoder(nn.Module):
    """Adapter exposing a ``transformers`` encoder through the toy-encoder interface."""

    def __init__(self, spec: EncoderSpec, tokenizer, model):
        super().__init__()
        self.spec = spec
        self.tokenizer = tokenizer
        self.model = model
        hidden = getattr(model.config, "hidden_size", None)
        if hidden is not None and hidden != spec.hidden_dim:
            raise ConfigurationError(
                f"encoder {spec.name!r} emits {hidden}-dim vectors but spec says {spec.hidden_dim}")
        self.bos = tokenizer.cls_token or tokenizer.bos_token
        self.eos = tokenizer.sep_token or tokenizer.eos_token
        if self.bos is None or self.eos is None:
            raise ConfigurationError(f"tokenizer for {spec.name!r} lacks boundary tokens")
        self.pad_id = tokenizer.pad_token_id if tokenizer.pad_token_id is not None else 0

    @classmethod
    def from_pretrained(cls, spec: EncoderSpec, **kwargs) -> "PretrainedEncoder":
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as err:
            raise ConfigurationError(
                f"encoder {spec.name!r} needs the optional 'transformers' package") from err
        source = spec.pretrained or ENCODER_REGISTRY[spec.name][0]
        try:
            tokenizer = AutoTokenizer.from_pretrained(source, **kwargs)
            model = AutoModel.from_pretrained(source, **kwargs)
        except (OSError, ValueError) as err:
            raise ConfigurationError(f"cannot load pretrained encoder {source!r}: {err}") from err
        return cls(spec, tokenizer, model)

    def tokenize(self, text: str) -> list[str]:
        return self.tokenizer.tokenize(text)

    def token_ids(self, seq: TokenSequence) -> list[int]:
        return self.tokenizer.convert_tokens_to_ids(list(seq))

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        return self.model(input_ids=ids, attention_mask=mask).last_hidden_state


class ClassifierHead(nn.Module):
    """Linear map of the pooled vector to one logit; ``weight`` is the single row of W."""

    def __init__(self, dim: int, dtype=torch.float64):
        super().__init__()
        self.weight = nn.Parameter(torch.zeros(dim, dtype=dtype))
        self.bias = nn.Parameter(torch.zeros((), dtype=dtype))

    def forward(self, h1: torch.Tensor) -> torch.Tensor:
        return h1 @ self.weight + self.bias


class TweetClassifier(nn.Module):
    def __init__(self, spec: EncoderSpec, encoder: nn.Module):
        super().__init__()
        self.spec = spec
        self.encoder = encoder
        dtype = next(encoder.parameters()).dtype
        self.head = ClassifierHead(spec.hidden_dim, dtype=dtype)

    def frame_text(self, text: str) -> TokenSequence:
        if self.spec.normalize:
            text = normalize(text)
        return frame(self.encoder.tokenize(text), self.spec.max_len, self.encoder.bos, self.encoder.eos)

    def batch_inputs(self, texts: Sequence[str]) -> tuple[torch.Tensor, torch.Tensor]:
        """Frame, map to ids and right-pad a batch of raw texts."""
        rows = [self.encoder.token_ids(self.frame_text(t)) for t in texts]
        width = max(len(r) for r in rows)
        ids = torch.full((len(rows), width), self.encoder.pad_id, dtype=torch.long)
        mask = torch.zeros((len(rows), width), dtype=torch.long)
        for i, row in enumerate(rows):
            ids[i, : len(row)] = torch.as_tensor(row, dtype=torch.long)
            mask[i, : len(row)] = 1
        return ids, mask

    def forward(self, ids: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """Return one logit per example."""
        hidden = self.encoder(ids, mask)
        return self.head(hidden[:, 0])

    def linear_head(self) -> "LinearHead":
        return LinearHead(self.head.weight.detach().cpu().numpy().astype(np.float64).copy(),
                          float(self.head.bias.detach()))

    def get_params(self) -> dict[str, np.ndarray]:
        return {k: v.detach().cpu().numpy().copy() for k, v in self.state_dict().items()}

    def set_params(self, params: Mapping[str, np.ndarray]) -> None:
        state = self.state_dict()
        unknown = sorted(set(params) - set(state))
        missing = sorted(set(state) - set(params))
        if unknown or missing:
            raise ConfigurationError(
                f"parameter set does not match encoder {self.spec.name!r}"
                f" (missing: {missing[:5]}, unexpected: {unknown[:5]})")
        for key, value in params.items():
            if tuple(np.shape(value)) != tuple(state[key].shape):
                raise ConfigurationError(
                    f"parameter {key!r} has shape {tuple(np.shape(value))}, expected {tuple(state[key].shape)}")
        self.load_state_dict({k: torch.as_tensor(np.asarray(v)) for k, v in params.items()})

    @torch.no_grad()
    def predict_proba(self, texts: Sequence[str], batch_size: int = 32) -> np.ndarray:
        """Probability of INFORMATIVE for each text, evaluated without dropout."""
        was_training = self.training
        self.eval()
        out = []
        try:
            for start in range(0, len(texts), batch_size):
                ids, mask = self.batch_inputs(texts[start : start + batch_size])
                out.append(self(ids, mask).double().cpu().numpy())
        finally:
            self.train(was_training)
        if not out:
            return np.zeros(0)
        return sigmoid(np.concatenate(out))


def build_encoder(spec: EncoderSpec, seed: int = 0, **pretrained_kwargs) -> nn.Module:
    if spec.is_toy:
        return ToyEncoder(spec, generator=torch.Generator().manual_seed(seed))
    return PretrainedEncoder.from_pretrained(spec, **pretrained_kwargs)


def build_classifier(spec: EncoderSpec, seed: int = 0, **pretrained_kwargs) -> TweetClassifier:
    """Fresh classifier; toy weights and the head initialization are drawn from ``seed``."""
    torch.manual_seed(seed)
    clf = TweetClassifier(spec, build_encoder(spec, seed, **pretrained_kwargs))
    gen = torch.Generator().manual_seed(seed + 1)
    with torch.no_grad():
        w = torch.randn(spec.hidden_dim, generator=gen, dtype=torch.float64) * 0.02
        clf.head.weight.copy_(w.to(clf.head.weight.dtype))
    return clf


# ---------------------------------------------------------------------------
# Single-sequence operations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearHead:
    weight: np.ndarray
    bias: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError(f"head weight must be a vector, got shape {w.shape}")
        if not (np.all(np.isfinite(w)) and math.isfinite(self.bias)):
            raise ValueError("head parameters must be finite")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", float(self.bias))


def sigmoid(z):
    """Overflow-free logistic function, clamped to the open interval (0, 1)."""
    z = np.asarray(z, dtype=np.float64)
    ez = np.exp(-np.abs(z))
    y = np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))
    y = np.clip(y, _PROB_FLOOR, _PROB_CEIL)
    return y if y.ndim else float(y)


def encode(spec: EncoderSpec, seq: TokenSequence, params) -> np.ndarray:
    """Contextual vectors ``(n, d)`` for one framed sequence.

    ``params`` is either a mapping of toy-encoder arrays (validated against
    ``spec``) or an already-built encoder module.
    """
    if isinstance(params, nn.Module):
        encoder = params
    elif spec.is_toy:
        encoder = ToyEncoder(spec)
        encoder.load_params(params)
    else:
        raise ConfigurationError(f"encoder {spec.name!r} needs a loaded module, not a parameter mapping")
    if seq.n > spec.max_len:
        raise ValueError(f"sequence of length {seq.n} exceeds max_len={spec.max_len}")
    was_training = encoder.training
    encoder.eval()
    try:
        with torch.no_grad():
            ids = torch.as_tensor([encoder.token_ids(seq)], dtype=torch.long)
            out = encoder(ids, torch.ones_like(ids))
    finally:
        encoder.train(was_training)
    return out[0].double().cpu().numpy()


def pool_first(enc) -> np.ndarray:
    enc = np.asarray(enc, dtype=np.float64)
    if enc.ndim != 2 or enc.shape[0] == 0:
        raise ValueError("cannot pool an empty encoding")
    return enc[0]


def head_prob(head: LinearHead, h1) -> float:
    h1 = np.asarray(h1, dtype=np.float64)
    if h1.shape != head.weight.shape:
        raise ValueError(f"pooled vector has shape {h1.shape}, head expects {head.weight.shape}")
    if not np.all(np.isfinite(h1)):
        raise ValueError("pooled vector contains non-finite values")
    return sigmoid(float(head.weight @ h1) + head.bias)


def to_prob_vector(y: float) -> np.ndarray:
    """``[P(UNINFORMATIVE), P(INFORMATIVE)]`` from the head's scalar output."""
    if not 0.0 < y < 1.0:
        raise ValueError(f"probability must lie strictly between 0 and 1, got {y!r}")
    return np.array([1.0 - y, y])
