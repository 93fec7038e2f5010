"""Tweet normalization and special-token framing.

Normalization rules, applied in order:

1. URLs starting with ``http://``, ``https://`` or ``www.`` (any case) become ``HTTPURL``.
2. User mentions ``@handle`` become ``@USER``.
3. Runs of whitespace collapse to one space; leading/trailing whitespace is dropped.

Sub-word tokenization belongs to each encoder; this module only normalizes text
and wraps token lists with begin/end-of-sequence markers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

DEFAULT_MAX_LEN = 128

URL_RE = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
MENTION_RE = re.compile(r"@\w+")


def normalize(text: str) -> str:
    text = URL_RE.sub("HTTPURL", text)
    text = MENTION_RE.sub("@USER", text)
    return " ".join(text.split())


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(self.tokens) < 2:
            raise ValueError("a framed sequence holds at least the two boundary tokens")

    @property
    def n(self) -> int:
        return len(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def content(self) -> tuple:
        return self.tokens[1:-1]


def frame(tokens: Sequence[str], max_len: int, bos: str, eos: str) -> TokenSequence:
    """Return ``[bos] + tokens[:max_len - 2] + [eos]``."""
    if max_len < 2:
        raise ValueError(f"max_len must be at least 2, got {max_len}")
    return TokenSequence((bos, *tokens[: max_len - 2], eos))
