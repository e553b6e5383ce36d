"""Shared lexical layer: tokenization, identifier extraction, similarity primitives.

Every module tokenizes code the same way so that scores, serializations and
metrics agree on token boundaries.  The tokenizer is language independent:
identifiers stay whole (camelCase / snake_case are NOT split), numbers stay
whole, and every other non-space character becomes its own token.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, Sequence

# Identifiers first so "foo_bar2" wins over single chars; then numeric
# literals; then any single non-space, non-word character.
_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|\d+(?:\.\d+)?|[^\sA-Za-z0-9_]")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Marker separating lines when a multi-line block is flattened to one
# token stream.  Never produced by the tokenizer itself (it is whitespace).
NEWLINE_TOKEN = "\n"


def tokenize(text: str) -> list[str]:
    """Split `text` into tokens.

    Args:
        text: arbitrary source text (one line or many).

    Returns:
        Token list; whitespace never appears in the output.
    """
    return _TOKEN_RE.findall(text)


def tokenize_lines(lines: Sequence[str]) -> list[str]:
    """Tokenize a block of lines into one stream with newline markers.

    A NEWLINE_TOKEN is placed *between* consecutive lines so the stream can
    be split back into per-line token runs.
    """
    out: list[str] = []
    for i, line in enumerate(lines):
        if i:
            out.append(NEWLINE_TOKEN)
        out.extend(tokenize(line))
    return out


def is_identifier(token: str) -> bool:
    return bool(_IDENT_RE.match(token))


def identifiers(tokens: Iterable[str]) -> set[str]:
    """Distinct identifier-shaped tokens in a token stream."""
    return {t for t in tokens if is_identifier(t)}


def overlap_coefficient(former_ids: set[str], latter_ids: set[str]) -> float:
    """|former ∩ latter| / |latter|, 0.0 when the latter side is empty."""
    if not latter_ids:
        return 0.0
    return len(former_ids & latter_ids) / len(latter_ids)


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Jaccard similarity over token sets; 1.0 when both are empty."""
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    union = len(sa | sb)
    return len(sa & sb) / union if union else 0.0


class TermVector:
    """L2-normalized term-frequency vector over the shared tokenizer."""

    __slots__ = ("counts", "norm")

    def __init__(self, tokens: Iterable[str]):
        self.counts = Counter(tokens)
        self.norm = math.sqrt(sum(c * c for c in self.counts.values()))

    def cosine(self, other: "TermVector") -> float:
        """Cosine similarity; 0.0 when either vector is all zero."""
        if self.norm == 0.0 or other.norm == 0.0:
            return 0.0
        small, large = self.counts, other.counts
        if len(small) > len(large):
            small, large = large, small
        dot = sum(c * large[t] for t, c in small.items() if t in large)
        return dot / (self.norm * other.norm)


def embed(tokens: Iterable[str]) -> TermVector:
    """Default embedder used by the semantic scorers."""
    return TermVector(tokens)
