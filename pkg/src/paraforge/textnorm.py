"""Shared text normalization.

One tokenizer for the whole pipeline: the token-identity filter, the lexical
features, and the generation metrics all normalize text the same way, so a
pair judged distinct during pair generation stays distinct under every
downstream comparison.
"""

import unicodedata


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize_text(text: str) -> str:
    """NFC-normalize, casefold, and collapse whitespace."""
    return " ".join(unicodedata.normalize("NFC", text).casefold().split())


def strip_edge_punct(token: str) -> str:
    """Strip punctuation from both ends; interior punctuation (hyphens,
    apostrophes) is kept so compounds survive."""
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Split normalized text into tokens with edge punctuation stripped.

    Tokens that are pure punctuation strip to nothing and are dropped.
    """
    tokens = []
    for raw in normalize_text(text).split():
        tok = strip_edge_punct(raw)
        if tok:
            tokens.append(tok)
    return tokens
