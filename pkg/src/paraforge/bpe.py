"""Byte-pair encoding over character-level base symbols.

Merges are learned word-internally (an end-of-word marker keeps word
endings separable, which is where morphology-rich headlines benefit), and
the merge list order doubles as the merge priority at encode time.  Base
symbols are characters rather than raw bytes so Cyrillic text stays
readable while debugging; unseen characters fall back to UNK.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

logger = logging.getLogger(__name__)

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")
WORD_END = "</w>"
DEFAULT_VOCAB_SIZE = 8000
MIN_PAIR_COUNT = 2


class BpeError(Exception):
    pass


@dataclass
class BpeModel:
    """Ordered merge list plus the symbol vocabulary it produces."""

    merges: list[tuple[str, str]]
    vocab: dict[str, int]
    _ranks: dict[tuple[str, str], int] = field(init=False, repr=False)
    _id_to_symbol: dict[int, str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._ranks = {pair: i for i, pair in enumerate(self.merges)}
        self._id_to_symbol = {i: s for s, i in self.vocab.items()}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def save(self, fh: TextIO) -> None:
        """Plain text: header "bpe v1 <vocab_size>", merge lines
        "left right", then vocab lines "symbol id"."""
        fh.write(f"bpe v1 {len(self.vocab)}\n")
        for left, right in self.merges:
            fh.write(f"{left} {right}\n")
        for symbol, idx in sorted(self.vocab.items(), key=lambda kv: kv[1]):
            fh.write(f"{symbol} {idx}\n")

    @classmethod
    def load(cls, fh: Iterable[str]) -> "BpeModel":
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        if not lines or not lines[0].startswith("bpe v1 "):
            raise BpeError("not a bpe v1 model file")
        vocab_size = int(lines[0].split()[2])
        if len(lines) - 1 < vocab_size:
            raise BpeError(
                f"model file truncated: header declares {vocab_size} vocab"
                f" entries, {len(lines) - 1} lines follow"
            )
        # Symbols never contain spaces, so the vocab section is exactly the
        # last vocab_size lines and everything between is merges.
        merge_lines = lines[1 : len(lines) - vocab_size]
        vocab_lines = lines[len(lines) - vocab_size :]
        merges = []
        for ln in merge_lines:
            parts = ln.split(" ")
            if len(parts) != 2:
                raise BpeError(f"bad merge line: {ln!r}")
            merges.append((parts[0], parts[1]))
        vocab = {}
        for ln in vocab_lines:
            symbol, idx = ln.rsplit(" ", 1)
            vocab[symbol] = int(idx)
        return cls(merges=merges, vocab=vocab)


def _word_symbols(word: str) -> tuple[str, ...]:
    return tuple(word) + (WORD_END,)


def _count_words(corpus: Iterable[str]) -> Counter:
    words: Counter = Counter()
    for line in corpus:
        words.update(line.split())
    return words


def train_bpe(
    corpus: Iterable[str], target_vocab_size: int = DEFAULT_VOCAB_SIZE
) -> BpeModel:
    """Greedy merge training.

    Counts adjacent symbol pairs inside words, merges the most frequent
    (ties broken lexicographically on the symbol pair, so two runs on the
    same corpus agree), and stops at the target vocabulary size or when no
    pair occurs at least twice.
    """
    word_counts = _count_words(corpus)
    if not word_counts:
        raise BpeError("empty corpus")

    alphabet = sorted({ch for w in word_counts for ch in w} | {WORD_END})
    base_size = len(SPECIALS) + len(alphabet)
    if target_vocab_size <= base_size:
        raise BpeError(
            f"target vocab size {target_vocab_size} must exceed the base "
            f"alphabet plus specials ({base_size})"
        )

    vocab: dict[str, int] = {s: i for i, s in enumerate(SPECIALS)}
    for ch in alphabet:
        vocab[ch] = len(vocab)

    # Pair counts update incrementally: a merge only touches words that
    # contain the merged pair, which keeps training linear-ish instead of
    # re-scanning the corpus per merge.
    word_symbols: list[tuple[str, ...]] = []
    counts: list[int] = []
    for w, c in word_counts.items():
        word_symbols.append(_word_symbols(w))
        counts.append(c)

    pair_counts: Counter = Counter()
    pair_to_words: dict[tuple[str, str], set[int]] = {}
    for wi, symbols in enumerate(word_symbols):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += counts[wi]
            pair_to_words.setdefault(pair, set()).add(wi)

    merges: list[tuple[str, str]] = []
    while len(vocab) < target_vocab_size and pair_counts:
        (left, right), count = min(
            pair_counts.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1])
        )
        if count < MIN_PAIR_COUNT:
            logger.info(
                "stopping at vocab size %d: best pair occurs %d time(s)",
                len(vocab), count,
            )
            break
        merges.append((left, right))
        vocab[left + right] = len(vocab)

        for wi in sorted(pair_to_words.get((left, right), ())):
            old = word_symbols[wi]
            new = _merge_symbols(old, left, right)
            word_symbols[wi] = new
            c = counts[wi]
            for pair in zip(old, old[1:]):
                pair_counts[pair] -= c
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
                members = pair_to_words.get(pair)
                if members is not None:
                    members.discard(wi)
                    if not members:
                        del pair_to_words[pair]
            for pair in zip(new, new[1:]):
                pair_counts[pair] += c
                pair_to_words.setdefault(pair, set()).add(wi)
    return BpeModel(merges=merges, vocab=vocab)


def _merge_symbols(
    symbols: tuple[str, ...], left: str, right: str
) -> tuple[str, ...]:
    out = []
    i = 0
    while i < len(symbols):
        if (
            i + 1 < len(symbols)
            and symbols[i] == left
            and symbols[i + 1] == right
        ):
            out.append(left + right)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return tuple(out)


def _encode_word(model: BpeModel, word: str) -> list[int]:
    symbols = list(_word_symbols(word))
    ranks = model._ranks
    while len(symbols) > 1:
        best_rank = None
        best_i = -1
        for i in range(len(symbols) - 1):
            r = ranks.get((symbols[i], symbols[i + 1]))
            if r is not None and (best_rank is None or r < best_rank):
                best_rank, best_i = r, i
        if best_rank is None:
            break
        left, right = model.merges[best_rank]
        symbols = list(_merge_symbols(tuple(symbols), left, right))
        del best_i
    return [model.vocab.get(s, UNK) for s in symbols]


def encode(model: BpeModel, text: str) -> list[int]:
    """Token ids for whitespace-separated words; never fails on unseen
    input, unknown base symbols map to UNK."""
    ids: list[int] = []
    for word in text.split():
        ids.extend(_encode_word(model, word))
    return ids


def decode(model: BpeModel, ids: Sequence[int]) -> str:
    """Inverse of encode: concatenate symbols, restore spaces at word-end
    markers, drop PAD/BOS/EOS.  Unknown ids are an error."""
    parts: list[str] = []
    for i in ids:
        if i in (PAD, BOS, EOS):
            continue
        symbol = model._id_to_symbol.get(i)
        if symbol is None:
            raise BpeError(f"unknown token id {i}")
        parts.append(symbol)
    text = "".join(parts)
    return text.replace(WORD_END, " ").strip()
