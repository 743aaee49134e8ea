"""Synthetic clustered-headline corpora with planted structure.

Real headline feeds are private, so every end-to-end test runs on corpora
generated here: event clusters with controllable paraphrase noise, graded
pair sets with a known similarity score, and a learnable rewrite rule for
generation experiments.
"""

import random
from dataclasses import dataclass
from typing import Optional

from .ingest import Headline
from .pairgen import CandidatePair

_SYLLABLES = [
    "ba", "ko", "ri", "mu", "ta", "ve", "zo", "li", "pa", "du",
    "ne", "sa", "go", "fi", "ru", "ke", "mo", "wa", "tu", "se",
    "la", "po", "di", "na", "vu", "che", "sto", "gra", "pre", "kli",
]


def _make_word(rng: random.Random) -> str:
    return "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 4)))


def build_vocab(size: int, seed: int, prefix: str = "") -> list[str]:
    rng = random.Random(seed)
    words: list[str] = []
    seen = set()
    while len(words) < size:
        w = prefix + _make_word(rng)
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


# ---------------------------------------------------------------------------
# Clustered headline corpus


def make_headline_corpus(
    n_clusters: int,
    cluster_size: int = 5,
    seed: int = 0,
    vocab_size: int = 400,
    unverified_rate: float = 0.05,
    reorder_rate: float = 0.08,
) -> list[Headline]:
    """Event clusters of headline variants around a base sentence.

    Each cluster rewrites one base sentence with varying fidelity; a small
    fraction of members are pure reorderings (token-identical pairs for the
    filter to drop) and a small fraction fail author verification.
    """
    rng = random.Random(seed)
    vocab = build_vocab(vocab_size, seed=seed * 31 + 7)
    sources = [f"outlet-{i}" for i in range(12)]
    headlines: list[Headline] = []
    for ci in range(n_clusters):
        base_len = rng.randint(5, 9)
        base = [rng.choice(vocab) for _ in range(base_len)]
        if rng.random() < 0.5:
            base[rng.randrange(base_len)] = str(rng.randint(2, 2030))
        members: list[list[str]] = []
        for mi in range(cluster_size):
            if mi == 0:
                words = list(base)
            elif members and rng.random() < reorder_rate:
                words = list(rng.choice(members))
                rng.shuffle(words)
            else:
                keep = rng.uniform(0.4, 1.0)
                words = [
                    w if rng.random() < keep else rng.choice(vocab)
                    for w in base
                ]
                if rng.random() < 0.3:
                    words.append(rng.choice(vocab))
            members.append(words)
            year = 2009 + (ci % 10)
            headlines.append(
                Headline(
                    id=f"h{ci:05d}x{mi:02d}",
                    text=" ".join(words),
                    cluster_id=f"c{ci:05d}",
                    timestamp=f"{year}-{1 + ci % 12:02d}-{1 + mi % 28:02d}",
                    source=rng.choice(sources),
                    author_verified=rng.random() >= unverified_rate,
                )
            )
    return headlines


# ---------------------------------------------------------------------------
# Graded pairs with a planted similarity score


@dataclass(frozen=True)
class GradedPair:
    a_text: str
    b_text: str
    planted: float


def graded_pairs(
    n: int,
    seed: int = 0,
    sentence_len: int = 8,
    vocab_size: int = 300,
    synonym_rate: float = 0.1,
) -> list[GradedPair]:
    """Pairs whose second side preserves a known fraction of the first.

    The planted score is the preserved-content fraction (synonym swaps
    preserve content while changing the surface form; random replacements
    do not).  Word order in the second side gets lightly shuffled so order-
    blind scorers lose some signal.
    """
    rng = random.Random(seed)
    vocab = build_vocab(vocab_size, seed=seed * 17 + 3)
    synonyms = {
        w: s for w, s in zip(vocab, build_vocab(vocab_size, seed=seed * 17 + 4, prefix="q"))
    }
    out: list[GradedPair] = []
    for i in range(n):
        a = [rng.choice(vocab) for _ in range(sentence_len)]
        if rng.random() < 0.4:
            a[rng.randrange(sentence_len)] = str(rng.randint(10, 9999))
        target = (i + 0.5) / n  # stratified over (0, 1)
        preserved = 0
        b: list[str] = []
        for w in a:
            if rng.random() < target:
                preserved += 1
                if not w.isdigit() and rng.random() < synonym_rate:
                    b.append(synonyms[w])
                else:
                    b.append(w)
            else:
                b.append(rng.choice(vocab))
        # Light local shuffle: swap two adjacent positions.
        if len(b) > 2 and rng.random() < 0.5:
            j = rng.randrange(len(b) - 1)
            b[j], b[j + 1] = b[j + 1], b[j]
        if rng.random() < 0.3:
            b = b[: rng.randint(max(2, sentence_len - 2), sentence_len)]
        out.append(
            GradedPair(
                a_text=" ".join(a),
                b_text=" ".join(b),
                planted=preserved / sentence_len,
            )
        )
    rng.shuffle(out)
    return out


def graded_to_candidates(pairs: list[GradedPair]) -> list[CandidatePair]:
    """Wrap graded pairs as one-pair-per-cluster candidates."""
    return [
        CandidatePair(
            a_id=f"g{i:06d}a",
            b_id=f"g{i:06d}b",
            a_text=p.a_text,
            b_text=p.b_text,
            cluster_id=f"gc{i:06d}",
        )
        for i, p in enumerate(pairs)
    ]


# ---------------------------------------------------------------------------
# Learnable rewrite corpus for generation experiments


@dataclass
class RewriteRule:
    """Deterministic paraphrase rule: rotate by two, map through synonyms."""

    synonyms: dict[str, str]
    rotation: int = 2

    def apply(self, words: list[str]) -> list[str]:
        rotated = words[self.rotation:] + words[: self.rotation]
        return [self.synonyms.get(w, w) for w in rotated]


def generation_corpus(
    n_pairs: int,
    seed: int = 0,
    vocab_size: int = 120,
    max_noise: float = 0.3,
) -> tuple[list[CandidatePair], RewriteRule]:
    """Ranked-ready pairs teaching one rewrite rule, decaying in quality.

    The pair at rank fraction f has its target corrupted with probability
    up to ``max_noise`` * f per token, and carries score 1 - realized
    corruption, so sorting by score puts clean examples first -- matching
    the shape of a probability-ranked paraphrase corpus.
    """
    rng = random.Random(seed)
    vocab = build_vocab(vocab_size, seed=seed * 13 + 1)
    rule = RewriteRule(
        synonyms={
            w: s
            for w, s in zip(vocab, build_vocab(vocab_size, seed=seed * 13 + 2, prefix="z"))
        }
    )
    junk = build_vocab(60, seed=seed * 13 + 5, prefix="x")
    pairs: list[CandidatePair] = []
    for i in range(n_pairs):
        length = rng.randint(5, 9)
        src = [rng.choice(vocab) for _ in range(length)]
        tgt = rule.apply(src)
        noise_level = max_noise * i / max(1, n_pairs - 1)
        corrupted = 0
        for j in range(len(tgt)):
            if rng.random() < noise_level:
                tgt[j] = rng.choice(junk)
                corrupted += 1
        score = 1.0 - corrupted / len(tgt)
        pairs.append(
            CandidatePair(
                a_id=f"s{i:06d}a",
                b_id=f"s{i:06d}b",
                a_text=" ".join(src),
                b_text=" ".join(tgt),
                cluster_id=f"sc{i:06d}",
                score=score,
            )
        )
    return pairs, rule


def generation_testset(
    n: int,
    rule: RewriteRule,
    seed: int = 10_000,
) -> tuple[list[str], list[str]]:
    """Held-out clean sources and their rule-derived references."""
    rng = random.Random(seed)
    vocab = sorted(rule.synonyms)
    sources: list[str] = []
    references: list[str] = []
    for _ in range(n):
        length = rng.randint(5, 9)
        src = [rng.choice(vocab) for _ in range(length)]
        sources.append(" ".join(src))
        references.append(" ".join(rule.apply(src)))
    return sources, references


# ---------------------------------------------------------------------------
# Deterministic pseudo-random embedding table (cosine baseline input)


def hash_embeddings(tokens: set[str], dim: int = 24, seed: int = 0):
    """Unit-norm Gaussian vector per token, seeded by the token itself.

    Stands in for a pretrained table: real tables encode distributional
    similarity, this one encodes none, which is exactly what the cosine
    baseline gets over an out-of-domain vocabulary.
    """
    import hashlib

    import numpy as np

    from .scorer import EmbeddingTable

    vectors: dict = {}
    for tok in sorted(tokens):
        digest = hashlib.sha256(f"{seed}:{tok}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        v = rng.standard_normal(dim)
        vectors[tok] = v / np.linalg.norm(v)
    return EmbeddingTable(vectors=vectors, dim=dim)
