"""Paraphrase-probability scoring backends.

Three interchangeable routes: an embedding-cosine baseline, a trainable
lexical-feature logistic classifier, and a subprocess wire protocol so that
heavyweight pretrained detectors can plug in without being embedded here.
"""

import json
import logging
import math
import subprocess
import threading
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .pairgen import CandidatePair
from .textnorm import tokenize

logger = logging.getLogger(__name__)

FEATURE_NAMES = (
    "token_jaccard",
    "char3_cosine",
    "length_ratio",
    "digit_overlap",
    "lcs_ratio",
    "bias",
)


class ScorerError(Exception):
    pass


class Label3(str, Enum):
    NON = "non"
    NEAR = "near"
    PRECISE = "precise"


@dataclass(frozen=True)
class LabeledPair:
    """Annotated sentence pair; the binary label collapses near and precise
    paraphrases into one positive class."""

    a_text: str
    b_text: str
    label3: Label3

    @property
    def label2(self) -> bool:
        return self.label3 is not Label3.NON


# ---------------------------------------------------------------------------
# Embedding cosine baseline


@dataclass
class EmbeddingTable:
    vectors: dict[str, np.ndarray]
    dim: int

    @classmethod
    def load(cls, fh: Iterable[str]) -> "EmbeddingTable":
        """Read plain-text vectors: header "count dim", then one token and
        d decimals per line."""
        it = iter(fh)
        try:
            header = next(it)
        except StopIteration:
            raise ScorerError("empty embedding file")
        parts = header.split()
        if len(parts) != 2:
            raise ScorerError(f"bad embedding header: {header!r}")
        count, dim = int(parts[0]), int(parts[1])
        if dim <= 0:
            raise ScorerError(f"bad embedding dimension {dim}")
        vectors: dict[str, np.ndarray] = {}
        for line_no, line in enumerate(it, start=2):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split(" ")
            if len(fields) != dim + 1:
                raise ScorerError(
                    f"line {line_no}: expected {dim + 1} fields, got {len(fields)}"
                )
            vectors[fields[0]] = np.array([float(v) for v in fields[1:]],
                                          dtype=np.float64)
        if len(vectors) != count:
            logger.warning(
                "embedding header declared %d tokens, file has %d",
                count, len(vectors),
            )
        return cls(vectors=vectors, dim=dim)

    def save(self, fh: TextIO) -> None:
        fh.write(f"{len(self.vectors)} {self.dim}\n")
        for token, vec in self.vectors.items():
            fh.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def _mean_vector(tokens: Sequence[str], emb: EmbeddingTable) -> Optional[np.ndarray]:
    known = [emb.vectors[t] for t in tokens if t in emb.vectors]
    if not known:
        return None
    return np.mean(known, axis=0)


def cosine_score(pair: CandidatePair, emb: EmbeddingTable) -> float:
    """Cosine of the mean token vectors of each side, in [-1, 1].

    Tokens absent from the table are skipped; a side with zero known tokens
    scores the sentinel 0 with a coverage warning.
    """
    va = _mean_vector(tokenize(pair.a_text), emb)
    vb = _mean_vector(tokenize(pair.b_text), emb)
    if va is None or vb is None:
        logger.warning(
            "pair (%s, %s): no embedding coverage on one side, scoring 0",
            pair.a_id, pair.b_id,
        )
        return 0.0
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(va, vb) / (na * nb))


# ---------------------------------------------------------------------------
# Lexical features


def _char_ngrams(text: str, n: int = 3) -> Counter:
    joined = " ".join(tokenize(text))
    return Counter(joined[i : i + n] for i in range(len(joined) - n + 1))


def _counter_cosine(a: Counter, b: Counter) -> float:
    if not a or not b:
        return 0.0
    dot = sum(cnt * b[g] for g, cnt in a.items())
    na = math.sqrt(sum(c * c for c in a.values()))
    nb = math.sqrt(sum(c * c for c in b.values()))
    return dot / (na * nb)


def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[len(b)]


def _set_jaccard(a: set, b: set) -> float:
    if not a and not b:
        return 1.0
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def features_from_texts(a_text: str, b_text: str) -> np.ndarray:
    """Fixed-order surface-similarity vector, see FEATURE_NAMES.

    All features land in [0, 1]; the trailing bias term is constant 1.
    Empty text yields zero overlap features.
    """
    a_toks = tokenize(a_text)
    b_toks = tokenize(b_text)
    if not a_toks or not b_toks:
        return np.array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0], dtype=np.float64)
    a_set, b_set = set(a_toks), set(b_toks)

    jaccard = len(a_set & b_set) / len(a_set | b_set)
    length_ratio = min(len(a_toks), len(b_toks)) / max(len(a_toks), len(b_toks))
    char3 = _counter_cosine(_char_ngrams(a_text), _char_ngrams(b_text))
    digit_a = {t for t in a_toks if any(c.isdigit() for c in t)}
    digit_b = {t for t in b_toks if any(c.isdigit() for c in t)}
    digit_overlap = _set_jaccard(digit_a, digit_b)
    lcs_ratio = _lcs_len(a_toks, b_toks) / max(len(a_toks), len(b_toks))

    return np.array(
        [jaccard, char3, length_ratio, digit_overlap, lcs_ratio, 1.0],
        dtype=np.float64,
    )


def extract_features(pair: CandidatePair) -> np.ndarray:
    return features_from_texts(pair.a_text, pair.b_text)


# ---------------------------------------------------------------------------
# Logistic classifier


@dataclass
class ClassifierModel:
    weights: np.ndarray
    epochs: int
    learning_rate: float
    final_loss: float

    def save(self, fh: TextIO) -> None:
        json.dump(
            {
                "weights": [float(w) for w in self.weights],
                "epochs": self.epochs,
                "learning_rate": self.learning_rate,
                "final_loss": self.final_loss,
                "features": list(FEATURE_NAMES),
            },
            fh,
        )
        fh.write("\n")

    @classmethod
    def load(cls, fh: TextIO) -> "ClassifierModel":
        obj = json.load(fh)
        return cls(
            weights=np.array(obj["weights"], dtype=np.float64),
            epochs=obj["epochs"],
            learning_rate=obj["learning_rate"],
            final_loss=obj["final_loss"],
        )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


def train_classifier(
    data: Sequence[LabeledPair],
    epochs: int = 500,
    learning_rate: float = 0.1,
    seed: int = 0,
) -> ClassifierModel:
    """Full-batch gradient descent on the logistic cross-entropy.

    Weights start at zero, so the convex objective makes the outcome
    deterministic; the seed is accepted for interface symmetry with the
    other trainers but does not influence the result.
    """
    del seed
    if not data:
        raise ScorerError("no training data")
    labels = np.array([1.0 if p.label2 else 0.0 for p in data])
    if labels.min() == labels.max():
        raise ScorerError("degenerate label distribution: single class")
    x = np.stack([features_from_texts(p.a_text, p.b_text) for p in data])
    w = np.zeros(x.shape[1], dtype=np.float64)
    n = len(labels)
    loss = math.inf
    for _ in range(epochs):
        p = _sigmoid(x @ w)
        grad = x.T @ (p - labels) / n
        w -= learning_rate * grad
        eps = 1e-12
        loss = float(
            -np.mean(labels * np.log(p + eps) + (1 - labels) * np.log(1 - p + eps))
        )
    return ClassifierModel(
        weights=w, epochs=epochs, learning_rate=learning_rate, final_loss=loss
    )


def score_pair(model: ClassifierModel, pair: CandidatePair) -> float:
    """Sigmoid of weights . features, in [0, 1]."""
    if model.weights.shape[0] != len(FEATURE_NAMES):
        raise ScorerError(
            f"weight dimension {model.weights.shape[0]} != feature dimension "
            f"{len(FEATURE_NAMES)}"
        )
    return float(_sigmoid(model.weights @ extract_features(pair)))


# ---------------------------------------------------------------------------
# External scorer protocol


def external_score(
    pairs: Sequence[CandidatePair],
    command: Sequence[str],
    timeout: float = 120.0,
) -> dict[str, float]:
    """Score a batch through a child process speaking the line protocol.

    Requests go to the child's stdin as one JSON object per line
    ({"id", "a", "b"}), a blank line closes the batch, and responses come
    back as {"id", "prob"} lines in any order.  Every id must be answered
    with a probability in [0, 1].
    """
    ids = [f"{p.a_id}␟{p.b_id}" for p in pairs]
    if len(set(ids)) != len(ids):
        raise ScorerError("duplicate pair ids in batch")
    proc = subprocess.Popen(
        list(command),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        encoding="utf-8",
    )

    def feed() -> None:
        try:
            for pid, pair in zip(ids, pairs):
                proc.stdin.write(
                    json.dumps(
                        {"id": pid, "a": pair.a_text, "b": pair.b_text},
                        ensure_ascii=False,
                    )
                    + "\n"
                )
            proc.stdin.write("\n")
            proc.stdin.flush()
            proc.stdin.close()
        except BrokenPipeError:
            pass

    # Writes run on a thread so a child that answers as it reads cannot
    # deadlock both pipes.
    writer = threading.Thread(target=feed)
    writer.start()
    results: dict[str, float] = {}
    pending = set(ids)
    try:
        for line_no, line in enumerate(proc.stdout, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rid, prob = obj["id"], float(obj["prob"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise ScorerError(
                    f"malformed response line {line_no}: {line.rstrip()!r}"
                )
            if rid not in pending:
                raise ScorerError(
                    f"response line {line_no}: unknown or repeated id {rid!r}"
                )
            if not 0.0 <= prob <= 1.0:
                raise ScorerError(
                    f"response line {line_no}: probability {prob} outside [0, 1]"
                )
            pending.discard(rid)
            results[rid] = prob
            if not pending:
                break
    finally:
        writer.join(timeout=timeout)
        try:
            proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
    if pending:
        missing = ", ".join(sorted(pending)[:5])
        raise ScorerError(
            f"external scorer exited with {len(pending)} unanswered ids: {missing}"
        )
    return {rid: results[rid] for rid in ids}


def external_score_pairs(
    pairs: Sequence[CandidatePair],
    command: Sequence[str],
    timeout: float = 120.0,
) -> list[float]:
    """external_score, returned in request order."""
    by_id = external_score(pairs, command, timeout)
    return [by_id[f"{p.a_id}␟{p.b_id}"] for p in pairs]
