"""Quantitative evaluation: corpus BLEU, METEOR-lite, Fleiss kappa,
Pearson correlation, and human-preference tallies.

All metrics are pure functions over tokenized text or count matrices.
Tokenization is the shared pipeline tokenizer (case-fold, NFC,
edge-punctuation strip), so metric values line up with the pair filters.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .textnorm import tokenize

SIMILARITY_LEVELS = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)


class MetricError(Exception):
    pass


# ---------------------------------------------------------------------------
# BLEU


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def bleu(
    candidates: Sequence[str],
    references: Sequence[str],
    max_order: int = 4,
) -> float:
    """Corpus-level BLEU in [0, 100] against single references.

    Geometric mean of modified n-gram precisions (orders 1..max_order)
    times the brevity penalty.  Orders with zero matches get add-one
    smoothing on their match/total counts; exact orders are left alone, so
    a perfect candidate list still scores exactly 100.
    """
    if not candidates:
        raise MetricError("empty candidate list")
    if len(candidates) != len(references):
        raise MetricError(
            f"{len(candidates)} candidates vs {len(references)} references"
        )
    matches = [0] * max_order
    totals = [0] * max_order
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        c_toks = tokenize(cand)
        r_toks = tokenize(ref)
        cand_len += len(c_toks)
        ref_len += len(r_toks)
        for n in range(1, max_order + 1):
            c_counts = _ngram_counts(c_toks, n)
            r_counts = _ngram_counts(r_toks, n)
            totals[n - 1] += sum(c_counts.values())
            matches[n - 1] += sum(
                min(cnt, r_counts[g]) for g, cnt in c_counts.items()
            )
    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(max_order):
        m, t = matches[n], totals[n]
        if m == 0:
            m, t = m + 1, t + 1
        log_sum += math.log(m / t)
    precision_mean = math.exp(log_sum / max_order)
    if cand_len >= ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / cand_len)
    return 100.0 * bp * precision_mean


# ---------------------------------------------------------------------------
# METEOR-lite


def _min_chunks_alignment(cand: list[str], ref: list[str]) -> tuple[int, int]:
    """Best unigram alignment: maximize matches, then minimize chunks.

    Exact search over candidate positions with memoization.  Branching only
    happens on tokens duplicated within a sentence, so headline-length
    inputs stay cheap; pathological repetition degrades gracefully into a
    wider memo table.
    Returns (matches, chunks).
    """
    positions: dict[str, list[int]] = {}
    for j, tok in enumerate(ref):
        positions.setdefault(tok, []).append(j)

    memo: dict[tuple[int, int, int], tuple[int, int]] = {}

    def best(i: int, used: int, prev_j: int) -> tuple[int, int]:
        # Returns (-matches, chunks) for the candidate suffix from i.
        if i == len(cand):
            return (0, 0)
        state = (i, used, prev_j)
        if state in memo:
            return memo[state]
        # Skip candidate position i.
        result = best(i + 1, used, -1)
        for j in positions.get(cand[i], ()):
            if used & (1 << j):
                continue
            new_chunk = 0 if prev_j == j - 1 else 1
            neg_m, chunks = best(i + 1, used | (1 << j), j)
            cand_result = (neg_m - 1, chunks + new_chunk)
            if cand_result < result:
                result = cand_result
        memo[state] = result
        return result

    neg_m, chunks = best(0, 0, -1)
    return -neg_m, chunks


def meteor_lite(candidate: str, reference: str) -> float:
    """Reduced METEOR in [0, 100]: exact unigram matching after
    case-folding, no stemming or synonym stage.

    F = 10PR/(R+9P), fragmentation penalty 0.5*(chunks/m)^3; zero when no
    unigram matches.  Absolute values are not comparable to full METEOR.
    """
    c_toks = tokenize(candidate)
    r_toks = tokenize(reference)
    if not c_toks or not r_toks:
        return 0.0
    m, chunks = _min_chunks_alignment(c_toks, r_toks)
    if m == 0:
        return 0.0
    precision = m / len(c_toks)
    recall = m / len(r_toks)
    f_mean = 10.0 * precision * recall / (recall + 9.0 * precision)
    penalty = 0.5 * (chunks / m) ** 3
    return 100.0 * f_mean * (1.0 - penalty)


def meteor_lite_corpus(
    candidates: Sequence[str], references: Sequence[str]
) -> float:
    """Mean sentence-level METEOR-lite over a candidate/reference list."""
    if not candidates:
        raise MetricError("empty candidate list")
    if len(candidates) != len(references):
        raise MetricError(
            f"{len(candidates)} candidates vs {len(references)} references"
        )
    return sum(meteor_lite(c, r) for c, r in zip(candidates, references)) / len(
        candidates
    )


# ---------------------------------------------------------------------------
# Inter-annotator agreement


@dataclass
class JudgmentMatrix:
    """Items x categories count matrix with a constant per-item row sum."""

    rows: list[list[int]]
    categories: list[float]

    def n_annotators(self) -> int:
        if not self.rows:
            raise MetricError("empty judgment matrix")
        return sum(self.rows[0])

    def validate(self) -> None:
        if len(self.rows) < 2:
            raise MetricError("need at least 2 items")
        n = self.n_annotators()
        if n < 2:
            raise MetricError("need at least 2 annotators")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.categories):
                raise MetricError(f"row {i} has {len(row)} columns")
            if sum(row) != n:
                raise MetricError(
                    f"row {i} sums to {sum(row)}, expected {n}"
                )


class FleissResult(NamedTuple):
    kappa: float
    p_agree: float
    p_expected: float
    p_value: float


def fleiss_kappa(matrix: JudgmentMatrix) -> FleissResult:
    """Chance-corrected agreement for n annotators over N items.

    Expected agreement comes from the global category proportions.  The
    p-value uses the large-sample normal approximation for the kappa
    variance; it is reported, never used as a gate.
    """
    matrix.validate()
    rows = matrix.rows
    n_items = len(rows)
    n = matrix.n_annotators()
    k = len(matrix.categories)

    p_agree = sum(
        (sum(c * c for c in row) - n) / (n * (n - 1)) for row in rows
    ) / n_items
    col_totals = [sum(row[j] for row in rows) for j in range(k)]
    p_j = [t / (n_items * n) for t in col_totals]
    p_expected = sum(p * p for p in p_j)

    if p_expected >= 1.0 - 1e-15:
        if p_agree >= 1.0 - 1e-15:
            return FleissResult(1.0, p_agree, p_expected, 0.0)
        raise MetricError("degenerate distribution: all mass in one category")

    kappa = (p_agree - p_expected) / (1.0 - p_expected)

    sum_pq = sum(p * (1 - p) for p in p_j)
    sum_pq_qp = sum(p * (1 - p) * (1 - 2 * p) for p in p_j)
    var = (
        2.0
        / (n_items * n * (n - 1))
        * (sum_pq**2 - sum_pq_qp)
        / (sum_pq**2)
    )
    if var <= 0:
        p_value = 0.0
    else:
        z = kappa / math.sqrt(var)
        p_value = math.erfc(abs(z) / math.sqrt(2.0))
    return FleissResult(kappa, p_agree, p_expected, p_value)


# ---------------------------------------------------------------------------
# Pearson correlation


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation of two equal-length sequences."""
    if len(x) != len(y):
        raise MetricError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise MetricError("need at least 2 points")
    n = len(x)
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    dx = [v - mean_x for v in x]
    dy = [v - mean_y for v in y]
    var_x = sum(d * d for d in dx)
    var_y = sum(d * d for d in dy)
    if var_x == 0 or var_y == 0:
        raise MetricError("constant input")
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(var_x * var_y)


# ---------------------------------------------------------------------------
# Human preference


PREFERENCE_OPTIONS = ("human", "tie", "machine")


@dataclass
class PreferenceTally:
    human_pct: float
    tie_pct: float
    machine_pct: float
    machine_plus_tie: float
    counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "human_pct": self.human_pct,
            "tie_pct": self.tie_pct,
            "machine_pct": self.machine_pct,
            "machine_plus_tie": self.machine_plus_tie,
            "counts": dict(self.counts),
        }


def preference_tally(judgments: Iterable[str]) -> PreferenceTally:
    """Percentage per option to one decimal, plus the machine+tie sum."""
    counts = Counter()
    total = 0
    for j in judgments:
        if j not in PREFERENCE_OPTIONS:
            raise MetricError(
                f"illegal preference {j!r}, expected one of {PREFERENCE_OPTIONS}"
            )
        counts[j] += 1
        total += 1
    if total == 0:
        raise MetricError("no judgments")
    pct = {opt: round(100.0 * counts[opt] / total, 1) for opt in PREFERENCE_OPTIONS}
    return PreferenceTally(
        human_pct=pct["human"],
        tie_pct=pct["tie"],
        machine_pct=pct["machine"],
        machine_plus_tie=round(pct["tie"] + pct["machine"], 1),
        counts={opt: counts[opt] for opt in PREFERENCE_OPTIONS},
    )


# ---------------------------------------------------------------------------
# Aggregate report


@dataclass
class MetricReport:
    bleu: Optional[float] = None
    meteor: Optional[float] = None
    by_train_size: dict[str, dict[str, float]] = field(default_factory=dict)
    kappa: Optional[float] = None
    kappa_p_value: Optional[float] = None
    pearson_r: Optional[float] = None
    preference: Optional[PreferenceTally] = None

    def to_dict(self) -> dict:
        out: dict = {}
        if self.bleu is not None:
            out["bleu"] = self.bleu
        if self.meteor is not None:
            out["meteor"] = self.meteor
        if self.by_train_size:
            out["by_train_size"] = self.by_train_size
        if self.kappa is not None:
            out["kappa"] = self.kappa
            out["kappa_p_value"] = self.kappa_p_value
        if self.pearson_r is not None:
            out["pearson_r"] = self.pearson_r
        if self.preference is not None:
            out["preference"] = self.preference.to_dict()
        return out
