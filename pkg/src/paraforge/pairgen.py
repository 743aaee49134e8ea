"""Within-cluster pair generation, token-identity filtering, and
large-scale deduplication.

This stage is the quadratic part of the pipeline: a cluster of k headlines
yields C(k,2) candidate pairs, so everything here streams and nothing holds
the full pair set in memory unless it fits.
"""

import heapq
import json
import logging
import tempfile
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, TextIO

from .ingest import ClusterSet, Headline
from .textnorm import tokenize

logger = logging.getLogger(__name__)


class DedupError(Exception):
    """Disk-spill I/O failure; output past the marker is incomplete."""


@dataclass(frozen=True)
class CandidatePair:
    """Two headlines from one cluster, canonically ordered by id."""

    a_id: str
    b_id: str
    a_text: str
    b_text: str
    cluster_id: str
    score: Optional[float] = None

    def key(self) -> tuple[str, str]:
        return (self.a_id, self.b_id)

    def to_record(self) -> dict:
        rec = {
            "a_id": self.a_id,
            "b_id": self.b_id,
            "a_text": self.a_text,
            "b_text": self.b_text,
            "cluster_id": self.cluster_id,
        }
        if self.score is not None:
            rec["score"] = self.score
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "CandidatePair":
        return cls(
            a_id=rec["a_id"],
            b_id=rec["b_id"],
            a_text=rec["a_text"],
            b_text=rec["b_text"],
            cluster_id=rec["cluster_id"],
            score=rec.get("score"),
        )


def is_token_identical(a: str, b: str) -> bool:
    """True iff the normalized token multisets of a and b are equal."""
    return Counter(tokenize(a)) == Counter(tokenize(b))


def make_pair(a: Headline, b: Headline) -> CandidatePair:
    if a.id > b.id:
        a, b = b, a
    return CandidatePair(
        a_id=a.id, b_id=b.id, a_text=a.text, b_text=b.text,
        cluster_id=a.cluster_id,
    )


def build_pairs(
    cluster: list[Headline], drop_token_identical: bool = True
) -> Iterator[CandidatePair]:
    """Emit all C(k,2) canonically ordered pairs of one cluster.

    Token-identical pairs are dropped unless ``drop_token_identical`` is
    False (used by counting oracles that want the raw combinations).
    """
    for i in range(len(cluster)):
        for j in range(i + 1, len(cluster)):
            pair = make_pair(cluster[i], cluster[j])
            if drop_token_identical and is_token_identical(
                pair.a_text, pair.b_text
            ):
                continue
            yield pair


def pairs_from_clusters(
    clusters: ClusterSet,
    max_cluster_size: Optional[int] = None,
    drop_token_identical: bool = True,
) -> Iterator[CandidatePair]:
    """Stream pairs over all clusters.

    ``max_cluster_size`` truncates oversized clusters (input order) before
    pairing; C(k,2) blows up quadratically on viral events.
    """
    for members in clusters.clusters.values():
        if max_cluster_size is not None and len(members) > max_cluster_size:
            members = members[:max_cluster_size]
        yield from build_pairs(members, drop_token_identical)


def _pair_cost(pair: CandidatePair) -> int:
    # Rough per-entry footprint of the in-memory dedup dict: key strings,
    # stored record, and container overhead.
    return (
        len(pair.a_id) + len(pair.b_id)
        + len(pair.a_text) + len(pair.b_text)
        + len(pair.cluster_id) + 200
    )


def _spill_run(entries: dict, runs: list) -> None:
    try:
        f = tempfile.TemporaryFile(mode="w+", encoding="utf-8")
        for key in sorted(entries):
            rec = entries[key].to_record()
            f.write(json.dumps([key[0], key[1], rec], ensure_ascii=False))
            f.write("\n")
        f.flush()
        runs.append(f)
    except OSError as e:
        raise DedupError(f"spill to disk failed: {e}") from e


def _read_run(f) -> Iterator[tuple[tuple[str, str], dict]]:
    f.seek(0)
    for line in f:
        a_id, b_id, rec = json.loads(line)
        yield (a_id, b_id), rec


def dedup_pairs(
    pairs: Iterable[CandidatePair],
    memory_budget: Optional[int] = None,
) -> Iterator[CandidatePair]:
    """Emit each unordered (a_id, b_id) exactly once.

    Dedup key is the id pair, not a text hash: equal-text headlines inside
    one cluster were already removed by the token-identity filter.  When the
    in-memory set outgrows ``memory_budget`` bytes, sorted runs spill to
    disk and a merge pass finishes the job (output order then changes, the
    pair set does not).
    """
    entries: dict[tuple[str, str], CandidatePair] = {}
    runs: list = []
    used = 0
    for pair in pairs:
        key = pair.key()
        if key in entries:
            continue
        entries[key] = pair
        used += _pair_cost(pair)
        if memory_budget is not None and used > memory_budget:
            _spill_run(entries, runs)
            entries = {}
            used = 0

    if not runs:
        yield from entries.values()
        return

    if entries:
        _spill_run(entries, runs)
    logger.info("dedup merging %d spilled runs", len(runs))
    try:
        merged = heapq.merge(*(_read_run(f) for f in runs), key=lambda kv: kv[0])
        last_key = None
        for key, rec in merged:
            if key == last_key:
                continue
            last_key = key
            yield CandidatePair.from_record(rec)
    except OSError as e:
        raise DedupError(f"run merge failed: {e}") from e
    finally:
        for f in runs:
            f.close()


def write_pairs(pairs: Iterable[CandidatePair], fh: TextIO) -> int:
    n = 0
    for p in pairs:
        fh.write(json.dumps(p.to_record(), ensure_ascii=False, sort_keys=True))
        fh.write("\n")
        n += 1
    return n


def read_pairs(fh: Iterable[str]) -> Iterator[CandidatePair]:
    for line in fh:
        if line.strip():
            yield CandidatePair.from_record(json.loads(line))
