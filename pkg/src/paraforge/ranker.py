"""Sort scored pairs by paraphrase probability and cut training slices.

A ranked corpus file is a metadata header line followed by pair records in
score-descending order, ties broken by (a_id, b_id), so the order is a
deterministic total order and slices are stable prefixes.
"""

import heapq
import json
import random
import tempfile
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence, TextIO

from .pairgen import CandidatePair

DEFAULT_CHUNK = 500_000


class RankError(Exception):
    pass


@dataclass
class RankedCorpus:
    """Score-descending pair sequence plus provenance metadata."""

    pairs: list[CandidatePair]
    backend: str = "unknown"
    created: str = ""

    def __post_init__(self) -> None:
        for prev, cur in zip(self.pairs, self.pairs[1:]):
            if _sort_key(prev) > _sort_key(cur):
                raise RankError("pairs are not in ranked order")

    def __len__(self) -> int:
        return len(self.pairs)

    def metadata(self) -> dict:
        return {
            "backend": self.backend,
            "created": self.created,
            "count": len(self.pairs),
        }

    def save(self, fh: TextIO) -> None:
        fh.write(json.dumps(self.metadata(), sort_keys=True) + "\n")
        for p in self.pairs:
            fh.write(json.dumps(p.to_record(), ensure_ascii=False,
                                sort_keys=True) + "\n")

    @classmethod
    def load(cls, fh: Iterable[str]) -> "RankedCorpus":
        it = iter(fh)
        try:
            meta = json.loads(next(it))
        except StopIteration:
            raise RankError("empty corpus file")
        pairs = [CandidatePair.from_record(json.loads(ln))
                 for ln in it if ln.strip()]
        return cls(pairs=pairs, backend=meta.get("backend", "unknown"),
                   created=meta.get("created", ""))


def _sort_key(pair: CandidatePair) -> tuple[float, str, str]:
    if pair.score is None:
        raise RankError(f"pair ({pair.a_id}, {pair.b_id}) has no score")
    return (-pair.score, pair.a_id, pair.b_id)


def rank(
    scored_pairs: Iterable[CandidatePair],
    backend: str = "unknown",
    created: str = "",
    chunk_size: int = DEFAULT_CHUNK,
) -> RankedCorpus:
    """Stable, deterministic descending sort by (score, a_id, b_id).

    Inputs larger than ``chunk_size`` go through sorted disk runs merged
    with a heap, so corpus-scale inputs never need to sort in memory.
    """
    chunk: list[CandidatePair] = []
    runs: list = []

    def spill() -> None:
        f = tempfile.TemporaryFile(mode="w+", encoding="utf-8")
        chunk.sort(key=_sort_key)
        for p in chunk:
            f.write(json.dumps(p.to_record(), ensure_ascii=False) + "\n")
        f.flush()
        runs.append(f)

    for pair in scored_pairs:
        _sort_key(pair)  # raises on missing score
        chunk.append(pair)
        if len(chunk) >= chunk_size:
            spill()
            chunk = []

    if not runs:
        chunk.sort(key=_sort_key)
        return RankedCorpus(pairs=chunk, backend=backend, created=created)

    if chunk:
        spill()

    def read(f) -> Iterator[CandidatePair]:
        f.seek(0)
        for line in f:
            yield CandidatePair.from_record(json.loads(line))

    merged = list(heapq.merge(*(read(f) for f in runs), key=_sort_key))
    for f in runs:
        f.close()
    return RankedCorpus(pairs=merged, backend=backend, created=created)


def top_slice(corpus: RankedCorpus, n: int) -> list[CandidatePair]:
    """Exactly the first n pairs; slice(n1) is a prefix of slice(n2)."""
    if n <= 0:
        raise RankError(f"slice size must be positive, got {n}")
    if n > len(corpus):
        raise RankError(
            f"requested {n} pairs but corpus holds only {len(corpus)}"
        )
    return corpus.pairs[:n]


def split(
    pairs: Sequence[CandidatePair],
    ratios: tuple[float, float, float],
    seed: int,
) -> tuple[list[CandidatePair], list[CandidatePair], list[CandidatePair]]:
    """Disjoint, exhaustive train/valid/test split with a leakage guard.

    Pairs sharing a headline always share a cluster, so assigning whole
    clusters to one side guarantees no headline id lands in both train and
    test.  Target sizes use largest-remainder rounding on pair counts; a
    seeded shuffle of the cluster groups precedes the greedy fill, and each
    group goes to the side with the largest remaining deficit.
    """
    if any(r < 0 for r in ratios):
        raise RankError(f"ratios must be non-negative, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise RankError(f"ratios sum to {sum(ratios)}, expected 1.0")

    n = len(pairs)
    targets = _largest_remainder(n, ratios)

    groups: dict[str, list[CandidatePair]] = {}
    for p in pairs:
        groups.setdefault(p.cluster_id, []).append(p)
    group_ids = sorted(groups)
    rng = random.Random(seed)
    rng.shuffle(group_ids)

    sides: tuple[list[CandidatePair], ...] = ([], [], [])
    deficits = list(targets)
    for gid in group_ids:
        batch = groups[gid]
        # Largest remaining deficit wins; ties resolve train > valid > test.
        side = max(range(3), key=lambda i: (deficits[i], -i))
        sides[side].extend(batch)
        deficits[side] -= len(batch)
    return sides


def _largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    raw = [n * r for r in ratios]
    floors = [int(x) for x in raw]
    shortfall = n - sum(floors)
    order = sorted(range(len(ratios)), key=lambda i: raw[i] - floors[i],
                   reverse=True)
    for i in order[:shortfall]:
        floors[i] += 1
    return floors


def leakage(
    train: Iterable[CandidatePair], test: Iterable[CandidatePair]
) -> set[str]:
    """Headline ids appearing on both sides; empty means a clean split."""
    train_ids = {i for p in train for i in (p.a_id, p.b_id)}
    test_ids = {i for p in test for i in (p.a_id, p.b_id)}
    return train_ids & test_ids
