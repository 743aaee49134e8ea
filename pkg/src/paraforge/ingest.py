"""Parse event-clustered headline collections and filter unverified authors.

Input is line-delimited JSON, one headline record per line.  Clusters arrive
pre-built; this module only validates, groups, and filters.
"""

import json
import logging
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Iterator, TextIO

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "text", "cluster_id", "timestamp", "source")


class IngestError(Exception):
    pass


class DuplicateIdError(IngestError):
    def __init__(self, headline_id: str, first_line: int, second_line: int):
        super().__init__(
            f"duplicate headline id {headline_id!r}: "
            f"line {first_line} and line {second_line}"
        )
        self.headline_id = headline_id
        self.first_line = first_line
        self.second_line = second_line


@dataclass(frozen=True)
class Headline:
    """One clustered news title with provenance."""

    id: str
    text: str
    cluster_id: str
    timestamp: str
    source: str
    author_verified: bool

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "cluster_id": self.cluster_id,
            "timestamp": self.timestamp,
            "source": self.source,
            "author_verified": self.author_verified,
        }


@dataclass
class ParseReport:
    total_lines: int = 0
    parsed: int = 0
    malformed: int = 0
    errors: list[str] = field(default_factory=list)


@dataclass
class ClusterSet:
    """Headlines grouped by cluster id, input order preserved per cluster.

    Immutable by convention after construction; safe to share read-only.
    """

    clusters: dict[str, list[Headline]] = field(default_factory=dict)

    def add(self, h: Headline) -> None:
        self.clusters.setdefault(h.cluster_id, []).append(h)

    def headline_count(self) -> int:
        return sum(len(v) for v in self.clusters.values())

    def all_headlines(self) -> Iterator[Headline]:
        for members in self.clusters.values():
            yield from members


def _validate_record(obj: dict, line_no: int) -> Headline:
    for f in REQUIRED_FIELDS:
        if f not in obj:
            raise IngestError(f"line {line_no}: missing field {f!r}")
    text = " ".join(unicodedata.normalize("NFC", str(obj["text"])).split())
    if not text:
        raise IngestError(f"line {line_no}: empty text after normalization")
    timestamp = str(obj["timestamp"])
    try:
        datetime.fromisoformat(timestamp)
    except ValueError:
        raise IngestError(f"line {line_no}: bad timestamp {timestamp!r}")
    # Missing author_verified defaults to False: unverifiable records are
    # discarded downstream, matching the conservative discard policy.
    return Headline(
        id=str(obj["id"]),
        text=text,
        cluster_id=str(obj["cluster_id"]),
        timestamp=timestamp,
        source=str(obj["source"]),
        author_verified=bool(obj.get("author_verified", False)),
    )


def parse_clusters(
    lines: Iterable[str], strict: bool = False
) -> tuple[ClusterSet, ParseReport]:
    """Group line-delimited headline records into a ClusterSet.

    Malformed lines are counted and reported, not fatal unless ``strict``.
    Duplicate ids are always an error identifying both lines.
    """
    clusters = ClusterSet()
    report = ParseReport()
    seen_ids: dict[str, int] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        report.total_lines += 1
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(f"line {line_no}: invalid record ({e.msg})")
            if not isinstance(obj, dict):
                raise IngestError(f"line {line_no}: record is not an object")
            h = _validate_record(obj, line_no)
        except IngestError as e:
            if strict:
                raise
            report.malformed += 1
            report.errors.append(str(e))
            continue
        if h.id in seen_ids:
            raise DuplicateIdError(h.id, seen_ids[h.id], line_no)
        seen_ids[h.id] = line_no
        clusters.add(h)
        report.parsed += 1
    if report.total_lines == 0:
        logger.warning("empty input: produced an empty ClusterSet")
    return clusters, report


def filter_unverified(clusters: ClusterSet) -> tuple[ClusterSet, int]:
    """Drop headlines with author_verified False.

    Clusters emptied to zero or one member are retained; they simply yield
    no pairs later.  Returns the filtered set and the discarded count.
    """
    out = ClusterSet()
    discarded = 0
    for cluster_id, members in clusters.clusters.items():
        kept = [h for h in members if h.author_verified]
        discarded += len(members) - len(kept)
        out.clusters[cluster_id] = kept
    return out, discarded


def write_headlines(headlines: Iterable[Headline], fh: TextIO) -> int:
    """Serialize headlines as canonical line-delimited records."""
    n = 0
    for h in headlines:
        fh.write(json.dumps(h.to_record(), ensure_ascii=False, sort_keys=True))
        fh.write("\n")
        n += 1
    return n


def read_headlines(fh: Iterable[str]) -> Iterator[Headline]:
    """Stream headlines from a canonical record file (strict parse)."""
    for line_no, line in enumerate(fh, start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        yield _validate_record(obj, line_no)
