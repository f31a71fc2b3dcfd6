"""Ingestion and indexing of line-delimited citation records.

Each input line is one JSON object carrying at least ``id``, ``year``,
``authors`` (a list of ``{"id": ...}`` objects) and ``references`` (a list
of paper ids).  Extra fields are ignored.
"""
from __future__ import annotations

import io
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Iterable, Mapping, Sequence, Union

MIN_YEAR = 1900
MAX_YEAR = 2100


class CorpusError(Exception):
    """Fatal ingestion problem (unreadable stream, inconsistent record set)."""


class DuplicatePaperError(CorpusError, ValueError):
    def __init__(self, paper_id: str):
        super().__init__(f"duplicate paper id: {paper_id!r}")
        self.paper_id = paper_id


@dataclass(frozen=True)
class PaperRecord:
    """One publication: id, publication year, author ids and cited paper ids."""

    paper_id: str
    year: int
    author_ids: tuple[str, ...]
    reference_ids: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "author_ids", tuple(self.author_ids))
        object.__setattr__(self, "reference_ids", tuple(self.reference_ids))
        if not MIN_YEAR <= self.year <= MAX_YEAR:
            raise ValueError(f"{self.paper_id}: year {self.year} outside [{MIN_YEAR}, {MAX_YEAR}]")
        if not self.author_ids:
            raise ValueError(f"{self.paper_id}: empty author list")
        if len(set(self.author_ids)) != len(self.author_ids):
            raise ValueError(f"{self.paper_id}: duplicate author ids")
        if self.paper_id in self.reference_ids:
            raise ValueError(f"{self.paper_id}: paper references itself")


@dataclass
class IngestReport:
    lines_read: int = 0
    accepted: int = 0
    rejected: int = 0
    reject_reasons: Counter = field(default_factory=Counter)
    warnings: Counter = field(default_factory=Counter)

    def reject(self, reason: str) -> None:
        self.rejected += 1
        self.reject_reasons[reason] += 1

    def to_dict(self) -> dict:
        return {
            "lines_read": self.lines_read,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "reject_reasons": dict(sorted(self.reject_reasons.items())),
            "warnings": dict(sorted(self.warnings.items())),
        }


class _Reject(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def _as_id(value) -> str | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str) and value.strip():
        return value.strip()
    return None


def _record_from_obj(obj, report: IngestReport) -> PaperRecord:
    if not isinstance(obj, dict):
        raise _Reject("not_an_object")
    paper_id = _as_id(obj.get("id"))
    if paper_id is None:
        raise _Reject("missing_id")

    if "year" not in obj or obj["year"] is None:
        raise _Reject("missing_year")
    year = obj["year"]
    if isinstance(year, bool) or not isinstance(year, int):
        raise _Reject("bad_year")
    if not MIN_YEAR <= year <= MAX_YEAR:
        raise _Reject("year_out_of_range")

    authors = obj.get("authors")
    if authors is None:
        raise _Reject("missing_authors")
    if not isinstance(authors, list):
        raise _Reject("bad_authors")
    author_ids = []
    for entry in authors:
        aid = _as_id(entry.get("id")) if isinstance(entry, dict) else None
        if aid is None:
            report.warnings["author_without_id"] += 1
            continue
        author_ids.append(aid)
    if not author_ids:
        raise _Reject("empty_authors")
    deduped = list(dict.fromkeys(author_ids))
    if len(deduped) != len(author_ids):
        report.warnings["duplicate_author"] += 1

    refs = obj.get("references")
    if refs is None:
        refs = []
    if not isinstance(refs, list):
        raise _Reject("bad_references")
    ref_ids = []
    for ref in refs:
        rid = _as_id(ref)
        if rid is None:
            report.warnings["bad_reference_entry"] += 1
            continue
        if rid == paper_id:
            report.warnings["self_reference"] += 1
            continue
        ref_ids.append(rid)
    unique_refs = list(dict.fromkeys(ref_ids))
    if len(unique_refs) != len(ref_ids):
        report.warnings["duplicate_reference"] += 1

    return PaperRecord(paper_id, year, tuple(deduped), tuple(unique_refs))


def parse_records(stream: Union[IO[bytes], IO[str], Iterable]) -> tuple[list[PaperRecord], IngestReport]:
    """Parse a line-delimited record stream.

    Bad lines are rejected and tallied in the report; they never abort the
    stream.  Failure to read the stream itself raises :class:`CorpusError`.
    """
    report = IngestReport()
    records: list[PaperRecord] = []
    try:
        for raw in stream:
            if isinstance(raw, bytes):
                try:
                    line = raw.decode("utf-8")
                except UnicodeDecodeError:
                    report.lines_read += 1
                    report.reject("bad_encoding")
                    continue
            else:
                line = raw
            if not line.strip():
                continue
            report.lines_read += 1
            try:
                obj = json.loads(line)
            except ValueError:
                report.reject("malformed_json")
                continue
            try:
                records.append(_record_from_obj(obj, report))
            except _Reject as exc:
                report.reject(exc.reason)
    except (OSError, io.UnsupportedOperation) as exc:
        raise CorpusError(f"cannot read record stream: {exc}") from exc
    report.accepted = len(records)
    return records, report


def read_records(path) -> tuple[list[PaperRecord], IngestReport]:
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise CorpusError(f"cannot open {path}: {exc}") from exc
    with fh:
        return parse_records(fh)


def record_to_obj(record: PaperRecord) -> dict:
    return {
        "id": record.paper_id,
        "year": record.year,
        "authors": [{"id": a} for a in record.author_ids],
        "references": list(record.reference_ids),
    }


def serialize_records(records: Iterable[PaperRecord]) -> bytes:
    """Inverse of :func:`parse_records` for valid records."""
    lines = [json.dumps(record_to_obj(r), ensure_ascii=False, separators=(",", ":")) for r in records]
    return ("\n".join(lines) + "\n").encode("utf-8") if lines else b""


def load_serialized(path) -> list[PaperRecord]:
    """Re-read a file written by :func:`serialize_records`.

    Skips the per-field checks of :func:`parse_records`; record invariants
    still hold through ``PaperRecord`` itself.
    """
    loads = json.loads
    out = []
    with open(path, "rb") as fh:
        for line in fh:
            if not line.strip():
                continue
            o = loads(line)
            out.append(PaperRecord(o["id"], o["year"], tuple(a["id"] for a in o["authors"]), tuple(o["references"])))
    return out


@dataclass(frozen=True)
class CorpusIndex:
    """Read-only lookup structure over a validated record set.

    ``citations_by_year`` keys each (cited, citing) pair by the citing paper's
    publication year; pairs whose cited paper is missing from the record set
    are dropped and tallied in ``dangling_references``.
    """

    papers: Mapping[str, PaperRecord]
    author_papers: Mapping[str, tuple[str, ...]]
    citations_by_year: Mapping[int, tuple[tuple[str, str], ...]]
    dangling_references: int = 0

    @property
    def years(self) -> list[int]:
        return sorted({p.year for p in self.papers.values()})

    @property
    def citation_years(self) -> list[int]:
        return sorted(self.citations_by_year)

    def citation_count(self) -> int:
        return sum(len(v) for v in self.citations_by_year.values())

    def authors(self) -> list[str]:
        return sorted(self.author_papers)

    def first_publication_year(self, author_id: str) -> int:
        return min(self.papers[pid].year for pid in self.author_papers[author_id])


def build_index(records: Sequence[PaperRecord]) -> CorpusIndex:
    papers: dict[str, PaperRecord] = {}
    for rec in records:
        if rec.paper_id in papers:
            raise DuplicatePaperError(rec.paper_id)
        papers[rec.paper_id] = rec

    author_papers: dict[str, list[str]] = defaultdict(list)
    by_year: dict[int, list[tuple[str, str]]] = defaultdict(list)
    dangling = 0
    for rec in records:
        for aid in rec.author_ids:
            author_papers[aid].append(rec.paper_id)
        for ref in rec.reference_ids:
            if ref in papers:
                by_year[rec.year].append((ref, rec.paper_id))
            else:
                dangling += 1

    return CorpusIndex(
        papers=MappingProxyType(papers),
        author_papers=MappingProxyType({a: tuple(p) for a, p in author_papers.items()}),
        citations_by_year=MappingProxyType({y: tuple(sorted(pairs)) for y, pairs in sorted(by_year.items())}),
        dangling_references=dangling,
    )
