"""Text ingestion: records, tokenization, vocabulary and transactions."""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

log = logging.getLogger(__name__)

_SPLIT_RE = re.compile(r"[^a-z0-9_#]+")
_MONTHS = ("jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec")


@dataclass(frozen=True)
class MessageRecord:
    id: str
    timestamp: datetime
    text: str


@dataclass(frozen=True)
class Transaction:
    id: str
    timestamp: datetime
    items: tuple[int, ...]


@dataclass
class LoadResult:
    records: list[MessageRecord]
    rejected: int = 0


@dataclass
class TransactionSet:
    transactions: list[Transaction]
    dropped_empty: int = 0


class Vocabulary:
    """Bijection between item strings and dense integer ids, plus counts.

    Ids are dense and start at 0.
    """

    def __init__(self, items: Sequence[str], counts: Mapping[str, int] | None = None):
        if len(set(items)) != len(items):
            raise ValueError("duplicate item in vocabulary")
        self._items = list(items)
        self._ids = {s: i for i, s in enumerate(self._items)}
        self.counts = dict(counts) if counts is not None else {s: 0 for s in self._items}

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, item: str) -> bool:
        return item in self._ids

    def __iter__(self):
        return iter(self._items)

    @property
    def items(self) -> list[str]:
        return list(self._items)

    def id_of(self, item: str) -> int:
        return self._ids[item]

    def item_of(self, idx: int) -> str:
        return self._items[idx]

    def get(self, item: str) -> int | None:
        return self._ids.get(item)

    def encode(self, items: Iterable[str]) -> tuple[int, ...]:
        return tuple(sorted({self._ids[s] for s in items}))

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self._items[i] for i in ids]

    def to_json(self) -> dict:
        return {
            "items": [{"id": i, "item": s, "count": self.counts.get(s, 0)} for i, s in enumerate(self._items)]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Vocabulary":
        rows = sorted(data["items"], key=lambda r: r["id"])
        if [r["id"] for r in rows] != list(range(len(rows))):
            raise ValueError("vocabulary ids must be dense from 0")
        return cls([r["item"] for r in rows], {r["item"]: int(r.get("count", 0)) for r in rows})

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> "Vocabulary":
        # descending count, ties lexicographic
        order = sorted(counts, key=lambda s: (-counts[s], s))
        return cls(order, counts)


@dataclass
class SemanticFrame:
    """Named thematic fields; their union bounds the retained items."""

    fields: dict[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        for name, items in self.fields.items():
            if not items:
                raise ValueError(f"frame field {name!r} is empty")
        self.fields = {k: frozenset(v) for k, v in self.fields.items()}

    def union(self) -> frozenset[str]:
        out: set[str] = set()
        for items in self.fields.values():
            out |= items
        return frozenset(out)

    @classmethod
    def load(cls, path: str | Path) -> "SemanticFrame":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError("frame file must hold a JSON object")
        return cls({str(k): frozenset(map(str, v)) for k, v in data.items()})


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 instant. Naive values are taken as UTC."""
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _record_from_mapping(row: Mapping) -> MessageRecord:
    for key in ("id", "timestamp", "text"):
        if not isinstance(row.get(key), str):
            raise ValueError(f"missing or non-string field {key!r}")
    return MessageRecord(row["id"], parse_timestamp(row["timestamp"]), row["text"])


def load_corpus(path: str | Path, format: str = "jsonl") -> LoadResult:
    """Read message records from a JSONL or CSV file.

    Malformed lines, unparseable timestamps and repeated ids are skipped and
    counted in ``LoadResult.rejected``. An unreadable file raises ``OSError``.
    """
    if format not in ("jsonl", "csv"):
        raise ValueError(f"unknown corpus format {format!r}")
    records: list[MessageRecord] = []
    rejected = 0
    seen: set[str] = set()

    def accept(row) -> None:
        nonlocal rejected
        try:
            if not isinstance(row, Mapping):
                raise ValueError("not an object")
            rec = _record_from_mapping(row)
        except ValueError as exc:
            rejected += 1
            log.debug("rejected record: %s", exc)
            return
        if rec.id in seen:
            rejected += 1
            log.debug("rejected duplicate id %r", rec.id)
            return
        seen.add(rec.id)
        records.append(rec)

    with open(path, encoding="utf-8", newline="") as fh:
        if format == "jsonl":
            for line in fh:
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError:
                    rejected += 1
                    continue
                accept(row)
        else:
            reader = csv.DictReader(fh)
            if reader.fieldnames is not None and not {"id", "timestamp", "text"} <= set(reader.fieldnames):
                raise ValueError("CSV header must contain id,timestamp,text")
            for row in reader:
                accept(row)
    return LoadResult(records, rejected)


def tokenize(text: str, strip_hashtag: bool = True) -> list[str]:
    tokens = []
    for tok in _SPLIT_RE.split(text.lower()):
        if strip_hashtag:
            tok = tok.lstrip("#")
        if tok:
            tokens.append(tok)
    return tokens


def filter_by_keywords(
    records: Iterable[MessageRecord], keywords: Iterable[str], strip_hashtag: bool = True
) -> list[MessageRecord]:
    kw = frozenset(keywords)
    if not kw:
        raise ValueError("keyword set must be non-empty")
    return [r for r in records if kw.intersection(tokenize(r.text, strip_hashtag))]


def load_stopwords(path: str | Path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


def date_item(ts: datetime) -> str:
    """Date token in the ``aug_04`` style used by the thematic fields."""
    return f"{_MONTHS[ts.month - 1]}_{ts.day:02d}"


def _record_tokens(rec: MessageRecord, strip_hashtag: bool, inject_date: bool) -> list[str]:
    toks = tokenize(rec.text, strip_hashtag)
    if inject_date:
        toks.append(date_item(rec.timestamp))
    return toks


def build_vocabulary(
    records: Iterable[MessageRecord],
    min_count: int = 10,
    stopwords: Iterable[str] = (),
    strip_hashtag: bool = True,
    inject_date: bool = False,
) -> Vocabulary:
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    stop = frozenset(stopwords)
    counts: Counter[str] = Counter()
    for rec in records:
        counts.update(_record_tokens(rec, strip_hashtag, inject_date))
    kept = {s: c for s, c in counts.items() if c >= min_count and s not in stop}
    return Vocabulary.from_counts(kept)


def build_transactions(
    records: Iterable[MessageRecord],
    vocab: Vocabulary,
    frame: SemanticFrame | None = None,
    strip_hashtag: bool = True,
    inject_date: bool = False,
) -> TransactionSet:
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty")
    allowed = frame.union() if frame is not None else None
    out: list[Transaction] = []
    dropped = 0
    for rec in records:
        ids = set()
        for tok in _record_tokens(rec, strip_hashtag, inject_date):
            if allowed is not None and tok not in allowed:
                continue
            idx = vocab.get(tok)
            if idx is not None:
                ids.add(idx)
        if not ids:
            dropped += 1
            continue
        out.append(Transaction(rec.id, rec.timestamp, tuple(sorted(ids))))
    return TransactionSet(out, dropped)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def write_transactions(path: str | Path, transactions: Iterable[Transaction], vocab: Vocabulary) -> None:
    """Write transactions as CSV ``id,timestamp,items``; items are sorted strings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "timestamp", "items"])
        for t in transactions:
            w.writerow([t.id, format_timestamp(t.timestamp), " ".join(sorted(vocab.decode(t.items)))])


def read_transactions(path: str | Path, vocab: Vocabulary | None = None) -> tuple[list[Transaction], Vocabulary]:
    """Read a transactions CSV back. Without a vocabulary, one is derived
    from item frequencies (descending count, then lexicographic)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append((row["id"], parse_timestamp(row["timestamp"]), row["items"].split()))
    if vocab is None:
        counts: Counter[str] = Counter()
        for _, _, items in rows:
            counts.update(set(items))
        vocab = Vocabulary.from_counts(counts)
    txs = []
    for rid, ts, items in rows:
        missing = [s for s in items if s not in vocab]
        if missing:
            raise ValueError(f"transaction {rid!r} has items outside vocabulary: {missing}")
        txs.append(Transaction(rid, ts, vocab.encode(items)))
    return txs, vocab
