"""Time-windowed support/confidence series and marker detection."""

from __future__ import annotations

import csv
import json
from bisect import bisect_left
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Transaction, format_timestamp
from .errors import DomainError
from .fmt import fixed
from .itemsets import canonical, is_subset

ONE_DAY = timedelta(days=1)


@dataclass(frozen=True)
class TimeWindowSpec:
    window_length: timedelta = ONE_DAY
    step: timedelta | None = None  # defaults to window_length (tumbling)
    origin: datetime | None = None  # defaults to UTC midnight before the first transaction

    def __post_init__(self):
        if self.window_length <= timedelta(0):
            raise ValueError("window_length must be positive")
        if self.step is not None and not timedelta(0) < self.step <= self.window_length:
            raise ValueError("step must satisfy 0 < step <= window_length")

    @property
    def stride(self) -> timedelta:
        return self.step if self.step is not None else self.window_length


@dataclass(frozen=True)
class SeriesPoint:
    window_start: datetime
    numerator_count: int
    denominator_count: int

    @property
    def value(self) -> Fraction | None:
        if self.denominator_count == 0:
            return None
        return Fraction(self.numerator_count, self.denominator_count)


@dataclass(frozen=True)
class MarkerEvent:
    kind: str  # "global_maximum" | "threshold_up_crossing"
    window_start: datetime
    value: Fraction


def _midnight(ts: datetime) -> datetime:
    ts = ts.astimezone(timezone.utc)
    return ts.replace(hour=0, minute=0, second=0, microsecond=0)


def window_partition(
    transactions: Sequence[Transaction], spec: TimeWindowSpec = TimeWindowSpec()
) -> list[tuple[datetime, list[Transaction]]]:
    """Assign transactions to windows ``[start, start + window_length)``.

    Window starts are ``origin + k * step``; the first window is the last
    start not after the earliest timestamp (so sliding windows that began
    before it are included), the last is the last start not after the latest
    timestamp. Empty windows are kept.
    """
    txs = list(transactions)
    if not txs:
        raise DomainError("cannot partition an empty transaction collection")
    lo = min(t.timestamp for t in txs)
    hi = max(t.timestamp for t in txs)
    origin = spec.origin if spec.origin is not None else _midnight(lo)
    step, length = spec.stride, spec.window_length
    # first k with origin + k*step + length > lo
    k = (lo - origin - length) // step + 1
    start = origin + k * step
    txs.sort(key=lambda t: t.timestamp)
    stamps = [t.timestamp for t in txs]
    windows: list[tuple[datetime, list[Transaction]]] = []
    while start <= hi:
        i = bisect_left(stamps, start)
        j = bisect_left(stamps, start + length)
        windows.append((start, txs[i:j]))
        start += step
    return windows


def support_series(itemset: Iterable[int], transactions, spec: TimeWindowSpec = TimeWindowSpec()) -> list[SeriesPoint]:
    target = canonical(itemset)
    return [
        SeriesPoint(start, sum(1 for t in win if is_subset(target, t.items)), len(win))
        for start, win in window_partition(transactions, spec)
    ]


def confidence_series(
    antecedent: Iterable[int], consequent: Iterable[int], transactions, spec: TimeWindowSpec = TimeWindowSpec()
) -> list[SeriesPoint]:
    ante, cons = canonical(antecedent), canonical(consequent)
    if not ante or not cons:
        raise DomainError("antecedent and consequent must be non-empty")
    if set(ante) & set(cons):
        raise DomainError("antecedent and consequent must be disjoint")
    both = canonical(ante + cons)
    out = []
    for start, win in window_partition(transactions, spec):
        a = sum(1 for t in win if is_subset(ante, t.items))
        ab = sum(1 for t in win if is_subset(both, t.items))
        out.append(SeriesPoint(start, ab, a))
    return out


def detect_markers(series: Sequence[SeriesPoint], threshold=None) -> list[MarkerEvent]:
    """Global maximum (earliest attainment) plus threshold up-crossings.

    Absent points are skipped. A defined point at or above ``threshold``
    crosses when the previous defined point is below it, or when it is the
    first defined point.
    """
    if not series:
        raise DomainError("empty series")
    defined = [(p.window_start, p.value) for p in series if p.value is not None]
    if not defined:
        raise DomainError("series has no defined points")
    best_start, best = defined[0]
    for start, v in defined[1:]:
        if v > best:
            best_start, best = start, v
    events = [MarkerEvent("global_maximum", best_start, best)]
    if threshold is not None:
        thr = Fraction(threshold)
        prev = None
        for start, v in defined:
            if v >= thr and (prev is None or prev < thr):
                events.append(MarkerEvent("threshold_up_crossing", start, v))
            prev = v
    events.sort(key=lambda e: (e.window_start, e.kind))
    return events


def write_series_csv(path: str | Path, series: Iterable[SeriesPoint], digits: int = 9) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_start", "value", "numerator", "denominator"])
        for p in series:
            v = p.value
            w.writerow(
                [format_timestamp(p.window_start), "" if v is None else fixed(v, digits), p.numerator_count, p.denominator_count]
            )


def markers_to_json(events: Iterable[MarkerEvent], digits: int = 9) -> list[dict]:
    return [
        {
            "kind": e.kind,
            "window_start": format_timestamp(e.window_start),
            "value": float(fixed(e.value, digits)),
            "numerator": e.value.numerator,
            "denominator": e.value.denominator,
        }
        for e in events
    ]


def write_markers_json(path: str | Path, events: Iterable[MarkerEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(markers_to_json(events), fh, indent=2)
        fh.write("\n")
