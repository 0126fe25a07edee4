"""Frequent itemset mining (level-wise Apriori) and a brute-force oracle."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DomainError, OracleGuardError
from .fmt import fixed

Itemset = tuple[int, ...]

ORACLE_MAX_ITEMS = 20


@dataclass(frozen=True)
class FrequentItemset:
    items: Itemset
    count: int
    n: int

    @property
    def support(self) -> Fraction:
        return Fraction(self.count, self.n)

    @property
    def support_float(self) -> float:
        return self.count / self.n


@dataclass(frozen=True)
class MiningParams:
    min_support: Fraction = Fraction(0)
    max_length: int | None = None

    def __post_init__(self):
        ms = Fraction(self.min_support)
        if not 0 <= ms < 1:
            raise ValueError("min_support must lie in [0, 1)")
        if self.max_length is not None and self.max_length < 1:
            raise ValueError("max_length must be positive")
        object.__setattr__(self, "min_support", ms)


def item_rows(transactions) -> list[Itemset]:
    # accepts Transaction objects or bare item sequences
    return [tuple(getattr(t, "items", t)) for t in transactions]


def canonical(items: Iterable[int]) -> Itemset:
    return tuple(sorted(set(items)))


def is_subset(small: Sequence[int], big: Sequence[int]) -> bool:
    """Merge-scan subset test on ascending sequences."""
    i = 0
    n = len(small)
    if n == 0:
        return True
    for x in big:
        if x == small[i]:
            i += 1
            if i == n:
                return True
        elif x > small[i]:
            return False
    return False


def count(itemset: Sequence[int], transactions) -> int:
    target = canonical(itemset)
    return sum(1 for t in item_rows(transactions) if is_subset(target, t))


def support(itemset: Sequence[int], transactions) -> Fraction:
    rows = item_rows(transactions)
    if not rows:
        raise DomainError("support is undefined over an empty transaction collection")
    return Fraction(count(itemset, rows), len(rows))


def _passes(cnt: int, n: int, min_support: Fraction) -> bool:
    # strict: Supp(F) > Supp_min
    return Fraction(cnt, n) > min_support


def tidsets(rows: Sequence[Itemset]) -> dict[int, int]:
    """Per-item bitset of the transaction positions containing it."""
    out: dict[int, int] = {}
    for pos, items in enumerate(rows):
        bit = 1 << pos
        for it in items:
            out[it] = out.get(it, 0) | bit
    return out


def apriori(transactions, params: MiningParams = MiningParams()) -> list[FrequentItemset]:
    """Mine every itemset whose support strictly exceeds ``params.min_support``.

    Candidates of size k are joined from frequent (k-1)-itemsets sharing a
    (k-2)-prefix and pruned when any (k-1)-subset is infrequent. Counting
    intersects per-item transaction bitsets. Output is ordered by size, then
    lexicographically by item id.
    """
    rows = item_rows(transactions)
    n = len(rows)
    if n == 0:
        raise DomainError("cannot mine an empty transaction collection")
    ms = params.min_support
    tids = tidsets(rows)

    level: dict[Itemset, int] = {}
    for it in sorted(tids):
        c = tids[it].bit_count()
        if _passes(c, n, ms):
            level[(it,)] = tids[it]
    result: list[FrequentItemset] = [FrequentItemset(k, v.bit_count(), n) for k, v in level.items()]

    k = 1
    while level and (params.max_length is None or k < params.max_length):
        prev = sorted(level)
        prev_set = set(prev)
        nxt: dict[Itemset, int] = {}
        for i, a in enumerate(prev):
            for b in prev[i + 1:]:
                if a[:-1] != b[:-1]:
                    break
                cand = a + (b[-1],)
                if any(cand[:j] + cand[j + 1:] not in prev_set for j in range(len(cand) - 2)):
                    continue
                bits = level[a] & tids[b[-1]]
                if _passes(bits.bit_count(), n, ms):
                    nxt[cand] = bits
        k += 1
        level = nxt
        result.extend(FrequentItemset(c, bits.bit_count(), n) for c, bits in sorted(nxt.items()))
    return result


def brute_force_frequent(transactions, params: MiningParams = MiningParams()) -> list[FrequentItemset]:
    """Enumerate every non-empty subset of the appearing items and count it
    directly. Refuses item universes larger than 20."""
    rows = [frozenset(r) for r in item_rows(transactions)]
    n = len(rows)
    if n == 0:
        raise DomainError("cannot mine an empty transaction collection")
    universe = sorted(set().union(*rows))
    if len(universe) > ORACLE_MAX_ITEMS:
        raise OracleGuardError(f"{len(universe)} distinct items exceed the oracle limit of {ORACLE_MAX_ITEMS}")
    top = len(universe) if params.max_length is None else min(params.max_length, len(universe))
    out = []
    for size in range(1, top + 1):
        for combo in combinations(universe, size):
            s = frozenset(combo)
            c = sum(1 for r in rows if s <= r)
            if Fraction(c, n) > params.min_support:
                out.append(FrequentItemset(combo, c, n))
    return out


def write_frequent_csv(path, family: Iterable[FrequentItemset], decode) -> None:
    """Export as CSV ``items,count,support`` with 9-digit half-even supports."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["items", "count", "support"])
        for f in family:
            w.writerow([" ".join(sorted(decode(f.items))), f.count, fixed(f.support, 9)])


def read_frequent_csv(path, encode, n: int) -> list[FrequentItemset]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(FrequentItemset(encode(row["items"].split()), int(row["count"]), n))
    return out
