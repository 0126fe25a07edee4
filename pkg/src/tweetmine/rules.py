"""Association rules from frequent itemsets: confidence, lift, sorting, export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable

from .errors import ConsistencyError, DomainError
from .fmt import fixed, rational_json
from .itemsets import FrequentItemset, Itemset, count as count_itemset, item_rows

SUPPORT_DIGITS = 9
METRIC_DIGITS = 7


@dataclass(frozen=True)
class AssociationRule:
    antecedent: Itemset
    consequent: Itemset
    count: int  # transactions containing antecedent and consequent
    antecedent_count: int
    consequent_count: int
    n: int

    @property
    def items(self) -> Itemset:
        return tuple(sorted(self.antecedent + self.consequent))

    @property
    def support(self) -> Fraction:
        return Fraction(self.count, self.n)

    @property
    def confidence(self) -> Fraction:
        return Fraction(self.count, self.antecedent_count)

    @property
    def lift(self) -> Fraction:
        return lift(self.confidence, Fraction(self.consequent_count, self.n))


@dataclass(frozen=True)
class RuleConstraints:
    """Rule filters. ``max_consequent_size`` defaults to single-item consequents."""

    min_support: Fraction = Fraction(0)
    min_confidence: Fraction = Fraction(0)
    consequent_whitelist: frozenset[int] | None = None
    max_antecedent_size: int | None = None
    max_consequent_size: int | None = 1

    def __post_init__(self):
        for name in ("min_support", "min_confidence"):
            v = Fraction(getattr(self, name))
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, v)
        if self.consequent_whitelist is not None:
            object.__setattr__(self, "consequent_whitelist", frozenset(self.consequent_whitelist))

    def admits(self, antecedent: Itemset, consequent: Itemset) -> bool:
        if self.max_antecedent_size is not None and len(antecedent) > self.max_antecedent_size:
            return False
        if self.max_consequent_size is not None and len(consequent) > self.max_consequent_size:
            return False
        if self.consequent_whitelist is not None and not set(consequent) <= self.consequent_whitelist:
            return False
        return True


def lift(rule_confidence, consequent_support) -> Fraction:
    cs = Fraction(consequent_support)
    if cs <= 0:
        raise DomainError("lift undefined for a consequent with zero support")
    return Fraction(rule_confidence) / cs


def generate_rules(
    frequent: Iterable[FrequentItemset], transactions, constraints: RuleConstraints = RuleConstraints()
) -> list[AssociationRule]:
    """Split every frequent itemset of size >= 2 into antecedent/consequent pairs.

    A rule is kept when its itemset support is strictly above
    ``min_support``, confidence is at least ``min_confidence`` and the
    structural constraints admit it. Counts of subsets missing from
    ``frequent`` are recomputed from the transactions.
    """
    rows = item_rows(transactions)
    n = len(rows)
    if n == 0:
        raise DomainError("no transactions")
    family = list(frequent)
    present = set().union(*map(set, rows))
    counts: dict[Itemset, int] = {}
    for f in family:
        if not set(f.items) <= present:
            raise ConsistencyError(f"frequent itemset {f.items} references items absent from transactions")
        counts[tuple(f.items)] = f.count

    def cnt(items: Itemset) -> int:
        c = counts.get(items)
        if c is None:
            c = counts[items] = count_itemset(items, rows)
        return c

    out = []
    for f in family:
        items = tuple(f.items)
        if len(items) < 2 or not Fraction(f.count, n) > constraints.min_support:
            continue
        for size in range(1, len(items)):
            for ante in combinations(items, size):
                cons = tuple(x for x in items if x not in ante)
                if not constraints.admits(ante, cons):
                    continue
                a_cnt = cnt(ante)
                if Fraction(f.count, a_cnt) < constraints.min_confidence:
                    continue
                out.append(AssociationRule(ante, cons, f.count, a_cnt, cnt(cons), n))
    return out


def _tiebreak(rule: AssociationRule):
    return (len(rule.antecedent), rule.antecedent, rule.consequent)


def sort_rules(rules: Iterable[AssociationRule], key: str = "support") -> list[AssociationRule]:
    if key not in ("support", "confidence", "lift"):
        raise ValueError(f"unknown sort key {key!r}")
    ordered = sorted(rules, key=_tiebreak)
    return sorted(ordered, key=lambda r: getattr(r, key), reverse=True)


def rule_row(rule: AssociationRule, decode) -> list[str]:
    return [
        " ".join(sorted(decode(rule.antecedent))),
        " ".join(sorted(decode(rule.consequent))),
        fixed(rule.support, SUPPORT_DIGITS),
        fixed(rule.confidence, METRIC_DIGITS),
        fixed(rule.lift, METRIC_DIGITS),
    ]


def write_rules_csv(path: str | Path, rules: Iterable[AssociationRule], decode) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["antecedent", "consequent", "support", "confidence", "lift"])
        for r in rules:
            w.writerow(rule_row(r, decode))


def rules_to_json(rules: Iterable[AssociationRule], decode) -> list[dict]:
    return [
        {
            "antecedent": sorted(decode(r.antecedent)),
            "consequent": sorted(decode(r.consequent)),
            "support": rational_json(r.support),
            "confidence": rational_json(r.confidence),
            "lift": rational_json(r.lift),
        }
        for r in rules
    ]


def write_rules_json(path: str | Path, rules: Iterable[AssociationRule], decode) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(rules_to_json(rules, decode), fh, indent=2)
        fh.write("\n")
