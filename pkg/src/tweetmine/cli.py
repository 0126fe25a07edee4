"""Command-line pipeline: ingest, mine, rules, lattice, dynamics."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from datetime import timedelta
from fractions import Fraction
from pathlib import Path

from . import corpus, dynamics, fca, fixtures, itemsets, rules
from .errors import DomainError, LatticeBoundError, OracleGuardError

log = logging.getLogger("tweetmine")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_EMPTY = 3
EXIT_ORACLE = 4
EXIT_LATTICE = 5


class ConfigError(ValueError):
    pass


class EmptyDataError(Exception):
    pass


def rational(value) -> Fraction:
    """Parse ``0.006``, ``"4/616"`` or ``0`` exactly (floats via their repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {value!r}") from exc


_DURATION_RE = re.compile(r"^\s*(\d+)\s*([smhdw])\s*$")
_UNITS = {"s": "seconds", "m": "minutes", "h": "hours", "d": "days", "w": "weeks"}


def duration(value) -> timedelta:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return timedelta(seconds=value)
    m = _DURATION_RE.match(str(value))
    if not m:
        raise ConfigError(f"bad duration {value!r}; use e.g. 1d, 12h, 30m or seconds")
    return timedelta(**{_UNITS[m.group(2)]: int(m.group(1))})


class Pipeline:
    """Resolved configuration: the JSON document overlaid with CLI flags."""

    def __init__(self, data: dict, base: Path, out: Path | None):
        self.data = data
        self.base = base
        self.out = out if out is not None else self.path(data.get("output_dir", "out"))

    def path(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base / p

    def get(self, key, default=None):
        return self.data.get(key, default)

    def section(self, key) -> dict:
        sec = self.data.get(key) or {}
        if not isinstance(sec, dict):
            raise ConfigError(f"config field {key!r} must be an object")
        return sec

    def existing(self, key, default=None) -> Path | None:
        value = self.data.get(key, default)
        if value is None:
            return None
        p = self.path(value)
        if not p.is_file():
            raise ConfigError(f"{key}: file not found: {p}")
        return p

    def artifact(self, name: str) -> Path:
        return self.out / name

    # shared loaders

    def vocabulary(self) -> corpus.Vocabulary | None:
        p = self.artifact("vocabulary.json")
        if not p.is_file():
            return None
        with open(p, encoding="utf-8") as fh:
            return corpus.Vocabulary.from_json(json.load(fh))

    def transactions(self):
        p = self.data.get("transactions")
        p = self.path(p) if p is not None else self.artifact("transactions.csv")
        if not p.is_file():
            raise ConfigError(f"transactions file not found: {p} (run ingest first)")
        return corpus.read_transactions(p, self.vocabulary())


def load_pipeline(args) -> Pipeline:
    data: dict = {}
    base = Path.cwd()
    if args.config:
        cfg = Path(args.config)
        try:
            with open(cfg, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        base = cfg.resolve().parent
    out = Path(args.out) if args.out else None
    return Pipeline(data, base, out)


def _mining_params(pl: Pipeline, args) -> itemsets.MiningParams:
    sec = pl.section("mining")
    ms = args.min_support if getattr(args, "min_support", None) is not None else sec.get("min_support", 0)
    ml = getattr(args, "max_length", None) or sec.get("max_length")
    try:
        return itemsets.MiningParams(rational(ms), ml)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_ingest(pl: Pipeline, args) -> int:
    src = pl.existing("input") if args.input is None else Path(args.input)
    if src is None:
        raise ConfigError("no input file configured")
    if not src.is_file():
        raise ConfigError(f"input file not found: {src}")
    fmt = args.format or pl.get("format") or ("csv" if src.suffix == ".csv" else "jsonl")
    min_count = args.min_count if args.min_count is not None else pl.get("min_count", 10)
    if not isinstance(min_count, int) or min_count < 1:
        raise ConfigError("min_count must be a positive integer")
    stop_path = pl.existing("stopwords")
    stopwords = corpus.load_stopwords(stop_path) if stop_path else frozenset()
    frame_path = pl.existing("frame")
    frame = corpus.SemanticFrame.load(frame_path) if frame_path else None
    keywords = args.keywords or pl.get("keywords")
    strip = bool(pl.get("strip_hashtag", True))
    inject = bool(pl.get("inject_date_item", False))

    loaded = corpus.load_corpus(src, fmt)
    records = loaded.records
    if keywords:
        records = corpus.filter_by_keywords(records, keywords, strip)
    vocab = corpus.build_vocabulary(records, min_count, stopwords, strip, inject)
    if len(vocab):
        ts = corpus.build_transactions(records, vocab, frame, strip, inject)
    else:
        ts = corpus.TransactionSet([], len(records))

    pl.out.mkdir(parents=True, exist_ok=True)
    corpus.write_transactions(pl.artifact("transactions.csv"), ts.transactions, vocab)
    fca.write_json(pl.artifact("vocabulary.json"), vocab.to_json())
    print(
        f"records={len(loaded.records)} rejected={loaded.rejected} kept={len(records)} "
        f"vocabulary={len(vocab)} transactions={len(ts.transactions)} dropped_empty={ts.dropped_empty}"
    )
    if not ts.transactions:
        print("warning: no transactions produced", file=sys.stderr)
    return EXIT_OK


def _nonempty_transactions(pl: Pipeline):
    txs, vocab = pl.transactions()
    if not txs:
        raise EmptyDataError("transaction set is empty")
    return txs, vocab


def cmd_mine(pl: Pipeline, args) -> int:
    params = _mining_params(pl, args)
    txs, vocab = _nonempty_transactions(pl)
    miner = itemsets.brute_force_frequent if args.oracle else itemsets.apriori
    family = miner(txs, params)
    pl.out.mkdir(parents=True, exist_ok=True)
    itemsets.write_frequent_csv(pl.artifact("frequent.csv"), family, vocab.decode)
    print(f"transactions={len(txs)} frequent={len(family)}")
    return EXIT_OK


def _rule_constraints(pl: Pipeline, args, vocab) -> tuple[rules.RuleConstraints, str]:
    sec = pl.section("rules")
    ms = args.min_support if args.min_support is not None else sec.get("min_support", pl.section("mining").get("min_support", 0))
    mc = args.min_confidence if args.min_confidence is not None else sec.get("min_confidence", 0)
    wl = args.whitelist if args.whitelist is not None else sec.get("consequent_whitelist")
    ids = None
    if wl is not None:
        ids = frozenset(vocab.get(s) for s in wl if vocab.get(s) is not None)
    key = args.sort or sec.get("sort_key", "support")
    if key not in ("support", "confidence", "lift"):
        raise ConfigError(f"unknown sort key {key!r}")
    try:
        c = rules.RuleConstraints(
            rational(ms),
            rational(mc),
            ids,
            args.max_antecedent or sec.get("max_antecedent_size"),
            sec.get("max_consequent_size", 1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return c, key


def cmd_rules(pl: Pipeline, args) -> int:
    txs, vocab = _nonempty_transactions(pl)
    constraints, key = _rule_constraints(pl, args, vocab)
    freq_path = pl.artifact("frequent.csv")
    if not freq_path.is_file():
        raise ConfigError(f"frequent-set file not found: {freq_path} (run mine first)")
    try:
        family = itemsets.read_frequent_csv(freq_path, vocab.encode, len(txs))
    except KeyError as exc:
        raise ConfigError(f"frequent-set file names an unknown item: {exc}") from exc
    found = rules.sort_rules(rules.generate_rules(family, txs, constraints), key)
    rules.write_rules_csv(pl.artifact("rules.csv"), found, vocab.decode)
    rules.write_rules_json(pl.artifact("rules.json"), found, vocab.decode)
    print(f"rules={len(found)}")
    return EXIT_OK


def _item_ids(vocab, names, strict=True) -> list[int]:
    out = []
    for s in names:
        idx = vocab.get(s)
        if idx is None:
            if strict:
                raise ConfigError(f"unknown item {s!r}")
            idx = -1  # never present in any transaction
        out.append(idx)
    return out


def cmd_lattice(pl: Pipeline, args) -> int:
    txs, vocab = _nonempty_transactions(pl)
    bound = args.max_attributes or pl.section("lattice").get("max_attributes", fca.DEFAULT_MAX_ATTRIBUTES)
    ctx = fca.FormalContext.from_transactions(txs)
    query_attrs = None
    if args.query is not None:
        pos = {a: j for j, a in enumerate(ctx.attributes)}
        query_attrs = [pos[i] for i in _item_ids(vocab, args.query)]
    lattice = fca.build_lattice(ctx, bound)
    decode = vocab.decode
    pl.out.mkdir(parents=True, exist_ok=True)
    _write_text(pl.artifact("lattice.dot"), fca.export_dot(lattice, decode))
    fca.write_json(pl.artifact("concepts.json"), fca.concepts_to_json(lattice, decode))
    print(f"concepts={len(lattice)} cover_edges={len(lattice.cover_edges)}")
    if query_attrs is not None:
        c = fca.concept_index_for_intent(lattice, query_attrs)
        result = fca.query_to_json(lattice, c, args.mode or "filter", decode)
        fca.write_json(pl.artifact("query.json"), result)
        print(f"query concept={c} extent_percent={fca.fixed(lattice.concepts[c].extent_percent, 2)}")
    return EXIT_OK


def _window_spec(pl: Pipeline, args) -> dynamics.TimeWindowSpec:
    sec = pl.section("window")
    length = duration(args.window or sec.get("length", "1d"))
    step = args.step or sec.get("step")
    origin = sec.get("origin")
    try:
        return dynamics.TimeWindowSpec(
            length,
            duration(step) if step is not None else None,
            corpus.parse_timestamp(origin) if origin else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_dynamics(pl: Pipeline, args) -> int:
    spec = _window_spec(pl, args)
    threshold = rational(args.threshold) if args.threshold is not None else None
    if args.itemset is None and (args.antecedent is None or args.consequent is None):
        raise ConfigError("give --itemset, or both --antecedent and --consequent")
    txs, vocab = _nonempty_transactions(pl)
    if args.itemset is not None:
        series = dynamics.support_series(_item_ids(vocab, args.itemset, strict=False), txs, spec)
    else:
        try:
            series = dynamics.confidence_series(
                _item_ids(vocab, args.antecedent, strict=False), _item_ids(vocab, args.consequent, strict=False), txs, spec
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
    if all(p.value is None for p in series):
        raise EmptyDataError("series has no defined points")
    markers = dynamics.detect_markers(series, threshold)
    pl.out.mkdir(parents=True, exist_ok=True)
    dynamics.write_series_csv(pl.artifact("series.csv"), series)
    dynamics.write_markers_json(pl.artifact("markers.json"), markers)
    print(f"windows={len(series)} markers={len(markers)}")
    return EXIT_OK


def cmd_fixture(pl: Pipeline, args) -> int:
    target = Path(args.dir)
    path = fixtures.write_fixture(args.name, target, args.seed)
    print(f"wrote {path}")
    return EXIT_OK


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands repeat the global flags; SUPPRESS keeps them from resetting values given earlier
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="pipeline config JSON", **kw)
    p.add_argument("--out", help="output directory (overrides output_dir)", **kw)
    p.add_argument("--seed", type=int, help="seed for fixture generators", **({"default": 0} | kw))
    p.add_argument("-v", "--verbose", action="store_true", **kw)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="tweetmine", parents=[_global_flags(suppress=False)], description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="records -> transactions + vocabulary")
    p.add_argument("--input")
    p.add_argument("--format", choices=("jsonl", "csv"))
    p.add_argument("--min-count", type=int)
    p.add_argument("--keywords", nargs="+")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mine", parents=[common], help="frequent itemsets")
    p.add_argument("--min-support")
    p.add_argument("--max-length", type=int)
    p.add_argument("--oracle", action="store_true", help="use brute-force enumeration")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("rules", parents=[common], help="association rules from frequent itemsets")
    p.add_argument("--min-support")
    p.add_argument("--min-confidence")
    p.add_argument("--whitelist", nargs="+", help="allowed consequent items")
    p.add_argument("--max-antecedent", type=int)
    p.add_argument("--sort", choices=("support", "confidence", "lift"))
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("lattice", parents=[common], help="concept lattice, DOT export, ideal/filter queries")
    p.add_argument("--query", nargs="*", help="intent items; empty for the top concept")
    p.add_argument("--mode", choices=("ideal", "filter"))
    p.add_argument("--max-attributes", type=int)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("dynamics", parents=[common], help="windowed support/confidence series and markers")
    p.add_argument("--itemset", nargs="+")
    p.add_argument("--antecedent", nargs="+")
    p.add_argument("--consequent", nargs="+")
    p.add_argument("--threshold")
    p.add_argument("--window")
    p.add_argument("--step")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("fixture", parents=[common], help="write a seeded synthetic corpus and config")
    p.add_argument("name", choices=fixtures.FIXTURES)
    p.add_argument("dir")
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        pl = load_pipeline(args)
        return args.func(pl, args)
    except (ConfigError, OSError, ValueError) as exc:
        if isinstance(exc, OracleGuardError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ORACLE
        if isinstance(exc, LatticeBoundError):
            print(f"error: {exc}\nhint: supply a semantic frame to reduce the attribute set", file=sys.stderr)
            return EXIT_LATTICE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EmptyDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY


if __name__ == "__main__":
    sys.exit(main())
