"""Seeded synthetic corpora with known counts.

Each builder returns message records whose token statistics are fixed by
construction; ``seed`` only permutes record order and timestamps within a
day, never the counts.
"""

from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone
from pathlib import Path

from .corpus import MessageRecord, format_timestamp

STOPWORDS = ("a", "an", "and", "eurovision", "for", "in", "is", "of", "on", "the", "to", "who", "will")

# (antecedent tokens, transactions with win, transactions without win)
EUROVISION_BLOCKS = [
    ("azerbaijan denmark norway russia ukraine", 4, 1),
    ("denmark norway", 5, 0),
    ("denmark favourites", 7, 0),
    ("azerbaijan norway", 3, 0),
    ("denmark ukraine", 1, 0),
    ("azerbaijan russia", 1, 0),
    ("azerbaijan denmark", 1, 1),
    ("finland sweden", 5, 0),
]
EUROVISION_N = 616
EUROVISION_WIN = 422

# intent -> number of transactions holding it, out of OLYMPIC_N
OLYMPIC_BLOCKS = [
    ("sharapova aug_04 gold", 300),
    ("sharapova aug_05 gold", 7),
    ("sharapova aug_01 wins", 4),
    ("sharapova aug_04 wins", 181),
    ("williams aug_04 gold", 376),
    ("williams aug_05 gold", 79),
    ("williams aug_01 wins", 5),
    ("williams aug_04 wins", 197),
    ("aug_5 federer murrey man", 200),
]
OLYMPIC_N = 10_000
OLYMPIC_FILLER = ("final", "women single", "men single", "gold", "silver", "final men", "final women", "aug_01 final", "double")
OLYMPIC_FRAME = {
    "round": ["final"],
    "gender": ["man", "men", "women"],
    "type": ["double", "single"],
    "date": ["aug_01", "aug_04", "aug_05", "aug_5"],
    "result": ["gold", "silver", "wins"],
    "athlete": ["federer", "murrey", "sharapova", "williams"],
}

# gold transactions per day and how many of them also mention williams
DYNAMICS_DAYS = 14
DYNAMICS_GOLD_PER_DAY = 20
DYNAMICS_WILLIAMS = (2, 3, 4, 9, 5, 6, 7, 8, 10, 16, 8, 5, 4, 3)
DYNAMICS_PEAK_DAY = 10
DYNAMICS_THRESHOLD = "7/10"


def _stamp(day: datetime, rng: random.Random) -> datetime:
    return day + timedelta(seconds=rng.randrange(86_400))


def _finish(texts: list[tuple[datetime, str]], prefix: str, rng: random.Random) -> list[MessageRecord]:
    rng.shuffle(texts)
    return [MessageRecord(f"{prefix}{i:05d}", ts, text) for i, (ts, text) in enumerate(texts)]


def eurovision_records(seed: int = 0) -> list[MessageRecord]:
    """616 tweets; 422 mention win; pair/tuple counts reproduce the published rule tables."""
    rng = random.Random(seed)
    day = datetime(2013, 5, 17, tzinfo=timezone.utc)
    texts = []
    win_used = 0
    for tokens, with_win, without in EUROVISION_BLOCKS:
        texts += [(_stamp(day, rng), f"#eurovision {tokens} will win") for _ in range(with_win)]
        texts += [(_stamp(day, rng), f"#eurovision {tokens} on the stage") for _ in range(without)]
        win_used += with_win
    n_plain = EUROVISION_N - len(texts)
    n_plain_win = EUROVISION_WIN - win_used
    texts += [(_stamp(day, rng), "who will win #eurovision") for _ in range(n_plain_win)]
    texts += [(_stamp(day, rng), "the #eurovision song tonight") for _ in range(n_plain - n_plain_win)]
    return _finish(texts, "ev", rng)


def olympic_records(seed: int = 0) -> list[MessageRecord]:
    """10,000 tweets whose thematic intents have the published extent percentages."""
    rng = random.Random(seed)
    start = datetime(2012, 7, 26, tzinfo=timezone.utc)
    texts = []
    for tokens, k in OLYMPIC_BLOCKS:
        texts += [(_stamp(start + timedelta(days=rng.randrange(21)), rng), f"{tokens} #london2012 tennis") for _ in range(k)]
    for i in range(OLYMPIC_N - len(texts)):
        filler = OLYMPIC_FILLER[i % len(OLYMPIC_FILLER)]
        texts.append((_stamp(start + timedelta(days=rng.randrange(21)), rng), f"the {filler} in #london2012 tennis"))
    return _finish(texts, "ol", rng)


def dynamics_records(seed: int = 0) -> list[MessageRecord]:
    """14 daily windows; confidence of gold -> williams peaks on day 10.

    Each day has 20 gold tweets (of which DYNAMICS_WILLIAMS[d] mention
    williams) plus 10 unrelated ones.
    """
    rng = random.Random(seed)
    day0 = datetime(2012, 7, 26, tzinfo=timezone.utc)
    texts = []
    for d in range(DYNAMICS_DAYS):
        day = day0 + timedelta(days=d)
        k = DYNAMICS_WILLIAMS[d]
        texts += [(_stamp(day, rng), "williams gold tennis") for _ in range(k)]
        texts += [(_stamp(day, rng), "sharapova gold tennis") for _ in range(DYNAMICS_GOLD_PER_DAY - k)]
        texts += [(_stamp(day, rng), "final tennis") for _ in range(10)]
    return _finish(texts, "dy", rng)


def write_jsonl(path: str | Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({"id": r.id, "timestamp": format_timestamp(r.timestamp), "text": r.text}) + "\n")


def write_fixture(name: str, directory: str | Path, seed: int = 0) -> Path:
    """Write a corpus plus a ready-to-run pipeline config; return the config path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "stopwords.txt").write_text("\n".join(STOPWORDS) + "\n", encoding="utf-8")
    config: dict = {"input": "corpus.jsonl", "format": "jsonl", "stopwords": "stopwords.txt", "output_dir": "out"}
    if name == "eurovision":
        records = eurovision_records(seed)
        config.update(
            keywords=["eurovision"],
            min_count=1,
            mining={"min_support": "0.006"},
            rules={"min_confidence": "0", "consequent_whitelist": ["win"], "sort_key": "support"},
        )
    elif name == "olympic":
        records = olympic_records(seed)
        (d / "frame.json").write_text(json.dumps(OLYMPIC_FRAME, indent=2) + "\n", encoding="utf-8")
        config.update(keywords=["london2012"], min_count=10, frame="frame.json", mining={"min_support": "0.0001"})
    elif name == "dynamics":
        records = dynamics_records(seed)
        config.update(min_count=1, window={"length": "1d"})
    else:
        raise ValueError(f"unknown fixture {name!r}")
    write_jsonl(d / "corpus.jsonl", records)
    path = d / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return path


FIXTURES = ("eurovision", "olympic", "dynamics")
