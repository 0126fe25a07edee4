"""End-to-end exit criteria. Run ``pytest tests/test_acceptance.py`` for a
PASS/FAIL line per criterion in the terminal summary."""

import csv
import json
import random
import time
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import pytest

from conftest import as_transactions, pipeline, random_rows
from oracles import all_concepts, hasse_edges, prime_attrs, prime_objects
from tweetmine import fixtures
from tweetmine.cli import main
from tweetmine.corpus import SemanticFrame
from tweetmine.dynamics import TimeWindowSpec, confidence_series, detect_markers, support_series
from tweetmine.fca import (
    FormalContext,
    build_lattice,
    concept_for_intent,
    derive_attrs_to_objects,
    derive_objects_to_attrs,
    fca_rules,
    order_filter,
    order_ideal,
)
from tweetmine.fmt import fixed
from tweetmine.itemsets import MiningParams, apriori, brute_force_frequent, support
from tweetmine.rules import RuleConstraints, generate_rules

criterion = pytest.mark.criterion

# Tables 2-4 as printed: (row, antecedent, support, confidence, lift); consequent is always "win"
PUBLISHED_RULES = [
    (1, "denmark, norway", "0.014610390", "0.9000000", "1.3137441"),
    (2, "denmark, favourites", "0.011363636", "1.0000000", "1.4597156"),
    (3, "azerbaijan, norway", "0.011363636", "0.8750000", "1.2772512"),
    (4, "denmark, ukraine", "0.008116883", "0.8333333", "1.2164297"),
    (5, "azerbaijan, russia", "0.008116883", "0.8333333", "1.2164297"),
    (6, "azerbaijan, denmark", "0.008116883", "0.7142857", "1.0426540"),
    (7, "finland, sweden", "0.008116883", "1.0000000", "1.4597156"),
    (8, "russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (9, "azerbaijan, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (10, "norway, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (14, "azerbaijan, russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (15, "norway, russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (16, "denmark, russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (17, "azerbaijan, norway, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (18, "azerbaijan, denmark, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (19, "denmark, norway, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (20, "azerbaijan, norway, russia", "0.006493506", "0.8000000", "1.1677725"),
    (21, "azerbaijan, denmark, russia", "0.006493506", "0.8000000", "1.1677725"),
    (22, "denmark, norway, russia", "0.006493506", "0.8000000", "1.1677725"),
    (23, "azerbaijan, denmark, norway", "0.006493506", "0.8000000", "1.1677725"),
    (24, "azerbaijan, norway, russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (25, "azerbaijan, denmark, russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (26, "denmark, norway, russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (27, "azerbaijan, denmark, norway, ukraine", "0.006493506", "0.8000000", "1.1677725"),
    (28, "azerbaijan, denmark, norway, russia", "0.006493506", "0.8000000", "1.1677725"),
    (29, "azerbaijan, denmark, norway, russia, ukraine", "0.006493506", "0.8000000", "1.1677725"),
]

# intent -> extent percentage as printed
PUBLISHED_EXTENTS = {
    ("sharapova", "aug_04", "gold"): "3.0",
    ("sharapova", "aug_05", "gold"): "0.07",
    ("sharapova", "aug_01", "wins"): "0.04",
    ("sharapova", "aug_04", "wins"): "1.81",
    ("williams", "aug_04", "gold"): "3.76",
    ("williams", "aug_05", "gold"): "0.79",
    ("williams", "aug_01", "wins"): "0.05",
    ("williams", "aug_04", "wins"): "1.97",
    ("aug_5", "federer", "murrey", "man"): "2",
}


def reconstruct_denominator(values, tol=Fraction(1, 10**9), limit=5000):
    """Smallest N such that every value lies within half a printed ulp of some k/N."""
    fr = [Fraction(v) for v in values]
    for n in range(1, limit):
        if all(abs(round(v * n) / Fraction(n) - v) <= tol / 2 for v in fr):
            return n
    raise AssertionError("no common denominator found")


# ---------------------------------------------------------------- 1


@criterion("1. rational reconstruction of Tables 2-4")
def test_c1_rational_reconstruction():
    assert len(PUBLISHED_RULES) + 3 == 29  # rows 11-13 are not printed
    n = reconstruct_denominator([s for _, _, s, _, _ in PUBLISHED_RULES])
    assert n == 616
    counts = {s: round(Fraction(s) * n) for _, _, s, _, _ in PUBLISHED_RULES}
    assert counts == {"0.014610390": 9, "0.011363636": 7, "0.008116883": 5, "0.006493506": 4}
    # lift / confidence = 1 / support(win) for every row
    ratios = [Fraction(l) / Fraction(c) for _, _, _, c, l in PUBLISHED_RULES]
    win = round(n / max(ratios))
    assert win == 422
    assert all(abs(1 / r - Fraction(win, n)) < Fraction(1, 10**6) for r in ratios)
    for _, _, _, c, l in PUBLISHED_RULES:
        assert abs(float(c) * n / win - float(l)) < 1e-6
    # the two rows quoted alongside Table 2 in the metric examples
    assert fixed(Fraction(9, 10) * Fraction(n, win), 7) == "1.3137441"
    assert fixed(Fraction(5, 7) * Fraction(n, win), 7) == "1.0426540"


# ---------------------------------------------------------------- 2


def run_eurovision(workdir: Path) -> Path:
    cfg = str(fixtures.write_fixture("eurovision", workdir))
    for cmd in ("ingest", "mine", "rules"):
        assert main(["--config", cfg, cmd]) == 0
    return workdir / "out"


@criterion("2. Table 2 reproduced from the reconstructed corpus")
def test_c2_table_two(tmp_path):
    t0 = time.perf_counter()
    out = run_eurovision(tmp_path)
    elapsed = time.perf_counter() - t0

    txs, vocab = pipeline(fixtures.eurovision_records(0), stopwords=fixtures.STOPWORDS)
    cnt = lambda *words: sum(1 for t in txs if set(vocab.encode(words)) <= set(t.items))
    assert len(txs) == 616 and cnt("win") == 422
    for pair, total, with_win in [
        (("denmark", "norway"), 10, 9),
        (("denmark", "favourites"), 7, 7),
        (("azerbaijan", "norway"), 8, 7),
        (("finland", "sweden"), 5, 5),
        (("azerbaijan", "denmark"), 7, 5),
    ]:
        assert (cnt(*pair), cnt(*pair, "win")) == (total, with_win)

    with open(out / "rules.csv", newline="") as fh:
        emitted = {(r["antecedent"], r["consequent"]): r for r in csv.DictReader(fh)}
    assert {c for _, c in emitted} == {"win"}
    for row, ante, s, c, l in PUBLISHED_RULES:
        got = emitted[(" ".join(sorted(ante.split(", "))), "win")]
        for field, want in (("support", s), ("confidence", c), ("lift", l)):
            assert fixed(Fraction(got[field]), 7) == fixed(Fraction(want), 7), (row, field)
        if row in (1, 2):
            assert (got["support"], got["confidence"], got["lift"]) == (s, c, l)
    assert elapsed < 5


# ---------------------------------------------------------------- 3


@criterion("3. apriori equals brute force on 200 random corpora")
def test_c3_apriori_exact():
    rng = random.Random(2013)
    t0 = time.perf_counter()
    for _ in range(200):
        rows = random_rows(rng, rng.randint(1, 200), rng.randint(1, 15), density=rng.uniform(0.05, 0.35))
        params = MiningParams(Fraction(rng.randint(0, 30), 100))
        fast = [(f.items, f.count) for f in apriori(rows, params)]
        slow = [(f.items, f.count) for f in brute_force_frequent(rows, params)]
        assert fast == slow
    assert time.perf_counter() - t0 < 60


# ---------------------------------------------------------------- 4


@criterion("4. Galois connection laws on 100 random contexts")
def test_c4_galois():
    rng = random.Random(4)
    violations = 0
    for _ in range(100):
        g, m = rng.randint(1, 10), rng.randint(1, 10)
        inc = [{j for j in range(m) if rng.random() < 0.5} for _ in range(g)]
        ctx = FormalContext(list(range(g)), list(range(m)), inc)
        up = lambda a: derive_attrs_to_objects(ctx, a)
        down = lambda o: derive_objects_to_attrs(ctx, o)
        for _ in range(50):
            a = {j for j in range(m) if rng.random() < 0.5}
            b = a | {j for j in range(m) if rng.random() < 0.3}
            o = {i for i in range(g) if rng.random() < 0.5}
            p = o | {i for i in range(g) if rng.random() < 0.3}
            checks = [
                a <= down(up(a)),
                o <= up(down(o)),
                up(a) == up(down(up(a))),
                down(o) == down(up(down(o))),
                up(b) <= up(a),
                down(p) <= down(o),
                up(a) == prime_attrs(inc, a),
                down(o) == prime_objects(inc, o, m),
            ]
            violations += checks.count(False)
    assert violations == 0


# ---------------------------------------------------------------- 5 and 8


def lattice_contexts():
    rng = random.Random(5)
    out = []
    for _ in range(50):
        g, m = rng.randint(1, 15), rng.randint(1, 12)
        p = rng.uniform(0.2, 0.7)
        out.append(([{j for j in range(m) if rng.random() < p} for _ in range(g)], m))
    return out


@criterion("5. lattice equals closure oracle and naive transitive reduction")
def test_c5_lattice_exact():
    t0 = time.perf_counter()
    for inc, m in lattice_contexts():
        lat = build_lattice(FormalContext(list(range(len(inc))), list(range(m)), inc))
        pairs = [(c.extent, c.intent) for c in lat.concepts]
        assert len(pairs) == len(set(pairs))
        assert set(pairs) == all_concepts(inc, m)
        assert set(lat.cover_edges) == hasse_edges(pairs)
    assert time.perf_counter() - t0 < 30


@criterion("8. order ideal / filter laws")
def test_c8_ideal_filter():
    rng = random.Random(8)
    violations = 0
    for inc, m in lattice_contexts():
        lat = build_lattice(FormalContext(list(range(len(inc))), list(range(m)), inc))
        cs = lat.concepts
        for c in rng.sample(range(len(cs)), min(5, len(cs))):
            ideal, filt = order_ideal(lat, c), order_filter(lat, c)
            for x in ideal:
                violations += sum(1 for y in range(len(cs)) if cs[y].leq(cs[x]) and y not in ideal)
            for x in filt:
                violations += sum(1 for y in range(len(cs)) if cs[x].leq(cs[y]) and y not in filt)
            violations += ideal & filt != {c}
    assert violations == 0


# ---------------------------------------------------------------- 6 and 7


@pytest.fixture(scope="module")
def olympic():
    frame = SemanticFrame(fixtures.OLYMPIC_FRAME)
    txs, vocab = pipeline(fixtures.olympic_records(0), min_count=10, stopwords=fixtures.STOPWORDS, frame=frame)
    ctx = FormalContext.from_transactions(txs)
    return txs, vocab, ctx, build_lattice(ctx)


def attrs_for(ctx, vocab, words):
    pos = {a: j for j, a in enumerate(ctx.attributes)}
    return {pos[vocab.id_of(w)] for w in words}


@criterion("6. Olympic extent percentages")
def test_c6_olympic_extents(olympic):
    txs, vocab, ctx, lat = olympic
    assert len(txs) == 10_000
    got = {}
    for intent, printed in PUBLISHED_EXTENTS.items():
        c = concept_for_intent(lat, attrs_for(ctx, vocab, intent))
        assert {vocab.item_of(ctx.attributes[j]) for j in c.intent} == set(intent)
        assert fixed(c.extent_percent, 2) == fixed(Fraction(printed), 2), intent
        got[intent] = c.extent_percent
    assert got[("sharapova", "aug_04", "gold")] < got[("williams", "aug_04", "gold")]


@criterion("7. concept extent ratio equals intent support")
def test_c7_intent_support(olympic):
    txs, vocab, ctx, lat = olympic
    for c in lat.concepts:
        assert c.extent_fraction == support([ctx.attributes[j] for j in c.intent], txs)


# ---------------------------------------------------------------- 9


@criterion("9. dynamics consistency and peak/threshold markers")
def test_c9_dynamics():
    t0 = time.perf_counter()
    rng = random.Random(9)
    rows = random_rows(rng, 300, 6)
    txs = as_transactions(rows)
    whole = TimeWindowSpec(window_length=txs[-1].timestamp - txs[0].timestamp + TimeWindowSpec().window_length)
    (p,) = support_series((0, 1), txs, whole)
    assert p.value == support((0, 1), rows)
    (q,) = confidence_series((0,), (1,), txs, whole)
    assert q.value == support((0, 1), rows) / support((0,), rows)

    txs, vocab = pipeline(fixtures.dynamics_records(0))
    gold, williams = vocab.encode(["gold"]), vocab.encode(["williams"])
    series = confidence_series(gold, williams, txs)
    assert len(series) == 14
    day9, day10 = series[8].value, series[9].value
    assert day9 < day10
    for thr in (day9 + Fraction(1, 100), (day9 + day10) / 2, day10 - Fraction(1, 100)):
        events = detect_markers(series, thr)
        (gmax,) = [e for e in events if e.kind == "global_maximum"]
        ups = [e for e in events if e.kind == "threshold_up_crossing"]
        assert gmax.window_start == series[9].window_start
        assert [e.window_start for e in ups] == [series[9].window_start]
    assert time.perf_counter() - t0 < 5


# ---------------------------------------------------------------- 10


@criterion("10. fca_rules equals generate_rules")
def test_c10_cross_module():
    rng = random.Random(10)
    for _ in range(50):
        rows = random_rows(rng, rng.randint(1, 25), rng.randint(1, 7))
        c = RuleConstraints(
            Fraction(rng.randint(0, 25), 100),
            Fraction(rng.randint(0, 10), 10),
            rng.choice([None, frozenset({0})]),
            rng.choice([None, 1, 2]),
            rng.choice([None, 1]),
        )
        want = generate_rules(apriori(rows, MiningParams(c.min_support)), rows, c)
        got = fca_rules(FormalContext.from_transactions(rows), c)
        assert sorted(got, key=repr) == sorted(want, key=repr)


# ---------------------------------------------------------------- 11


def run_olympic(workdir: Path) -> Path:
    cfg = str(fixtures.write_fixture("olympic", workdir))
    assert main(["--config", cfg, "ingest"]) == 0
    assert main(["--config", cfg, "lattice", "--query", "aug_5", "federer", "murrey", "man", "--mode", "ideal"]) == 0
    q = json.loads((workdir / "out" / "query.json").read_text())
    assert q["concept"]["extent_percent"] == 2.0
    return workdir / "out"


def run_dynamics(workdir: Path) -> Path:
    cfg = str(fixtures.write_fixture("dynamics", workdir))
    assert main(["--config", cfg, "ingest"]) == 0
    args = ["--config", cfg, "dynamics", "--antecedent", "gold", "--consequent", "williams"]
    assert main(args + ["--threshold", fixtures.DYNAMICS_THRESHOLD]) == 0
    return workdir / "out"


def snapshot(out: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@criterion("11. byte-identical outputs across runs")
@pytest.mark.parametrize("run", [run_eurovision, run_olympic, run_dynamics], ids=["c2", "c6", "c9"])
def test_c11_determinism(tmp_path, run):
    first = snapshot(run(tmp_path / "a"))
    second = snapshot(run(tmp_path / "b"))
    assert first and first == second
