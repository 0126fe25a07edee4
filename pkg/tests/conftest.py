import random
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tweetmine.corpus import Transaction  # noqa: E402

T0 = datetime(2012, 7, 26, tzinfo=timezone.utc)


def random_rows(rng: random.Random, n_tx: int, n_items: int, density: float | None = None):
    density = rng.uniform(0.1, 0.6) if density is None else density
    rows = []
    for _ in range(n_tx):
        row = tuple(i for i in range(n_items) if rng.random() < density)
        rows.append(row or (rng.randrange(n_items),))
    return rows


def as_transactions(rows, start=T0, spacing=timedelta(hours=1)):
    return [Transaction(f"t{i}", start + i * spacing, tuple(sorted(set(r)))) for i, r in enumerate(rows)]


def random_incidence(rng: random.Random, max_objects=10, max_attrs=10, min_attrs=1):
    g = rng.randint(1, max_objects)
    m = rng.randint(min_attrs, max_attrs)
    p = rng.uniform(0.2, 0.7)
    return [{j for j in range(m) if rng.random() < p} for _ in range(g)], m


@pytest.fixture
def rng():
    return random.Random(1234)


def pipeline(records, min_count=1, stopwords=(), frame=None):
    """Records -> (transactions, vocabulary) with the library defaults."""
    from tweetmine.corpus import build_transactions, build_vocabulary

    vocab = build_vocabulary(records, min_count, stopwords)
    return build_transactions(records, vocab, frame).transactions, vocab


@pytest.fixture(scope="session")
def eurovision():
    from tweetmine.fixtures import STOPWORDS, eurovision_records

    return pipeline(eurovision_records(0), stopwords=STOPWORDS)


# acceptance reporting: one line per criterion in the terminal summary
_criteria: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    entry = _criteria.setdefault(mark.args[0], [True, ""])
    if rep.failed:
        entry[0] = False
        entry[1] = str(rep.longrepr).strip().splitlines()[-1][:120]


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_criteria, key=lambda s: int(s.split(".")[0])):
        ok, why = _criteria[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}" + ("" if ok else f"  -- {why}"))
