"""Acceptance suite: one criterion per test, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import hashlib
import json
import random
import shutil
import time
from contextlib import contextmanager
from pathlib import Path

import pytest
import requests

from arkslice.errors import (
    BadNaan,
    DuplicateName,
    InvalidRange,
    MalformedPid,
)
from arkslice.pid_grammar import (
    PidQuery,
    RangeSelector,
    RangeTerm,
    effective_key_set,
    parse_pid,
    serialize_pid,
)
from arkslice.resolver import Minter, Redirect
from arkslice.timeseries_store import render_csv
from arkslice.type_registry import (
    compute_correlation,
    compute_properties,
    infer_column_type,
)
from arkslice.cli import main as cli_main

import oracle
from conftest import DATASET, NAAN, make_app, write_fixture
from test_type_registry import make_table


@contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        print(f"\n[acceptance] {number}. {title}: FAIL")
        raise
    print(f"\n[acceptance] {number}. {title}: PASS")


CANONICAL_PID_BODIES = [
    f"{DATASET}.DWE.V@13332~13400",
    f"{DATASET}.DWE.V@*",
    f"{DATASET}.DWE.V@13332~13400+24300~25500",
    f"{DATASET}.DWE.V+I@*",
    f"{DATASET}.HPE+DWE+WOE.V+I@*",
    f"{DATASET}.DWE.V@_24300~25500",
]


def test_1_canonical_pid_conformance(live_server, data_dir):
    with criterion(1, "canonical PID conformance"):
        app, base = live_server
        start = time.monotonic()
        for body in CANONICAL_PID_BODIES:
            pid = f"ark:/{NAAN}/{body}"
            parse_pid(pid)  # parses
            r = requests.get(f"{base}/{pid}")
            assert r.status_code == 200, pid
            assert r.text == oracle.resolve_csv(data_dir, pid), pid
        assert time.monotonic() - start < 5.0


def _random_query(rng):
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-"

    def name():
        return "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 8)))

    def namelist():
        names = set()
        while len(names) < rng.randint(1, 4):
            names.add(name())
        return tuple(names)

    if rng.random() < 0.3:
        selector = RangeSelector.all_rows()
    else:
        terms = []
        for _ in range(rng.randint(1, 4)):
            a = rng.randint(0, 10**7)
            b = rng.randint(0, 10**7)
            terms.append(RangeTerm(min(a, b), max(a, b), rng.random() < 0.4))
        selector = RangeSelector(terms=tuple(terms))
    return PidQuery(
        naan="".join(rng.choice("0123456789") for _ in range(rng.randint(1, 6))),
        dataset=name(),
        sensors=namelist(),
        measurements=namelist(),
        selector=selector,
    )


def _corrupt(rng, q):
    """Return (corrupted PID string, expected error class)."""
    sensors = "+".join(q.sensors)
    measurements = "+".join(q.measurements)
    kind = rng.randrange(5)
    if kind == 0:  # reversed bounds
        return (
            f"ark:/{q.naan}/{q.dataset}.{sensors}.{measurements}@9~5",
            InvalidRange,
        )
    if kind == 1:  # non-digit NAAN
        return (
            f"ark:/{q.naan}x/{q.dataset}.{sensors}.{measurements}@*",
            BadNaan,
        )
    if kind == 2:  # repeated sensor
        dup = f"{q.sensors[0]}+{sensors}"
        return (
            f"ark:/{q.naan}/{q.dataset}.{dup}.{measurements}@*",
            DuplicateName,
        )
    if kind == 3:  # missing selector separator
        return (f"ark:/{q.naan}/{q.dataset}.{sensors}.{measurements}", MalformedPid)
    # empty measurement list
    return (f"ark:/{q.naan}/{q.dataset}.{sensors}.@*", MalformedPid)


def test_2_grammar_round_trip():
    with criterion(2, "grammar round-trip"):
        rng = random.Random(20260823)
        start = time.monotonic()
        for _ in range(10_000):
            q = _random_query(rng)
            assert parse_pid(serialize_pid(q)) == q
        for _ in range(1_000):
            text, expected = _corrupt(rng, _random_query(rng))
            with pytest.raises(expected):
                parse_pid(text)
        assert time.monotonic() - start < 10.0


def test_3_exclusion_complement():
    with criterion(3, "exclusion complement"):
        rng = random.Random(3)
        for _ in range(1_000):
            domain = sorted(rng.sample(range(0, 5000), rng.randint(1, 200)))
            a, b = sorted((rng.randint(0, 5000), rng.randint(0, 5000)))
            incl = effective_key_set(
                RangeSelector.of(RangeTerm(a, b)), domain)
            excl = effective_key_set(
                RangeSelector.of(RangeTerm(a, b, exclude=True)), domain)
            assert not set(incl) & set(excl)
            assert sorted(incl + excl) == domain


def test_4_kfold_properties(tmp_path):
    with criterion(4, "k-fold properties"):
        app = make_app(tmp_path)
        rng = random.Random(4)
        for size in (10, 57, 1000):
            name = f"Fold-{size}"
            ds_dir = tmp_path / "data" / name
            ds_dir.mkdir(parents=True)
            keys = sorted(rng.sample(range(0, size * 5), size))
            lines = ["ts,V"] + [f"{k},{k}.5" for k in keys]
            (ds_dir / "S.csv").write_text("\n".join(lines) + "\n")
            app.catalog.register_dataset(app.source("local"), name)

            wildcard = app.resolver.resolve(NAAN, f"{name}.S.V@*")
            all_ts = [t for t, _ in wildcard.slice.rows]
            assert all_ts == keys

            for k in (2, 3, 5, 10):
                pairs = app.resolver.crossfold_pids(name, ["S"], ["V"], k)
                assert len(pairs) == k
                seen = []
                sizes = []
                for train_pid, test_pid in pairs:
                    # Through the full resolve path, not the grammar alone.
                    train = app.resolver.resolve(
                        NAAN, train_pid.split("/", 2)[2])
                    test = app.resolver.resolve(
                        NAAN, test_pid.split("/", 2)[2])
                    train_ts = [t for t, _ in train.slice.rows]
                    test_ts = [t for t, _ in test.slice.rows]
                    assert not set(train_ts) & set(test_ts)
                    assert sorted(train_ts + test_ts) == all_ts
                    seen.extend(test_ts)
                    sizes.append(len(test_ts))
                assert sorted(seen) == all_ts  # disjoint and exhaustive
                assert max(sizes) - min(sizes) <= 1


def test_5_mint_uniqueness_and_persistence(tmp_path):
    with criterion(5, "mint uniqueness & persistence"):
        app = make_app(tmp_path)
        log = Path(app.config.state_dir) / "mints.log"
        targets = {}
        for i in range(500):
            b = app.minter.mint(f"https://example.org/resource/{i}")
            targets[b.noid] = b.target
        # Simulated restart: replay the log into a fresh minter.
        app.minter = Minter(log)
        app.resolver.minter = app.minter
        pid_target = f"ark:/{NAAN}/{DATASET}.DWE.V@13332~13400"
        pid_noid = None
        for i in range(500):
            b = app.minter.mint(pid_target)
            targets[b.noid] = b.target
            pid_noid = pid_noid or b.noid
        assert len(targets) == 1000

        for noid, target in targets.items():
            result = app.resolver.resolve(NAAN, noid)
            assert isinstance(result, Redirect)
            assert result.status == 302
            expected = target if not target.startswith("ark:") \
                else f"{app.resolver.base_url}/{target}"
            assert result.location == expected

        # Redirect-then-resolve equals direct resolve for PID targets.
        direct = app.resolver.resolve(NAAN, pid_target.split("/", 2)[2])
        redirect = app.resolver.resolve(NAAN, pid_noid)
        followed_body = redirect.location.split("/ark:/", 1)[1].split("/", 1)[1]
        followed = app.resolver.resolve(NAAN, followed_body)
        assert render_csv(followed.slice) == render_csv(direct.slice)


def test_6_type_and_properties_fixtures():
    with criterion(6, "type/properties fixtures"):
        cases = [
            (["1", "42", "-7"], ("number", "integer")),
            (["118.1", "119.0"], ("number", "real")),
            (["1.2e5", "3E-2"], ("number", "scientific")),
            (["12%", "5%"], ("number", "percentage")),
            (["yes", "no"], ("boolean", "yes/no")),
            (["hello", "world"], ("text", "varchar")),
        ]
        for cells, expected in cases:
            desc = infer_column_type(cells)
            assert (desc.basic, desc.derived) == expected, cells

        p = compute_properties([1, 2, 3, 4, 5])
        assert p.mean == 3
        assert p.skewness == 0
        assert p.outlier_count == 0

        up = compute_correlation(make_table({"X": [1, 2, 3], "Y": [2, 4, 6]}))
        down = compute_correlation(make_table({"X": [1, 2, 3], "Y": [3, 2, 1]}))
        assert abs(up.values[0][1] - 1.0) <= 1e-12
        assert abs(down.values[0][1] + 1.0) <= 1e-12


def test_7_crawl_change_detection(tmp_path):
    with criterion(7, "crawl change detection"):
        app = make_app(tmp_path)
        data_root = tmp_path / "data"
        write_fixture(data_root, dataset="AMPds-added")
        dwe = data_root / DATASET / "DWE.csv"
        dwe.write_text(dwe.read_text() + "25630,1.0,2.0\n")
        extra_root = data_root / "AMPds-doomed"
        write_fixture(data_root, dataset="AMPds-doomed")
        app.catalog.register_dataset(app.source("local"), "AMPds-doomed")
        shutil.rmtree(extra_root)

        events = app.catalog.crawl()
        kinds = {e.dataset: e.kind for e in events}
        assert kinds == {
            "AMPds-added": "added",
            DATASET: "modified",
            "AMPds-doomed": "removed",
        }
        assert len(events) == 3
        assert app.catalog.crawl() == []


def _state_digest(state_dir: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(state_dir.rglob("*")):
        if path.is_file():
            h.update(str(path.relative_to(state_dir)).encode())
            h.update(path.read_bytes())
    return h.hexdigest()


def test_8_determinism(live_server, tmp_path, capsys):
    with criterion(8, "determinism"):
        app, base = live_server
        state = Path(app.config.state_dir)

        config_path = tmp_path / "cli-config.json"
        config_path.write_text(json.dumps({
            "naans": [NAAN],
            "state_dir": app.config.state_dir,
            "base_url": base,
            "sources": [{"id": "local", "root": str(tmp_path / "data")}],
        }))

        before = _state_digest(state)
        for body in CANONICAL_PID_BODIES:
            url = f"{base}/ark:/{NAAN}/{body}"
            first = requests.get(url)
            second = requests.get(url)
            assert first.status_code == second.status_code == 200
            assert first.content == second.content

            outs = []
            for _ in range(2):
                code = cli_main(
                    ["--config", str(config_path), "resolve", f"ark:/{NAAN}/{body}"]
                )
                assert code == 0
                outs.append(capsys.readouterr().out)
            assert outs[0] == outs[1]
            assert outs[0].encode() == first.content
        assert _state_digest(state) == before
