import json

import pytest

from cubesum.cli import run_enumerate, run_scan
from cubesum.enumeration import MAX_K
from cubesum.fixtures import minimal_conductor_table, minimal_k_table
from cubesum.ledger import (
    CandidateRecord, Checkpoint, LedgerError, append, compact, fingerprint, load_checkpoint, merge,
    parse_lines, query, read_ledger, save_checkpoint, write_ledger,
)
from cubesum.surfaces import ScanFilters
from cubesum.verify import fixture_ledger

BIG_X = "-138658831412368575/4"


def _rec(k, rank_lb=0, sb=None, tag=""):
    return CandidateRecord(k=str(k), selmer_bound=sb, rank_lb=rank_lb, provenance={"tag": tag})


def test_merge_prefers_rank_then_selmer_then_newest():
    a = [_rec(19, 5, 6, "a")]
    b = [_rec(19, 6, 6, "b")]
    assert merge(a, b)[0].provenance["tag"] == "b"
    assert merge(b, a)[0].provenance["tag"] == "b"
    c = [_rec(19, 5, 7, "c")]
    assert merge(a, c)[0].provenance["tag"] == "c"
    d = [_rec(19, 5, 6, "d")]
    assert merge(a, d)[0].provenance["tag"] == "d"
    assert merge(d, a)[0].provenance["tag"] == "a"


def test_merge_idempotent_and_sorted():
    recs = [_rec(k, k % 3, 3) for k in (91, 19, 6, 19, 657)]
    once = merge(recs)
    assert [r.k for r in once] == ["6", "19", "91", "657"]
    assert [r.to_line() for r in merge(once)] == [r.to_line() for r in once]
    assert [r.to_line() for r in merge(once, once)] == [r.to_line() for r in once]


def test_malformed_line_reports_line_number(tmp_path):
    path = tmp_path / "l.jsonl"
    path.write_text(_rec(6).to_line() + "\n" + "{not json\n")
    with pytest.raises(LedgerError) as exc:
        read_ledger(path)
    assert exc.value.line == 2
    with pytest.raises(LedgerError) as exc:
        parse_lines(['{"k": "6", "bogus": 1}'])
    assert exc.value.line == 1


def test_record_validation():
    with pytest.raises(LedgerError):
        CandidateRecord(k="6", selmer_bound=1, rank_lb=2)
    with pytest.raises(LedgerError):
        CandidateRecord(k="-6")
    with pytest.raises(LedgerError):
        CandidateRecord(k="6", status="maybe")


def test_round_trip_keeps_point_strings_byte_identical(tmp_path):
    rec = CandidateRecord(k="1683200989470", factors=[["2", 1], ["5", 1]],
                          points=[{"model": "minimal_ekprime_even", "x": BIG_X, "y": "12345678901234567890123"}])
    path = tmp_path / "l.jsonl"
    append(path, rec)
    text = path.read_text()
    assert BIG_X in text
    back = read_ledger(path)[0]
    assert back == rec
    write_ledger(path, [back])
    assert path.read_text() == text
    assert json.loads(text)["k"] == "1683200989470"


def test_compact(tmp_path):
    path = tmp_path / "l.jsonl"
    for r in [_rec(19, 1, 2), _rec(6, 0, 1), _rec(19, 2, 2)]:
        append(path, r)
    out = compact(path)
    assert [(r.k, r.rank_lb) for r in out] == [("6", 0), ("19", 2)]
    assert len(path.read_text().splitlines()) == 2


def test_query_on_fixture_ledger():
    recs = fixture_ledger()
    got = {r.k_int for r in query(recs, min_rank_lb=8)}
    want = {row.k for row in minimal_k_table() + minimal_conductor_table() if row.rank >= 8}
    assert got == want
    assert all(r.status == "certified" for r in query(recs, min_rank_lb=1))
    assert query(recs, k_min=10, k_max=10) == []


def test_checkpoint_round_trip_and_fingerprint(tmp_path):
    path = tmp_path / "cp.json"
    fp = fingerprint("scan", {"box": 3})
    assert fp == fingerprint("scan", {"box": 3}) != fingerprint("scan", {"box": 4})
    save_checkpoint(path, Checkpoint(fp, {"triple": [1, 2, 3]}))
    assert len(path.read_text().splitlines()) == 1
    assert load_checkpoint(path, fp).cursor == {"triple": [1, 2, 3]}
    with pytest.raises(LedgerError):
        load_checkpoint(path, fingerprint("scan", {"box": 4}))
    path.write_text("garbage\n")
    with pytest.raises(LedgerError):
        load_checkpoint(path)
    assert load_checkpoint(tmp_path / "missing.json") is None


def test_scan_interrupted_at_every_step_equals_straight_run(tmp_path):
    filters = ScanFilters(min_selmer=2)
    straight = tmp_path / "a.jsonl"
    run_scan("s3", 3, filters, straight)
    piecewise = tmp_path / "b.jsonl"
    cp = tmp_path / "b.ckpt"
    for _ in range(10000):
        if run_scan("s3", 3, filters, piecewise, cp, max_steps=1)["done"]:
            break
    else:
        pytest.fail("scan never finished")
    assert straight.read_text()
    assert piecewise.read_text() == straight.read_text()


def test_enumerate_interrupted_at_every_step_equals_straight_run(tmp_path):
    straight = tmp_path / "a.jsonl"
    run_enumerate(20000, MAX_K, 3, straight)
    piecewise = tmp_path / "b.jsonl"
    cp = tmp_path / "b.ckpt"
    for _ in range(10000):
        if run_enumerate(20000, MAX_K, 3, piecewise, cp, max_steps=1)["done"]:
            break
    assert piecewise.read_text() == straight.read_text()
    ks = [r.k_int for r in read_ledger(straight)]
    assert ks == sorted(ks) and 657 in ks


def test_resume_refuses_other_parameters(tmp_path):
    cp = tmp_path / "c.ckpt"
    run_enumerate(2000, MAX_K, 2, tmp_path / "o.jsonl", cp, max_steps=1)
    with pytest.raises(LedgerError):
        run_enumerate(3000, MAX_K, 2, tmp_path / "o.jsonl", cp)
