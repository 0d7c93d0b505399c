import os
import pathlib

import pytest

import descend

CORPUS = pathlib.Path(os.environ.get("DESCEND_CORPUS_DIR", pathlib.Path(__file__).parents[2] / "corpus"))


def read(rel):
    return (CORPUS / rel).read_text()


def test_listing_is_accepted():
    r = descend.check(read("accept/transpose_listing.desc"))
    assert r["ok"]
    assert r["diagnostics"] == []


def test_conflict_is_reported_with_a_span():
    src = read("reject/rev_per_block.desc")
    r = descend.check(src, "rev_per_block.desc")
    assert not r["ok"]
    (d,) = r["diagnostics"]
    assert d["code"] == "E_CONFLICT"
    assert src[d["span"]["begin"]:d["span"]["end"]] == "arr[[thread]]"


def test_emit_matches_golden():
    assert descend.emit_cuda(read("accept/transpose_listing.desc")) == read("golden/transpose_listing.cu")


def test_emit_of_rejected_program_raises():
    with pytest.raises(descend.DescendError, match="E_MEM"):
        descend.emit_cuda(read("reject/cpu_deref.desc"))


def test_reduce_sums_to_136():
    r = descend.simulate(read("accept/reduce.desc"), "reduce", grid=[1], block=[4], nats={"k": 4},
                         inputs={"input": list(range(1, 17))})
    assert r["status"] == "ok"
    assert r["buffers"]["output"] == [136]
    assert r["race_count"] == 0


def test_lowered_transpose_agrees():
    inputs = {"input": [float(i) for i in range(64)]}
    a = descend.simulate(read("accept/transpose.desc"), "transpose", grid=[2, 2], block=[4, 2], inputs=inputs)
    b = descend.simulate(read("accept/transpose.desc"), "transpose", grid=[2, 2], block=[4, 2], inputs=inputs,
                         lowered=True)
    assert a["buffers"] == b["buffers"]
    assert a["buffers"]["output"][1] == 8


def test_unchecked_race_is_found():
    r = descend.simulate(read("reject/forgotten_sync.desc"), "reverse_blocks", grid=[2], block=[4], checked=False)
    assert r["race_count"] > 0
    rejected = descend.simulate(read("reject/forgotten_sync.desc"), "reverse_blocks", grid=[2], block=[4])
    assert rejected["status"] == "rejected"
    assert rejected["diagnostics"][0]["code"] == "E_CONFLICT"


def test_expand_views():
    v = descend.expand_views("[f64; 32]", "arr.group::<8>.transpose")
    assert v["shape"] == [8, 4]
    assert v["mismatches"] == 0
    assert v["lowered"] == v["oracle"]


def test_normalize_nat():
    assert descend.normalize_nat("n + n") == descend.normalize_nat("2 * n")
