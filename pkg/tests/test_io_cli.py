from __future__ import annotations

import csv
import io
import json

import pytest
from hypothesis import given, settings

from strategies import gain_graphs
from torusrig.cli import main
from torusrig.errors import DocumentError
from torusrig.io import (
    digest,
    graph_document,
    parse,
    read_graph,
    serialize,
    trace_document,
    trace_from_document,
)
from torusrig.constructions import random_tight_graph, reduce_to_seed, replay_trace

GOLDEN = ["nine_bar", "bad_gains", "p3_rank1", "p3_rank2", "p3_rank3"]


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


# ---- documents


def test_nine_bar_document(nine_bar):
    assert len(nine_bar.bodies) == 2 and len(nine_bar.edges) == 9


@pytest.mark.parametrize("name", GOLDEN)
def test_goldens_round_trip_byte_identical(fixtures, name):
    text = (fixtures / f"{name}.json").read_text()
    assert serialize(parse(text)) == text


def test_four_component_gain_rejected(fixtures):
    with pytest.raises(DocumentError, match=r"edges\[0\]\.gain"):
        read_graph(fixtures / "four_component_gain.json")


def test_truncated_file_reports_line(fixtures):
    with pytest.raises(DocumentError, match=r"truncated\.json:\d+:\d+"):
        read_graph(fixtures / "truncated.json")


@pytest.mark.parametrize("doc, fragment", [
    ({"dim": 2, "bodies": [], "edges": []}, "$.dim"),
    ({"dim": 3, "bodies": ["A"], "edges": [], "extra": 1}, "Additional properties"),
    ({"dim": 3, "bodies": ["A"], "edges": [{"u": "A", "v": "A", "gain": [1, 0, 0], "w": 1}]}, "edges[0]"),
    ({"dim": 3, "bodies": ["A"], "edges": [{"u": "A", "v": "B", "gain": [1, 0, 0]}]}, "unknown body"),
    ({"dim": 3, "bodies": ["A"], "edges": [
        {"id": 1, "u": "A", "v": "A", "gain": [1, 0, 0]},
        {"id": 1, "u": "A", "v": "A", "gain": [0, 1, 0]}]}, "duplicate edge id"),
    ({"dim": 3, "bodies": ["A"], "edges": [{"u": "A", "v": "A", "gain": [1.5, 0, 0]}]}, "gain"),
    ({"dim": 3, "bodies": ["A"], "edges": [{"u": "A", "v": "A", "gain": [10**7, 0, 0]}]}, "cap"),
])
def test_malformed_documents(doc, fragment):
    with pytest.raises(DocumentError) as info:
        parse(json.dumps(doc))
    assert fragment in str(info.value)


def test_missing_ids_default_to_position():
    g = parse(json.dumps({"dim": 3, "bodies": ["B", "A"], "edges": [
        {"u": "A", "v": "B", "gain": [0, 0, 0]}, {"u": "B", "v": "B", "gain": [0, 0, 1]}]}))
    assert [e.id for e in g.edges] == [0, 1]
    assert graph_document(g)["bodies"] == ["A", "B"]


@settings(max_examples=100, deadline=None)
@given(gain_graphs(max_bodies=4, max_edges=10))
def test_serialize_parse_identity(g):
    text = serialize(g)
    back = parse(text)
    assert back.canonical() == g.canonical()
    assert serialize(back) == text


def test_digest_is_stable(nine_bar):
    assert digest(nine_bar) == digest(parse(serialize(nine_bar)))
    assert digest(nine_bar).startswith("sha256:")


def test_trace_document_round_trip():
    g = random_tight_graph(4, seed=2)
    trace = reduce_to_seed(g)
    doc = json.loads(json.dumps(trace_document(trace)))
    assert replay_trace(trace_from_document(doc)).canonical() == g.canonical()
    with pytest.raises(DocumentError):
        trace_from_document({"terminal": doc["terminal"]})


# ---- command line


def test_check_nine_bar(fixtures):
    code, out = run("check", str(fixtures / "nine_bar.json"))
    report = json.loads(out)
    assert code == 0 and report["minimally_rigid"]
    assert report["rigidity"]["rank"] == 51 and report["sparsity"]["sparse"]
    assert report["config"] == {"seed": 0, "prime": 2**61 - 1, "trials": 3}
    assert "timing_s" not in report


def test_check_negative_has_witness(fixtures):
    code, out = run("check", str(fixtures / "bad_gains.json"))
    assert code == 1
    assert json.loads(out)["witness"] == list(range(9))


@pytest.mark.parametrize("name", ["truncated", "four_component_gain"])
def test_check_malformed_exits_2(fixtures, name):
    assert run("check", str(fixtures / f"{name}.json"))[0] == 2


def test_missing_file_and_bad_flags(fixtures, tmp_path):
    assert run("check", str(tmp_path / "nope.json"))[0] == 2
    assert run("check", str(fixtures / "nine_bar.json"), "--engine", "pebble")[0] == 2
    assert run("rank", str(fixtures / "nine_bar.json"), "--prime", "100")[0] == 2


def test_check_engine_override(fixtures):
    for engine in ("brute", "connected", "counting", "matroid"):
        code, out = run("check", str(fixtures / "nine_bar.json"), "--engine", engine)
        assert code == 0 and json.loads(out)["engine"] == engine


def test_disagreement_exits_3(fixtures, monkeypatch):
    import torusrig.cli as cli
    from torusrig.sparsity import SparsityVerdict

    monkeypatch.setattr(cli, "check_sparsity",
                        lambda *a, **k: SparsityVerdict(True, False, (0,), 1, "fake"))
    code, out = run("check", str(fixtures / "nine_bar.json"))
    report = json.loads(out)
    assert code == 3 and "disagreement" in report and report["disagreement"]["graph"]["dim"] == 3


def test_timing_only_on_request(fixtures):
    _, out = run("check", str(fixtures / "nine_bar.json"), "--timing")
    assert "timing_s" in json.loads(out)


def test_rank_command(fixtures):
    code, out = run("rank", str(fixtures / "nine_bar.json"), "--exact", "--seed", "5")
    report = json.loads(out)
    assert code == 0 and report["rigidity"]["rank"] == 51 and report["config"]["seed"] == 5


def test_env_seed_override(fixtures, monkeypatch):
    monkeypatch.setenv("TORUSRIG_SEED", "42")
    _, out = run("rank", str(fixtures / "nine_bar.json"))
    assert json.loads(out)["config"]["seed"] == 42
    monkeypatch.setenv("TORUSRIG_SEED", "x")
    assert run("rank", str(fixtures / "nine_bar.json"))[0] == 2


def test_induce_command(fixtures):
    code, out = run("induce", str(fixtures / "nine_bar.json"))
    doc = json.loads(out)
    assert code == 0 and len(doc["bodies"]) == 18 and len(doc["edges"]) == 51


def test_matrix_csv(fixtures):
    code, out = run("matrix", str(fixtures / "p3_rank3.json"), "--positions-seed", "7", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert rows[0][:4] == ["edge_id", "v:A:0:x", "v:A:0:y", "v:A:0:z"]
    # 12 body edges on six vertices plus three loop bars
    assert len(rows) == 1 + 15 and len(rows[0]) == 1 + 18
    # every row sums to zero along each axis: translations are in the kernel
    p = 2**61 - 1
    for row in rows[1:]:
        vals = [int(x) for x in row[1:]]
        for axis in range(3):
            assert sum(vals[axis::3]) % p == 0
    assert run("matrix", str(fixtures / "p3_rank3.json"), "--positions-seed", "7")[1] == out


def test_generate_reduce_replay(tmp_path):
    code, out = run("generate", "--bodies", "2", "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and len(doc["edges"]) == 9
    gpath = tmp_path / "g.json"
    gpath.write_text(out)
    code, trace = run("reduce", str(gpath))
    assert code == 0 and len(json.loads(trace)["steps"]) == 1
    tpath = tmp_path / "t.json"
    tpath.write_text(trace)
    code, rebuilt = run("replay", str(tpath))
    assert code == 0 and rebuilt == out


def test_reduce_negative(fixtures):
    assert run("reduce", str(fixtures / "bad_gains.json"))[0] == 1


def test_verify_small_corpus():
    code, out = run("verify", "--corpus-size", "50", "--seed", "1")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert {p["name"] for p in report["properties"]} == {
        "count_rank_equivalence", "brute_vs_connected", "generate_reduce_replay", "translations_in_kernel"}


def test_commands_are_deterministic(fixtures):
    assert run("check", str(fixtures / "nine_bar.json")) == run("check", str(fixtures / "nine_bar.json"))
    assert run("generate", "--bodies", "4", "--seed", "3") == run("generate", "--bodies", "4", "--seed", "3")


def test_replay_missing_file(tmp_path):
    assert run("replay", str(tmp_path / "absent.json"))[0] == 2


@pytest.mark.parametrize("bodies, seed", [(4, 1), (5, 1), (6, 1), (8, 2)])
def test_replay_is_byte_identical_through_files(tmp_path, bodies, seed):
    # these seeds pinch loops whose canonical orientation differs from the stored one
    _, out = run("generate", "--bodies", str(bodies), "--seed", str(seed))
    gpath, tpath = tmp_path / "g.json", tmp_path / "t.json"
    gpath.write_text(out)
    tpath.write_text(run("reduce", str(gpath))[1])
    assert run("replay", str(tpath)) == (0, out)
