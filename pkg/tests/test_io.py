import json

import pytest

from finitemix.builders import base_graph, exponential, simple_base
from finitemix.errors import FormatError
from finitemix.graph import validate_sequence
from finitemix.io import atomic_write, dumps, export_dot, load, loads, save, to_dot


@pytest.mark.parametrize("seq", [base_graph(13, 2), simple_base(5, 1), exponential(6)])
def test_roundtrip(seq, tmp_path):
    path = tmp_path / "s.json"
    save(seq, path)
    back = load(path)
    assert back == seq
    assert dumps(back) == dumps(seq)
    assert validate_sequence(back).ok


def test_weights_are_rational_strings():
    obj = json.loads(dumps(simple_base(5, 1)))
    assert [4, 5, "4/5"] in obj["graphs"][2]["edges"]


@pytest.mark.parametrize("text", ["not json", "[]", '{"n": 3}', '{"n": 0, "k": 1, "graphs": []}',
                                  '{"n": 3, "k": 1, "graphs": [{"directed": false, "edges": [[1, 2, 0.5]]}]}',
                                  '{"n": 3, "k": 1, "graphs": [{"directed": false, "edges": [[1, 2, "1/0"]]}]}'])
def test_malformed(text):
    with pytest.raises(FormatError):
        loads(text)


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        load(tmp_path / "nope.json")


def test_dot():
    text = to_dot(base_graph(6, 1).graphs[-1], "G4")
    assert text.startswith("graph G4 {")
    assert '1 -- 4 [label="1/2"];' in text
    assert "->" in to_dot(exponential(4).graphs[0])


def test_export_dot(tmp_path):
    paths = export_dot(simple_base(5, 1), tmp_path)
    assert [p.name for p in paths] == [f"graph_0{i}.dot" for i in range(1, 6)]


def test_atomic_write_leaves_no_temp(tmp_path):
    atomic_write(tmp_path / "a.txt", "x")
    atomic_write(tmp_path / "a.txt", b"y")
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
    assert (tmp_path / "a.txt").read_text() == "y"
