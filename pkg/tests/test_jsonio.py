import json

import numpy as np
import pytest

from app.core import jsonio
from app.core.errors import ParseError
from app.quantum.games import chsh, pr_box, score
from app.quantum.strategies import achieved_correlation, chsh_optimal_strategy


def test_game_fixture_round_trip_is_byte_identical(data_dir):
    path = data_dir / "chsh.json"
    g = jsonio.load_game(path)
    assert np.array_equal(g.H, chsh().H)
    assert jsonio.dumps(jsonio.game_to_dict(g)) == path.read_text(encoding="utf-8")


def test_correlation_fixture_round_trip(data_dir):
    path = data_dir / "pr_box.json"
    c = jsonio.load_correlation(path)
    assert np.array_equal(c.p, pr_box().p)
    assert jsonio.dumps(jsonio.correlation_to_dict(c)) == path.read_text(encoding="utf-8")


def test_strategy_fixture_matches_constructor(data_dir):
    s = jsonio.load_strategy(data_dir / "chsh_opt.json")
    ref = chsh_optimal_strategy()
    assert s.alice.is_projective
    assert np.max(np.abs(achieved_correlation(s).p - achieved_correlation(ref).p)) <= 1e-12
    assert score(chsh(), achieved_correlation(s)) == pytest.approx(0.8535533906, abs=1e-7)


def test_strategy_dict_round_trip():
    s = chsh_optimal_strategy()
    back = jsonio.strategy_from_dict(json.loads(jsonio.dumps(jsonio.strategy_to_dict(s))))
    assert np.array_equal(back.gamma, s.gamma)
    assert np.array_equal(back.alice.elements, s.alice.elements)


def test_canonical_float_format():
    out = jsonio.dumps({"b": 1.0, "a": [0.1, 2, True, None]})
    assert out == '{\n  "a": [0.10000000000000001, 2, true, null],\n  "b": 1.0\n}\n'
    with pytest.raises(ValueError):
        jsonio.dumps({"x": float("nan")})


def test_sizes_from_labels():
    g = jsonio.game_from_dict({
        "labels": {"A": ["a0", "a1"], "B": ["b0", "b1"], "X": ["0", "1"], "Y": ["0", "1"]},
        "q": chsh().q.tolist(),
        "H": chsh().H.tolist(),
    })
    assert g.shape == (2, 2, 2, 2)


@pytest.mark.parametrize("payload", [
    {"q": [[1.0]], "H": [[[[1.0]]]]},                                          # нет sizes
    {"sizes": {"A": 1, "B": 1, "X": 1, "Y": 1}, "H": [[[[1.0]]]]},            # нет q
    {"sizes": {"A": 1, "B": 1, "X": 2, "Y": 1}, "q": [[1.0]], "H": [[[[1.0]]]]},
    {"sizes": {"A": 1, "B": 1, "X": 1, "Y": 1}, "q": [[1.0]], "H": [[[[2.0]]]]},
    {"sizes": {"A": 0, "B": 1, "X": 1, "Y": 1}, "q": [[1.0]], "H": [[[[1.0]]]]},
])
def test_malformed_game(payload):
    with pytest.raises(ParseError):
        jsonio.game_from_dict(payload)


def test_malformed_files(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        jsonio.load_game(bad)
    with pytest.raises(ParseError):
        jsonio.load_game(tmp_path / "missing.json")
    lst = tmp_path / "list.json"
    lst.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ParseError):
        jsonio.load_game(lst)


def test_strategy_dimension_mismatch(data_dir):
    data = json.loads((data_dir / "chsh_opt.json").read_text(encoding="utf-8"))
    data["dD"] = 3
    with pytest.raises(ParseError):
        jsonio.strategy_from_dict(data)
    data["dD"] = 2
    data["gamma"] = [[[1.0, 0.0]]]
    with pytest.raises(ParseError):
        jsonio.strategy_from_dict(data)


def test_decode_matrix_requires_pairs():
    with pytest.raises(ParseError):
        jsonio.decode_matrix([[1.0, 0.0], [0.0, 1.0]], "m")
    m = jsonio.decode_matrix([[[0.0, 1.0]]], "m")
    assert m[0, 0] == 1j


def test_instance_load(data_dir):
    inst = jsonio.load_instance(data_dir / "helstrom_pair.json")
    assert inst.n == 2
    assert inst.total_trace == pytest.approx(1.0)
    raw = json.loads((data_dir / "helstrom_pair.json").read_text(encoding="utf-8"))
    assert np.allclose(inst.states[0], jsonio.decode_matrix(raw["states"][0], "s"), atol=1e-15)
