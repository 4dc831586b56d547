import json
from fractions import Fraction

import pytest

from services.errors import MetricError, ParseError
from services.retractions import validate_system
from services.spaces import build_circle, build_circle_union, build_grid_net, make_space
from utils.serialization import (
    load_frontier,
    load_function,
    load_space,
    load_system,
    parse_measure,
    read_space,
    space_to_dict,
    system_to_dict,
    write_csv,
    write_frontier,
    write_space,
    write_system,
)


def _dump(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.mark.parametrize(
    "space", [build_circle(5), build_circle_union(1), build_grid_net(2)], ids=["circle", "union", "grid"]
)
def test_named_spaces_keep_their_structure(tmp_path, space):
    path = str(tmp_path / "space.json")
    write_space(space, path)
    loaded = load_space(path)
    assert loaded.kind == space.kind
    assert loaded.params == space.params
    assert loaded.points == space.points


def test_exact_distances_are_written_as_rationals():
    space = make_space(["0", "a", "b"], [[0, Fraction(1, 2), 1], [Fraction(1, 2), 0, 1], [1, 1, 0]])
    data = space_to_dict(space)
    assert data["dist"][0][1] == "1/2"
    assert data["exact"] is True


def test_bad_entry_is_located(tmp_path):
    path = _dump(tmp_path, "bad.json", {"points": ["0", "a"], "dist": [[0, "1/x"], ["1", 0]]})
    with pytest.raises(ParseError) as info:
        read_space(path)
    assert "dist[0][1]" in info.value.location


def test_json_syntax_error_is_located(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"points": ["0",\n')
    with pytest.raises(ParseError) as info:
        read_space(str(path))
    assert info.value.location.startswith(str(path) + ":2:")


def test_missing_file(tmp_path):
    with pytest.raises(ParseError):
        read_space(str(tmp_path / "nope.json"))


def test_triangle_violations_are_reported(tmp_path):
    path = _dump(
        tmp_path, "tri.json",
        {"points": ["0", "a", "b"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]},
    )
    report = read_space(path)
    assert not report.valid
    assert {v.kind for v in report.violations} == {"triangle"}
    with pytest.raises(MetricError, match="triangle"):
        load_space(path)


def test_kind_must_match_distances(tmp_path):
    data = space_to_dict(build_circle(4))
    data["params"] = {"n": 5}
    with pytest.raises(ParseError):
        read_space(_dump(tmp_path, "c.json", data))


def test_system_round_trip(tmp_path, c4_system):
    path = str(tmp_path / "system.json")
    write_system(c4_system, path)
    loaded = load_system(c4_system.space, path)
    assert loaded.order == c4_system.order
    assert loaded.parent == c4_system.parent


def test_system_from_phi_rows(tmp_path, c4_system):
    space = c4_system.space
    data = {
        "order": [space.label(x) for x in c4_system.order],
        "phi": [[space.label(int(v)) for v in row] for row in c4_system.phi_table],
    }
    loaded = load_system(space, _dump(tmp_path, "phi.json", data))
    assert validate_system(loaded).valid
    assert loaded.parent == c4_system.parent


def test_system_with_unknown_label(tmp_path, c4_system):
    data = system_to_dict(c4_system)
    data["order"][2] = "x9"
    with pytest.raises(ParseError) as info:
        load_system(c4_system.space, _dump(tmp_path, "s.json", data))
    assert "order[2]" in info.value.location


def test_parse_measure_inline():
    space = build_circle(4)
    measure = parse_measure(space, "x1:1, x2:1, x3:-2, x1:1/2")
    assert measure.coeffs[1] == Fraction(3, 2)
    assert measure.coeffs[3] == -2
    with pytest.raises(ParseError):
        parse_measure(space, "x1=1")
    with pytest.raises(ParseError):
        parse_measure(space, "x7:1")
    with pytest.raises(ParseError):
        parse_measure(space, "x1:0.5")


def test_parse_measure_from_files(tmp_path):
    space = build_circle(4)
    json_path = _dump(tmp_path, "m.json", [["x1", "2"], ["x3", -1]])
    csv_path = tmp_path / "m.csv"
    csv_path.write_text("label,coeff\nx1,2\nx3,-1\n")
    assert parse_measure(space, json_path).equals(parse_measure(space, str(csv_path)))


def test_load_function(tmp_path):
    space = build_circle(4)
    f = load_function(space, _dump(tmp_path, "f.json", {"x1": "1/2", "x2": 1}))
    assert f.values == (0, Fraction(1, 2), 1, 0, 0)
    with pytest.raises(ParseError):
        load_function(space, _dump(tmp_path, "g.json", {"x0": 1}))


def test_frontier_round_trip(tmp_path):
    path = str(tmp_path / "frontier.json")
    prefixes = [((0, 1, 2), (-1, 0, 1)), ((0, 1, 7), (-1, 0, 0))]
    write_frontier(path, 12, "auto", 5, prefixes)
    n, loaded = load_frontier(path)
    assert n == 12
    assert loaded == prefixes


def test_frontier_rejects_ragged_prefix(tmp_path):
    path = _dump(tmp_path, "f.json", {"n": 6, "prefixes": [{"order": [0, 1], "parent": [-1]}]})
    with pytest.raises(ParseError):
        load_frontier(path)


def test_write_csv_formats_rationals(tmp_path):
    path = tmp_path / "out" / "table.csv"
    write_csv(["i", "value"], [[0, Fraction(3, 2)], [1, None]], str(path))
    assert path.read_text().splitlines() == ["i,value", "0,3/2", "1,"]
