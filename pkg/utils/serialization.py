"""JSON/CSV file formats for spaces, systems, measures, functions and checkpoints"""
import csv
import json
import os
from typing import Dict, List, Sequence, Tuple

import numpy as np

from services.errors import MetricError, ParseError
from services.measures import LipschitzFunction, Measure
from services.retractions import RetractionSystem, build_system, system_from_phi_table
from services.spaces import (
    MetricReport,
    PointedMetricSpace,
    build_circle,
    build_circle_union,
    build_grid_net,
    validate_metric,
)
from utils.rationals import format_value, parse_scalar

_BUILDERS = {
    "circle": lambda p: build_circle(p["n"]),
    "union": lambda p: build_circle_union(p["k_max"]),
    "grid": lambda p: build_grid_net(p["m"], p.get("dim", 2)),
}


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ParseError(path, "file not found") from None
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None


def _field(data, key: str, path: str, kind=None):
    if not isinstance(data, dict) or key not in data:
        raise ParseError(path, f"missing field {key!r}")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"{path}: {key}", f"expected {kind.__name__}")
    return value


# ==================== SPACES ====================

def space_to_dict(space: PointedMetricSpace) -> Dict:
    data = {
        "points": list(space.points),
        "base": space.base_index,
        "dist": [[format_value(v) for v in row] for row in space.dist],
        "exact": space.exact,
    }
    if space.kind in _BUILDERS:
        data["kind"] = space.kind
        data["params"] = dict(space.params)
    return data


def space_report_from_dict(data: Dict, path: str = "<space>") -> MetricReport:
    """Parse entries (location-tagged) and check the metric axioms"""
    labels = _field(data, "points", path, list)
    rows = _field(data, "dist", path, list)
    exact = data.get("exact", True)
    base = data.get("base", 0)
    if not isinstance(base, int) or isinstance(base, bool):
        raise ParseError(f"{path}: base", "expected an integer index")
    dist = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ParseError(f"{path}: dist[{i}]", "expected a list")
        parsed = []
        for j, value in enumerate(row):
            try:
                parsed.append(parse_scalar(value, exact))
            except ValueError as e:
                raise ParseError(f"{path}: dist[{i}][{j}]", str(e)) from None
        dist.append(parsed)
    try:
        report = validate_metric([str(label) for label in labels], dist, base, exact)
    except MetricError as e:
        raise ParseError(path, str(e)) from None
    kind = data.get("kind")
    if report.valid and kind in _BUILDERS:
        # named spaces keep their circle or lattice structure
        try:
            built = _BUILDERS[kind](data.get("params", {}))
        except (KeyError, TypeError, MetricError) as e:
            raise ParseError(f"{path}: params", f"cannot rebuild {kind}: {e}") from None
        if built.points != report.space.points or not np.array_equal(built.dist, report.space.dist):
            raise ParseError(f"{path}: kind", f"distances do not match a {kind} with {data.get('params')}")
        report.space = built
    return report


def read_space(path: str) -> MetricReport:
    return space_report_from_dict(_read_json(path), path)


def load_space(path: str) -> PointedMetricSpace:
    """Valid space or MetricError naming every violating pair/triple"""
    report = read_space(path)
    if not report.valid:
        raise MetricError(f"{path}: {report.describe()}")
    return report.space


def write_space(space: PointedMetricSpace, path: str):
    _write_json(space_to_dict(space), path)


# ==================== SYSTEMS ====================

def system_to_dict(system: RetractionSystem) -> Dict:
    space = system.space
    return {
        "order": [space.label(x) for x in system.order],
        "parent": {
            space.label(system.order[k]): space.label(system.order[system.parent[k]])
            for k in range(1, len(system.order))
        },
    }


def _labelled_index(space: PointedMetricSpace, label, location: str) -> int:
    try:
        return space.index(str(label))
    except MetricError as e:
        raise ParseError(location, str(e)) from None


def system_from_dict(space: PointedMetricSpace, data: Dict, path: str = "<system>") -> RetractionSystem:
    """Either {order, parent} or {order, phi} with phi[i][x] labels of phi_i(x)"""
    order_labels = _field(data, "order", path, list)
    order = [_labelled_index(space, label, f"{path}: order[{k}]") for k, label in enumerate(order_labels)]
    if "phi" in data:
        rows = _field(data, "phi", path, list)
        table = [
            [_labelled_index(space, label, f"{path}: phi[{i}][{j}]") for j, label in enumerate(row)]
            for i, row in enumerate(rows)
        ]
        return system_from_phi_table(space, order, np.array(table, dtype=int))
    parents = _field(data, "parent", path, dict)
    parent = {
        _labelled_index(space, child, f"{path}: parent"): _labelled_index(space, p, f"{path}: parent[{child}]")
        for child, p in parents.items()
    }
    return build_system(space, order, parent)


def load_system(space: PointedMetricSpace, path: str) -> RetractionSystem:
    return system_from_dict(space, _read_json(path), path)


def write_system(system: RetractionSystem, path: str):
    _write_json(system_to_dict(system), path)


# ==================== MEASURES AND FUNCTIONS ====================

def parse_measure(space: PointedMetricSpace, text: str, location: str = "--measure") -> Measure:
    """"x1:1,x2:1,x3:-2", or a path to a JSON list of [label, coeff] pairs / a label,coeff CSV"""
    if os.path.isfile(text):
        pairs = _read_pairs(text)
        location = text
    else:
        pairs = []
        for k, item in enumerate(filter(None, (s.strip() for s in text.split(",")))):
            label, sep, coeff = item.rpartition(":")
            if not sep:
                raise ParseError(f"{location}[{k}]", f"expected label:coeff, got {item!r}")
            pairs.append((label.strip(), coeff.strip()))
    coeffs = []
    for k, (label, coeff) in enumerate(pairs):
        point = _labelled_index(space, label, f"{location}[{k}]")
        try:
            coeffs.append((point, parse_scalar(coeff, space.exact)))
        except ValueError as e:
            raise ParseError(f"{location}[{k}]", str(e)) from None
    total: Dict[int, object] = {}
    for point, value in coeffs:
        total[point] = total.get(point, space.zero()) + value
    return Measure(space, total)


def _read_pairs(path: str) -> List[Tuple[str, str]]:
    if not os.path.isfile(path):
        raise ParseError(path, "file not found")
    if path.endswith(".json"):
        data = _read_json(path)
        if isinstance(data, dict):
            return [(str(k), v) for k, v in data.items()]
        if not isinstance(data, list) or any(not isinstance(p, list) or len(p) != 2 for p in data):
            raise ParseError(path, "expected a list of [label, value] pairs")
        return [(str(k), v) for k, v in data]
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if rows and rows[0][:2] in (["label", "coeff"], ["label", "value"]):
        rows = rows[1:]
    for k, row in enumerate(rows):
        if len(row) != 2:
            raise ParseError(f"{path}:{k + 1}", "expected two columns")
    return [(row[0].strip(), row[1].strip()) for row in rows]


def load_function(space: PointedMetricSpace, path: str) -> LipschitzFunction:
    """Values per label (JSON object or label,value CSV); missing points are 0"""
    values = {}
    for k, (label, value) in enumerate(_read_pairs(path)):
        point = _labelled_index(space, label, f"{path}[{k}]")
        try:
            values[point] = parse_scalar(value, space.exact)
        except ValueError as e:
            raise ParseError(f"{path}[{k}]", str(e)) from None
    if values.get(space.base_index, 0) != 0:
        raise ParseError(path, "function must vanish at the base point")
    return LipschitzFunction.from_mapping(space, values)


def function_rows(f: LipschitzFunction) -> List[List[object]]:
    return [[f.space.label(x), format_value(v)] for x, v in enumerate(f.values)]


# ==================== FRONTIER CHECKPOINTS ====================

def frontier_to_dict(n: int, target: str, nodes: int, prefixes: Sequence[Tuple[Sequence[int], Sequence[int]]]) -> Dict:
    """{n, target, nodes, prefixes: [{order: point indices, parent: positions}]}"""
    return {
        "n": n,
        "target": target,
        "nodes": nodes,
        "prefixes": [{"order": list(o), "parent": list(p)} for o, p in prefixes],
    }


def load_frontier(path: str) -> Tuple[int, List[Tuple[Tuple[int, ...], Tuple[int, ...]]]]:
    data = _read_json(path)
    n = _field(data, "n", path, int)
    prefixes = []
    for k, item in enumerate(_field(data, "prefixes", path, list)):
        order = _field(item, "order", f"{path}: prefixes[{k}]", list)
        parent = _field(item, "parent", f"{path}: prefixes[{k}]", list)
        if len(order) != len(parent) or not all(isinstance(v, int) for v in order + parent):
            raise ParseError(f"{path}: prefixes[{k}]", "order and parent must be equal-length integer lists")
        prefixes.append((tuple(order), tuple(parent)))
    return n, prefixes


def write_frontier(path: str, n: int, target: str, nodes: int, prefixes):
    _write_json(frontier_to_dict(n, target, nodes, prefixes), path)


# ==================== REPORTS ====================

def _write_json(data, path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def write_report(payload: Dict, out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, f"{name}.json")
    _write_json(payload, path)
    return path


def write_csv(columns: Sequence[str], rows: Sequence[Sequence[object]], path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, str)):
        return value
    try:
        return format_value(value)
    except (TypeError, ValueError):
        return value
