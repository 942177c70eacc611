"""JSON formats for graphs and protocols, and CSV for sweep tables.

Graph: ``{"vertices": n, "edges": [[d0, d1], ...]}`` with ``d0 <= d1``.
Protocol: ``{"E": [coef, ...], "W": [coef, ...]}`` with one coefficient
object ``{"const": x, "cos": [...], "sin": [...]}`` per vertex and per edge;
missing keys default to zero / empty.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Optional, Sequence

from .errors import InvalidInput, ParseError
from .graph_core import Graph, validate_graph
from .protocol import Fourier, FourierProtocol


def _load(text: str, what: str) -> Any:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{what}: not UTF-8 ({exc})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer, got {x!r}")
    return x


def parse_graph(text) -> Graph:
    data = _load(text, "graph")
    if not isinstance(data, dict) or "vertices" not in data or "edges" not in data:
        raise ParseError('graph: expected an object with "vertices" and "edges"')
    n = _int(data["vertices"], "graph.vertices")
    edges = data["edges"]
    if not isinstance(edges, list):
        raise ParseError("graph.edges: expected a list")
    clean = []
    for k, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise ParseError(f"graph.edges[{k}]: expected a pair [d0, d1]")
        d0, d1 = _int(e[0], f"graph.edges[{k}][0]"), _int(e[1], f"graph.edges[{k}][1]")
        if d0 > d1:
            raise ParseError(f"graph.edges[{k}] = {e}: endpoints must satisfy d0 <= d1")
        clean.append((d0, d1))
    return validate_graph(n, clean)


def serialize_graph(g: Graph) -> str:
    return json.dumps(g.to_dict())


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ParseError(f"{where}: expected a finite number, got {x!r}")
    return float(x)


def _coef(obj, where: str) -> Fourier:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected a coefficient object")
    extra = set(obj) - {"const", "cos", "sin"}
    if extra:
        raise ParseError(f"{where}: unknown keys {sorted(extra)}")
    const = _number(obj.get("const", 0.0), f"{where}.const")
    series = []
    for key in ("cos", "sin"):
        vals = obj.get(key, [])
        if not isinstance(vals, list):
            raise ParseError(f"{where}.{key}: expected a list")
        series.append(tuple(_number(v, f"{where}.{key}[{i}]") for i, v in enumerate(vals)))
    return Fourier(const, series[0], series[1])


def parse_protocol(text, g: Optional[Graph] = None) -> FourierProtocol:
    """Parse a protocol; with ``g`` also check its arity (``ArityMismatch``)."""
    data = _load(text, "protocol")
    if not isinstance(data, dict) or "E" not in data or "W" not in data:
        raise ParseError('protocol: expected an object with "E" and "W"')
    parts = []
    for key in ("E", "W"):
        if not isinstance(data[key], list):
            raise ParseError(f"protocol.{key}: expected a list")
        parts.append(tuple(_coef(c, f"protocol.{key}[{i}]") for i, c in enumerate(data[key])))
    proto = FourierProtocol(parts[0], parts[1])
    if g is not None:
        proto.check(g)
    return proto


def serialize_protocol(p: FourierProtocol) -> str:
    return json.dumps(p.to_dict())


def format_number(x) -> str:
    """Fixed 12-significant-digit rendering; non-finite values become ``nan``."""
    if x is None:
        return "nan"
    if isinstance(x, bool):
        return "true" if x else "false"
    x = float(x)
    if not math.isfinite(x):
        return "nan"
    if x == 0:
        return "0"
    return f"{x:.12g}"


def sweep_header(n_coords: int) -> list[str]:
    return ["beta", "tau_d"] + [f"coord_{k}" for k in range(n_coords)] + [
        "lattice_distance",
        "robust",
        "divergence_residual",
    ]


def write_csv(header: Sequence[str], rows: Sequence[Sequence], stream=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else format_number(v) for v in row])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def load_file(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not UTF-8 ({exc})") from None
