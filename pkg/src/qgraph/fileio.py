"""Line-based text format for quantum graphs and 1-forms.

    qgraph 1
    vertices <n>
    edge <id> <a> <b> [<length>]
    form <edge id> <value>

Lengths may be decimal or exact rationals p/q; rational lengths stay exact
through the whole pipeline.  Lines starting with '#' are comments.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import InputError
from .graphs import CombinatorialGraph
from .metric import MetricGraph, OneForm


def _parse_length(tok: str, line_no: int):
    if "/" in tok:
        try:
            return Fraction(tok)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"bad rational '{tok}', line {line_no}")
    try:
        if tok.lstrip("+-").isdigit():
            return Fraction(int(tok))
        return float(tok)
    except ValueError:
        raise InputError(f"bad number '{tok}', line {line_no}")


def parse_graph_text(text: str):
    """Parse the shared graph format; returns (MetricGraph, OneForm|None).

    Graphs without lengths get unit lengths (purely combinatorial use).
    """
    n_vertices = None
    edges: list[tuple[int, int]] = []
    lengths: list = []
    form_values: dict[int, float] = {}
    saw_header = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if not saw_header:
            if toks != ["qgraph", "1"]:
                raise InputError(f"missing 'qgraph 1' header, line {line_no}")
            saw_header = True
            continue
        if toks[0] == "vertices":
            if len(toks) != 2 or not toks[1].isdigit():
                raise InputError(f"bad vertices line, line {line_no}")
            n_vertices = int(toks[1])
        elif toks[0] == "edge":
            if n_vertices is None:
                raise InputError(f"edge before vertices, line {line_no}")
            if len(toks) not in (4, 5):
                raise InputError(f"bad edge line, line {line_no}")
            try:
                eid, a, b = int(toks[1]), int(toks[2]), int(toks[3])
            except ValueError:
                raise InputError(f"bad edge ids, line {line_no}")
            if eid != len(edges):
                raise InputError(
                    f"edge ids must be 0..E-1 in order; got {eid}, line {line_no}"
                )
            for v in (a, b):
                if not 0 <= v < n_vertices:
                    raise InputError(f"vertex {v} out of range, line {line_no}")
            length = _parse_length(toks[4], line_no) if len(toks) == 5 else Fraction(1)
            if not length > 0:
                raise InputError(f"nonpositive length, line {line_no}")
            edges.append((a, b))
            lengths.append(length)
        elif toks[0] == "form":
            if len(toks) != 3:
                raise InputError(f"bad form line, line {line_no}")
            try:
                eid = int(toks[1])
                val = float(toks[2])
            except ValueError:
                raise InputError(f"bad form entry, line {line_no}")
            form_values[eid] = val
        else:
            raise InputError(f"unknown directive '{toks[0]}', line {line_no}")
    if n_vertices is None:
        raise InputError("no 'vertices' line found")
    graph = MetricGraph(CombinatorialGraph(n_vertices, tuple(edges)), tuple(lengths))
    form = None
    if form_values:
        for eid in form_values:
            if not 0 <= eid < len(edges):
                raise InputError(f"form refers to unknown edge {eid}")
        form = OneForm(
            tuple(form_values.get(e, 0.0) for e in range(len(edges)))
        )
    return graph, form


def parse_graph_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph_text(fh.read())


def format_length(val) -> str:
    if isinstance(val, Fraction):
        if val.denominator == 1:
            return str(val.numerator)
        return f"{val.numerator}/{val.denominator}"
    if isinstance(val, int):
        return str(val)
    return repr(float(val))


def emit_graph_text(g: MetricGraph, form: OneForm | None = None) -> str:
    lines = ["qgraph 1", f"vertices {g.graph.vertex_count}"]
    for eid, ((a, b), l) in enumerate(zip(g.graph.edges, g.lengths)):
        lines.append(f"edge {eid} {a} {b} {format_length(l)}")
    if form is not None:
        for eid, v in enumerate(form.values):
            if v != 0:
                lines.append(f"form {eid} {v!r}")
    return "\n".join(lines) + "\n"


def write_graph_file(path, g: MetricGraph, form: OneForm | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_graph_text(g, form))
