"""Canonical JSON report and the DOT / SVG / CSV emitters."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from html import escape

from .algebra import TowerElement, uni_to_str
from .invariants import Check, _plain
from .parser import to_text

SCHEMA_VERSION = "1"


# ---------------------------------------------------------------------------
# canonical json


def _num(x):
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    raise TypeError(type(x))


def canonical_json(obj, indent=1, _level=0):
    """Deterministic JSON: sorted keys, rationals as strings, floats at 17
    significant digits, complex numbers as ``[re, im]``."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = (",\n").join(f"{pad}{json.dumps(k)}: "
                            f"{canonical_json(v, indent, _level + 1)}"
                            for k, v in items)
        return "{\n" + body + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        body = (",\n").join(pad + canonical_json(v, indent, _level + 1)
                            for v in obj)
        return "[\n" + body + "\n" + end + "]"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj)) if obj.denominator != 1 \
            else str(obj.numerator)
    if isinstance(obj, TowerElement):
        return json.dumps(repr(obj))
    if isinstance(obj, complex):
        return canonical_json([obj.real, obj.imag], indent, _level)
    if hasattr(obj, "item") and not isinstance(obj, (list, dict)):
        return _num(obj.item())                 # numpy scalars
    return _num(obj)


# ---------------------------------------------------------------------------
# sections


def resolution_section(graph, table=None):
    """Vertices, oriented edges and polar data of a resolution graph."""
    verts = []
    for v in graph.vertices:
        row = table.rows.get(v.vid) if table is not None else None
        d = {"id": v.vid, "kind": v.kind, "m": v.m,
             "euler": v.self_intersection,
             "tangent": v.tangent_class,
             "conjugacy_degree": v.conjugacy_degree,
             "c0": None, "c1": None, "nu": None, "p": None, "varpi": None,
             "tau": None, "in_upsilon": None,
             "polar_points": graph.polar.get(v.vid) if v.kind ==
             "exceptional" else None}
        if row is not None:
            d.update(c0=row.c0, c1=row.c1, nu=row.nu, p=row.p,
                     varpi=row.varpi, tau=row.tau,
                     in_upsilon=v.vid in table.upsilon)
        verts.append(d)
    if table is not None:
        edges = [{"from": e.src, "to": e.dst, "invariant": e.invariant}
                 for e in table.edges]
    else:
        edges = [{"from": a, "to": b, "invariant": None}
                 for a, b in sorted(graph.edges)]
    out = {"mode": graph.mode, "vertices": verts, "edges": edges}
    if graph.w is not None:
        out["polar_direction"] = [str(c) for c in graph.w]
        out["polar_curve"] = to_text(graph.polar_poly)
        out["polar_attempts"] = [
            {k: ([str(c) for c in v] if isinstance(v, (tuple, list)) else
                 v if isinstance(v, (bool, str, int)) or v is None else str(v))
             for k, v in a.items()} for a in graph.attempts]
    if table is not None:
        out["upsilon"] = sorted(table.upsilon)
        out["nodes"] = [{"node": n.node, "alpha": _plain(n.alpha)}
                        for n in table.nodes]
    return out


def fiber_section(model):
    return {"pieces": [p.as_dict() for p in model.pieces],
            "corners": [c.as_dict() for c in model.corners],
            "dishes": [d.as_dict() for d in model.dishes],
            "census": model.census.as_dict() if model.census else None}


def flow_section(runs, t, spine=None):
    from .flow import index_sum_check
    crits = runs[-1].criticals
    lhs, rhs, ok = index_sum_check(crits, t)
    out = {"runs": [r.as_dict() for r in runs],
           "criticals": [c.as_dict() for c in crits],
           "index_check": {"fountains_minus_saddles": lhs, "two_minus_t": rhs,
                           "pass": ok},
           "spine": None}
    if spine is not None:
        out["spine"] = {"theta": spine.theta, "V": spine.V, "E": spine.E,
                        "b1": spine.b1, "n_components": spine.n_components,
                        "flags": list(spine.flags),
                        "nodes": [n.as_dict() for n in spine.nodes]}
    return out


def unique_checks(checks):
    """Make check names unique by numbering repeats."""
    seen = {}
    out = []
    for c in checks:
        k = seen.get(c.name, 0)
        seen[c.name] = k + 1
        name = c.name if k == 0 else f"{c.name} [{k + 1}]"
        out.append(Check(name, c.lhs, c.rhs, c.passed))
    return out


def emit_report(text, f, seed, table, model, flow=None, max_ext_degree=64):
    """Canonical JSON report of every module's output.

    Parameters
    ----------
    flow : dict or None
        ``{"runs": [...], "t": int, "spine": NumericSpine or None}``;
        None gives ``"flow": null``.
    """
    checks = list(table.checks) + list(model.checks)
    flow_out = None
    if flow is not None:
        flow_out = flow_section(flow["runs"], flow["t"], flow.get("spine"))
        ic = flow_out["index_check"]
        checks.append(Check("D0 index sum F0 - S0 = 2 - t",
                            ic["fountains_minus_saddles"], ic["two_minus_t"],
                            ic["pass"]))
        if flow.get("spine") is not None:
            checks += flow["spine"].checks
    report = {
        "schema_version": SCHEMA_VERSION,
        "input": {"text": text, "canonical": to_text(f), "seed": seed,
                  "max_ext_degree": max_ext_degree},
        "resolution": resolution_section(table.graph, table),
        "fiber": fiber_section(model),
        "flow": flow_out,
        "mu": table.mu,
        "checks": [c.as_dict() for c in unique_checks(checks)],
    }
    return canonical_json(report) + "\n"


# ---------------------------------------------------------------------------
# dot


def _dot_id(s):
    return '"' + str(s).replace('"', r'\"') + '"'


def emit_dot(graph, table=None):
    """Dual graph in DOT; invariant vertices filled, polar arrows dashed."""
    lines = ["graph resolution {", "  node [shape=ellipse, fontname=\"Helvetica\"];"]
    ups = table.upsilon if table is not None else set()
    for v in graph.exceptional():
        row = table.rows.get(v.vid) if table is not None else None
        label = f"{v.vid} | m={v.m}"
        if row is not None and row.varpi is not None:
            label += f" ϖ={row.varpi}"
        style = "style=filled, fillcolor=\"#9ecae1\"" if v.vid in ups \
            else "style=solid"
        lines.append(f"  v{v.vid} [label={_dot_id(label)}, {style}];")
    for v in graph.arrows():
        lines.append(f"  v{v.vid} [label={_dot_id(f'arrow m={v.m}')}, "
                     f"shape=rarrow, color=\"#08519c\"];")
    for a, b in sorted(graph.edges):
        lines.append(f"  v{a} -- v{b};")
    for vid, k in sorted(graph.polar.items()):
        for j in range(k):
            lines.append(f"  p{vid}_{j} [label=\"polar\", shape=rarrow, "
                         f"style=dashed];")
            lines.append(f"  v{vid} -- p{vid}_{j} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# svg


def emit_svg(samples, spine=None, size=480, radius=2.0):
    """Quiver plot of sampled D_0 field vectors plus spine polylines.

    Only the part of each spine edge lying on ``D_0`` in the first chart
    is drawn, in the same coordinates as the field.
    """
    def sx(z):
        return (z.real + radius) / (2 * radius) * size

    def sy(z):
        return size - (z.imag + radius) / (2 * radius) * size

    out = [f'<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    step = 2 * radius / 30
    for v, w in samples:
        if abs(w) == 0:
            continue
        d = w / abs(w) * step * 0.8
        a, b = v, v + d
        out.append(f'<line x1="{sx(a):.3f}" y1="{sy(a):.3f}" '
                   f'x2="{sx(b):.3f}" y2="{sy(b):.3f}" stroke="#888" '
                   f'stroke-width="0.8"/>')
        out.append(f'<circle cx="{sx(b):.3f}" cy="{sy(b):.3f}" r="0.9" '
                   f'fill="#444"/>')
    if spine is not None:
        for e in spine.edges:
            pts = [p for vid, ch, p in e.path if vid == 0 and ch == "A"
                   and abs(p) <= radius]
            if len(pts) < 2:
                continue
            coords = " ".join(f"{sx(p):.3f},{sy(p):.3f}" for p in pts[::4])
            out.append(f'<polyline points="{coords}" fill="none" '
                       f'stroke="#d62728" stroke-width="1.2"/>')
        for n in spine.nodes:
            if n.vertex == 0 and n.chart == "A":
                z = complex(*n.position)
                out.append(f'<circle cx="{sx(z):.3f}" cy="{sy(z):.3f}" r="3" '
                           f'fill="#1f77b4"><title>{escape(str(n.key))}'
                           f'</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# csv


def emit_csv(trajectories):
    """One row per trajectory sample: index, t, coordinates and ``|f|``."""
    import csv
    import io
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trajectory", "t", "re_x", "im_x", "re_y", "im_y", "abs_f"])
    for k, tr in enumerate(trajectories):
        for row, af in zip(tr.samples, tr.abs_f):
            w.writerow([k] + [format(float(c), ".17g") for c in row]
                       + [format(float(af), ".17g")])
    return buf.getvalue()


def polar_text(graph, vid):
    """Printable polar factors on a divisor (for diagnostics)."""
    return [f"{uni_to_str(q)} (chart {ch})"
            for ch, q in graph.polar_factors.get(vid, [])]
