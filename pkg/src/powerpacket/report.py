"""Text, JSON and DOT renderings of a solution."""

from __future__ import annotations

import json
from fractions import Fraction

from .costs import INF
from .solver import Solution
from .spm import from_flow, render

NOT_REPRESENTED = "given energy not represented (deviation > 0)"


def number(q):
    """JSON-friendly exact number: int when integral, else ``"p/q"``."""
    if q == INF:
        return "+inf"
    q = Fraction(q)
    return int(q) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _grid(title: str, row_labels, col_labels, values) -> str:
    rows = [[title] + list(col_labels)]
    for label, row in zip(row_labels, values):
        rows.append([label] + [str(int(x)) for x in row])
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = [" | ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def warnings(sol: Solution) -> list[str]:
    return [NOT_REPRESENTED] if sol.deviations() else []


def text_report(sol: Solution) -> str:
    p = sol.problem
    net = p.net
    b = sol.breakdown
    out = [
        f"total_cost: {number(sol.cost)}",
        f"cost_V1_supply: {number(b.supply)}",
        f"cost_V2_transfer: {number(b.transfer)}",
        f"cost_V3_storage: {number(b.storage)}",
        f"augmentations: {sol.iterations}",
        f"certificate: {'no negative residual cycle' if sol.certified else 'missing'}",
        f"horizon: {p.N}",
    ]
    out += [f"warning: {w}" for w in warnings(sol)]
    out.append("")
    times = [f"t{t}" for t in range(p.N)]
    arc_labels = [f"a{a} {net.node_name(h)}->{net.node_name(k)}" for a, (h, k) in enumerate(net.arcs)]
    out.append("flow u(t, a):")
    out.append(_grid("arc", arc_labels, times, sol.u.values.T))
    out.append("boundary du(t, v):")
    out.append(_grid("node", [f"{net.node_name(v)} ({k.value})" for v, k in enumerate(net.kinds)], times, sol.boundary.T))
    out.append("symbol propagation matrix (cell 0):")
    out.append(render(from_flow(sol.u), net))
    return "\n".join(out)


def json_report(sol: Solution) -> dict:
    b = sol.breakdown
    return {
        "total_cost": number(sol.cost),
        "breakdown": {"V1_supply": number(b.supply), "V2_transfer": number(b.transfer), "V3_storage": number(b.storage)},
        "augmentations": sol.iterations,
        "certified": sol.certified,
        "horizon": sol.problem.N,
        "flow": sol.u.tolist(),
        "boundary": sol.boundary.tolist(),
        "spm": from_flow(sol.u).to_json(),
        "warnings": warnings(sol),
    }


def dumps_json_report(sol: Solution) -> str:
    return json.dumps(json_report(sol), indent=2, sort_keys=True) + "\n"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(sol: Solution) -> str:
    """Time-expanded flow as a DOT digraph, one column (cluster) per unit time.

    Arcs with nonzero flow are labelled with the flow value; idle arcs are
    drawn dotted and unlabelled.
    """
    p = sol.problem
    net = p.net
    shapes = {"router": "circle", "source": "box", "destination": "doublecircle"}
    lines = ["digraph time_expanded_flow {", "  rankdir=LR;", "  newrank=true;", "  node [fontsize=10];"]
    for t in range(p.N):
        lines.append(f"  subgraph cluster_t{t} {{")
        lines.append(f"    label={_quote(f't{t}')};")
        for v, kind in enumerate(net.kinds):
            name = _quote(f"t{t}:{net.node_name(v)}")
            lines.append(f"    {name} [label={_quote(net.node_name(v))}, shape={shapes[kind.value]}];")
        for a, (tail, head) in enumerate(net.arcs):
            x = int(sol.u.values[t, a])
            src, dst = _quote(f"t{t}:{net.node_name(tail)}"), _quote(f"t{t}:{net.node_name(head)}")
            if x:
                lines.append(f"    {src} -> {dst} [label={_quote(str(x))}, penwidth=2];")
            else:
                lines.append(f"    {src} -> {dst} [style=dotted, color=gray];")
        lines.append("  }")
    for t in range(p.N - 1):
        for v in range(net.n_nodes):
            a, b = _quote(f"t{t}:{net.node_name(v)}"), _quote(f"t{t + 1}:{net.node_name(v)}")
            lines.append(f"  {a} -> {b} [style=invis];")
    lines.append("}")
    return "\n".join(lines) + "\n"
