"""JSON problem files: parsing into a ``Problem`` and writing one back.

Schema (all sections optional when ``scenario`` supplies them)::

    {
      "network": {"nodes": [{"id": 0, "kind": "router", "name": "r0"}, ...],
                  "arcs":  [{"id": 0, "tail": 0, "head": 1}, ...]},
      "horizon": {"N": 3},
      "arc_costs": [{"arc": 0, "beta": 1, "lo": -1, "hi": 1},
                    {"arc": 1, "t": 2, "cost": {"type": "pwl", ...}}, ...],
      "node_costs": [{"set": {"all_t": 9}, "cost": {"type": "deviation", "coeff": 1000, "target": 1}},
                     {"set": {"all_t_group": [11, 12]}, "cost": {...}},
                     {"set": [{"t": 0, "node": 4}], "cost": {...}}],
      "hard_zero_routers": true,
      "scenario": {"type": "E1", "N": 1, "U1": [1, 0, -1, 0]}
    }

Numbers may be integers, decimal strings or ``"p/q"`` strings; bounds accept
``"-inf"``/``"+inf"``. An ``arc_costs`` entry without ``t`` applies to every
unit time; a later entry with ``t`` overrides it for that unit time.
"""

from __future__ import annotations

import json
from pathlib import Path

from .costs import AbsoluteValue, LaminarCostSpec, all_times, all_times_group, cost_from_dict, parse_bound
from .errors import ValidationError
from .network import Network, NodeKind, STNode, validate_network
from .scenarios import MeshSpec, build_mesh, build_scenario, mesh_arc_costs
from .solver import Problem, validate_problem

SCENARIO_TYPES = ("E1", "E2", "E3", "mesh3x3")


def load_problem(path) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return parse_problem(doc)


def _require(doc: dict, key: str):
    if key not in doc:
        raise ValidationError(f"missing section {key!r}")
    return doc[key]


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{what} must be an integer, got {value!r}")
    return value


def parse_network(section: dict) -> Network:
    nodes = sorted(_require(section, "nodes"), key=lambda n: _int(n.get("id"), "node id"))
    if [n["id"] for n in nodes] != list(range(len(nodes))):
        raise ValidationError("node ids must be 0..n-1")
    arcs = sorted(_require(section, "arcs"), key=lambda a: _int(a.get("id"), "arc id"))
    if [a["id"] for a in arcs] != list(range(len(arcs))):
        raise ValidationError("arc ids must be 0..m-1")
    names = None
    if all("name" in n for n in nodes):
        names = tuple(str(n["name"]) for n in nodes)
    net = Network(
        tuple(NodeKind.parse(_require(n, "kind")) for n in nodes),
        tuple((_int(a.get("tail"), "arc tail"), _int(a.get("head"), "arc head")) for a in arcs),
        names,
    )
    validate_network(net)
    return net


def _parse_set(spec, N: int) -> frozenset:
    if isinstance(spec, dict):
        if "all_t" in spec:
            return all_times(N, _int(spec["all_t"], "all_t"))
        if "all_t_group" in spec:
            return all_times_group(N, [_int(v, "all_t_group entry") for v in spec["all_t_group"]])
        raise ValidationError(f"unknown node set form {sorted(spec)}")
    if isinstance(spec, list):
        return frozenset(STNode(_int(p.get("t"), "t"), _int(p.get("node"), "node")) for p in spec)
    raise ValidationError(f"node set must be a list or an object, got {spec!r}")


def _parse_arc_costs(entries, net: Network, N: int):
    table: list[list] = [[None] * net.n_arcs for _ in range(N)]
    ordered = sorted(entries, key=lambda e: "t" in e)  # time-specific entries override
    for e in ordered:
        a = _int(e.get("arc"), "arc_costs arc")
        if not 0 <= a < net.n_arcs:
            raise ValidationError(f"arc_costs references unknown arc {a}")
        if "cost" in e:
            phi = cost_from_dict(e["cost"])
        else:
            phi = AbsoluteValue(e.get("beta", 0), parse_bound(e.get("lo"), lower=True),
                                parse_bound(e.get("hi"), lower=False))
        times = [_int(e["t"], "arc_costs t")] if "t" in e else range(N)
        for t in times:
            if not 0 <= t < N:
                raise ValidationError(f"arc_costs unit time {t} outside 0..{N - 1}")
            table[t][a] = phi
    for t, row in enumerate(table):
        for a, phi in enumerate(row):
            if phi is None:
                raise ValidationError(f"no cost given for arc {a} at unit time {t}")
    return table


def _expand_scenario(doc: dict) -> dict:
    sc = doc["scenario"]
    kind = str(sc.get("type", ""))
    if kind.upper() not in ("E1", "E2", "E3") and kind.lower() != "mesh3x3":
        raise ValidationError(f"scenario type must be one of {SCENARIO_TYPES}, got {kind!r}")
    mesh = MeshSpec(int(sc.get("rows", 3)), int(sc.get("cols", 3)))
    net = build_mesh(mesh)
    if kind.lower() == "mesh3x3":
        explicit = {k: v for k, v in doc.items() if k != "scenario"}
        for key in ("network", "arc_costs"):
            if key in explicit:
                raise ValidationError(f"scenario mesh3x3 supplies {key!r}; remove it from the file")
        N = int(_require(_require(explicit, "horizon"), "N"))
        explicit["network"] = network_to_json(net)
        explicit["arc_costs"] = _arc_costs_to_json(net, [mesh_arc_costs(net, mesh)] * N)
        return explicit
    for key in ("network", "arc_costs", "node_costs", "horizon"):
        if key in doc:
            raise ValidationError(f"scenario {kind} supplies {key!r}; remove it from the file")
    N = sc.get("N", doc.get("horizon", {}).get("N"))
    if N is None:
        raise ValidationError("scenario needs N")
    param = {"E1": "U1", "E2": "U2", "E3": "U"}[kind.upper()]
    targets = _require(sc, param)
    return problem_to_json(build_scenario(kind, int(N), targets, net))


def parse_problem(doc: dict) -> Problem:
    if not isinstance(doc, dict):
        raise ValidationError("problem file must be a JSON object")
    if "scenario" in doc:
        doc = _expand_scenario(doc)
    net = parse_network(_require(doc, "network"))
    N = _require(_require(doc, "horizon"), "N")
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ValidationError("horizon.N must be a positive integer")
    arc_costs = _parse_arc_costs(_require(doc, "arc_costs"), net, N)
    members = []
    for i, entry in enumerate(doc.get("node_costs", [])):
        members.append((_parse_set(_require(entry, "set"), N), cost_from_dict(_require(entry, "cost"))))
    zeros = []
    if doc.get("hard_zero_routers", False):
        zeros = [STNode(t, v) for t in range(N) for v in net.routers]
    for q in doc.get("hard_zero", []):
        zeros.append(STNode(_int(q.get("t"), "t"), _int(q.get("node"), "node")))
    p = Problem(net, N, tuple(map(tuple, arc_costs)), LaminarCostSpec(net, N, tuple(members)), frozenset(zeros))
    validate_problem(p)
    return p


# --- writing ------------------------------------------------------------------


def network_to_json(net: Network) -> dict:
    nodes = []
    for v, kind in enumerate(net.kinds):
        node = {"id": v, "kind": kind.value}
        if net.names is not None:
            node["name"] = net.names[v]
        nodes.append(node)
    arcs = [{"id": a, "tail": tail, "head": head} for a, (tail, head) in enumerate(net.arcs)]
    return {"nodes": nodes, "arcs": arcs}


def _arc_cost_entry(a: int, phi) -> dict:
    if isinstance(phi, AbsoluteValue):
        d = phi.to_dict()
        return {"arc": a, "beta": d["coeff"], "lo": d["lo"], "hi": d["hi"]}
    return {"arc": a, "cost": phi.to_dict()}


def _arc_costs_to_json(net: Network, table) -> list[dict]:
    out = []
    for a in range(net.n_arcs):
        column = [row[a] for row in table]
        if all(phi == column[0] for phi in column):
            out.append(_arc_cost_entry(a, column[0]))
        else:
            for t, phi in enumerate(column):
                out.append({**_arc_cost_entry(a, phi), "t": t})
    return out


def _set_to_json(s: frozenset, N: int):
    nodes = sorted({q.node for q in s})
    if s == all_times_group(N, nodes):
        return {"all_t": nodes[0]} if len(nodes) == 1 else {"all_t_group": nodes}
    return [{"t": q.time, "node": q.node} for q in sorted(s)]


def problem_to_json(p: Problem) -> dict:
    doc = {
        "network": network_to_json(p.net),
        "horizon": {"N": p.N},
        "arc_costs": _arc_costs_to_json(p.net, p.arc_costs),
        "node_costs": [{"set": _set_to_json(s, p.N), "cost": phi.to_dict()} for s, phi in p.node_costs.members],
    }
    all_routers = {STNode(t, v) for t in range(p.N) for v in p.net.routers}
    if p.hard_zero == all_routers and all_routers:
        doc["hard_zero_routers"] = True
    else:
        doc["hard_zero_routers"] = False
        if p.hard_zero:
            doc["hard_zero"] = [{"t": q.time, "node": q.node} for q in sorted(p.hard_zero)]
    return doc
