"""Mesh network experiments (E1/E2/E3) and a brute-force reference oracle.

The mesh is a grid of routers with unit-capacity, unit-cost links. Two
sources feed the left corners and two destinations drain the right corners:

    s1 -> 0 - 1 - 2 -> d1
          |   |   |
          3 - 4 - 5
          |   |   |
    s2 -> 6 - 7 - 8 -> d2

Terminal links are free and uncapacitated. E1 fixes the energy of every
source and destination, E2 only the destinations, E3 only the total
delivered; misses cost 1000 per unit.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .costs import INF, AbsoluteValue, Deviation, _lcm, all_times, all_times_group
from .errors import TooLarge, UnbalancedE1, ValidationError
from .network import Network, NodeKind, STNode
from .solver import Problem

PENALTY = 1000
DEFAULT_ORACLE_BUDGET = 2_000_000


@dataclass(frozen=True)
class MeshSpec:
    """Grid of ``rows x cols`` routers plus terminals attached to given routers.

    ``sources``/``destinations`` default to the left and right corners.
    """

    rows: int = 3
    cols: int = 3
    sources: tuple[int, ...] | None = None
    destinations: tuple[int, ...] | None = None
    beta: int = 1
    link_lo: int = -1
    link_hi: int = 1
    terminal_beta: int = 0

    def source_routers(self) -> tuple[int, ...]:
        if self.sources is not None:
            return tuple(self.sources)
        return (0, (self.rows - 1) * self.cols)

    def destination_routers(self) -> tuple[int, ...]:
        if self.destinations is not None:
            return tuple(self.destinations)
        return (self.cols - 1, self.rows * self.cols - 1)


def build_mesh(spec: MeshSpec = MeshSpec()) -> Network:
    """Routers ``0..rows*cols-1`` row-major, then sources, then destinations.

    Arcs: horizontal links row by row, vertical links row by row, then
    ``source -> router`` and ``router -> destination`` links.
    """
    if spec.rows < 1 or spec.cols < 1:
        raise ValidationError("mesh needs at least one row and one column")
    n_routers = spec.rows * spec.cols
    src, dst = spec.source_routers(), spec.destination_routers()
    for r in src + dst:
        if not 0 <= r < n_routers:
            raise ValidationError(f"terminal attached to missing router {r}")
    kinds = [NodeKind.ROUTER] * n_routers + [NodeKind.SOURCE] * len(src) + [NodeKind.DESTINATION] * len(dst)
    names = [str(i) for i in range(n_routers)]
    names += [f"s{i + 1}" for i in range(len(src))] + [f"d{i + 1}" for i in range(len(dst))]
    arcs = []
    for r in range(spec.rows):
        for c in range(spec.cols - 1):
            arcs.append((r * spec.cols + c, r * spec.cols + c + 1))
    for r in range(spec.rows - 1):
        for c in range(spec.cols):
            arcs.append((r * spec.cols + c, (r + 1) * spec.cols + c))
    for i, router in enumerate(src):
        arcs.append((n_routers + i, router))
    for i, router in enumerate(dst):
        arcs.append((router, n_routers + len(src) + i))
    return Network(tuple(kinds), tuple(arcs), tuple(names))


def mesh_arc_costs(net: Network, spec: MeshSpec = MeshSpec()) -> list[AbsoluteValue]:
    """``beta|x|`` on ``[link_lo, link_hi]`` for router links, free and unbounded otherwise."""
    out = []
    for tail, head in net.arcs:
        if net.kinds[tail] is NodeKind.ROUTER and net.kinds[head] is NodeKind.ROUTER:
            out.append(AbsoluteValue(spec.beta, spec.link_lo, spec.link_hi))
        else:
            out.append(AbsoluteValue(spec.terminal_beta, -INF, INF))
    return out


def _router_zeros(net: Network, N: int) -> list[STNode]:
    return [STNode(t, v) for t in range(N) for v in net.routers]


def _per_node(values, nodes: Sequence[int], what: str) -> list[int]:
    if isinstance(values, Mapping):
        try:
            return [int(values[v]) for v in nodes]
        except KeyError as exc:
            raise ValidationError(f"{what} missing a value for node {exc.args[0]}") from None
    values = list(values)
    if len(values) != len(nodes):
        raise ValidationError(f"{what} needs {len(nodes)} values, got {len(values)}")
    return [int(x) for x in values]


def build_problem_e1(net: Network, N: int, U1, arc_costs=None, penalty=PENALTY) -> Problem:
    """Every source and destination ``v`` pays ``penalty * |boundary(T x {v}) - U1(v)|``.

    ``U1`` lists sources then destinations (or maps node id to value) and
    must balance: sources sum to minus the destinations.
    """
    nodes = net.sources + net.destinations
    targets = _per_node(U1, nodes, "U1")
    if sum(targets) != 0:
        raise UnbalancedE1(f"source targets {targets[:len(net.sources)]} do not balance destinations")
    members = [(all_times(N, v), Deviation(penalty, u)) for v, u in zip(nodes, targets)]
    return Problem.build(net, N, arc_costs or mesh_arc_costs(net), members, _router_zeros(net, N))


def build_problem_e2(net: Network, N: int, U2, arc_costs=None, penalty=PENALTY) -> Problem:
    """Every destination ``d`` pays ``penalty * |boundary(T x {d}) + U2(d)|``; sources are free."""
    targets = _per_node(U2, net.destinations, "U2")
    if any(x < 0 for x in targets):
        raise ValidationError("U2 must be nonnegative")
    members = [(all_times(N, d), Deviation(penalty, -u)) for d, u in zip(net.destinations, targets)]
    return Problem.build(net, N, arc_costs or mesh_arc_costs(net), members, _router_zeros(net, N))


def build_problem_e3(net: Network, N: int, U: int, arc_costs=None, penalty=PENALTY) -> Problem:
    """Destinations jointly pay ``penalty * |boundary(T x D) + U|``; sources are free."""
    if int(U) != U or U < 0:
        raise ValidationError("U must be a nonnegative integer")
    members = [(all_times_group(N, net.destinations), Deviation(penalty, -int(U)))]
    return Problem.build(net, N, arc_costs or mesh_arc_costs(net), members, _router_zeros(net, N))


# Reported optima: (N, targets, cost). E1 targets are (s1, s2, d1, d2).
TABLE1 = [
    (1, (0, 0, 0, 0), 0),
    (1, (1, 0, -1, 0), 2),
    (1, (1, 1, -1, -1), 4),
    (1, (1, 1, 0, -2), 6),
    (1, (2, 1, -1, -2), 8),
    (1, (2, 1, -2, -1), 8),
]
TABLE2 = [
    (2, (3, 3), 16),
    (3, (3, 3), 12),
    (5, (3, 3), 12),
    (2, (5, 2), 1016),
    (3, (5, 2), 18),
    (5, (5, 2), 14),
]
TABLE3 = [
    (2, 6, 16),
    (3, 6, 12),
    (5, 6, 12),
    (2, 7, 1016),
    (3, 7, 16),
    (5, 7, 14),
]


def table_configurations(only: str | None = None):
    """Yield ``(family, N, targets, expected_cost)`` for the published tables."""
    families = {"e1": TABLE1, "e2": TABLE2, "e3": TABLE3}
    for name, rows in families.items():
        if only is not None and only.lower() != name:
            continue
        for N, targets, cost in rows:
            yield name, N, targets, cost


def build_scenario(family: str, N: int, targets, net: Network | None = None) -> Problem:
    net = net or build_mesh()
    family = family.lower()
    if family == "e1":
        return build_problem_e1(net, N, targets)
    if family == "e2":
        return build_problem_e2(net, N, targets)
    if family == "e3":
        return build_problem_e3(net, N, targets)
    raise ValidationError(f"unknown scenario family {family!r}")


# --- brute-force oracle -----------------------------------------------------


def _oracle_layout(p: Problem):
    """Check the instance fits the enumeration scheme; return group node sets."""
    net, N = p.net, p.N
    routers = set(net.routers)
    if set(p.hard_zero) != set(_router_zeros(net, N)):
        raise TooLarge("oracle needs a zero boundary at every router and unit time")
    groups = []
    for s, _ in p.node_costs.members:
        nodes = {q.node for q in s}
        if nodes & routers or s != all_times_group(N, nodes):
            raise TooLarge("oracle supports only time-aggregated terminal groups")
        groups.append(tuple(sorted(nodes)))
    infinite_at = {}
    for a, (tail, head) in enumerate(net.arcs):
        phis = {p.arc_costs[t][a] for t in range(N)}
        finite = all(math.isfinite(phi.lo) and math.isfinite(phi.hi) for phi in phis)
        if finite:
            continue
        ends = [v for v in (tail, head) if v in routers]
        if len(ends) != 1:
            raise TooLarge(f"unbounded arc {a} must join exactly one router to a terminal")
        if ends[0] in infinite_at:
            raise TooLarge(f"router {ends[0]} has more than one unbounded arc")
        infinite_at[ends[0]] = a
    return groups, infinite_at


@functools.lru_cache(maxsize=64)
def _slice_table(net: Network, costs: tuple, groups: tuple, infinite_at: tuple, scale: int, budget: int):
    """Minimum scaled link cost per reachable group-boundary vector in one unit time."""
    infinite_at = dict(infinite_at)
    inf_arcs = set(infinite_at.values())
    fin_arcs = [a for a in range(net.n_arcs) if a not in inf_arcs]
    domains = [list(range(int(costs[a].lo), int(costs[a].hi) + 1)) for a in fin_arcs]
    total = math.prod(len(d) for d in domains) if domains else 1
    if total > budget:
        raise TooLarge(f"{total} link assignments exceed the budget of {budget}")

    values = np.zeros((total, net.n_arcs), dtype=np.int64)
    index = np.arange(total, dtype=np.int64)
    cost = np.zeros(total, dtype=np.int64)
    for a, dom in zip(fin_arcs, domains):
        index, digit = np.divmod(index, len(dom))
        values[:, a] = np.asarray(dom, dtype=np.int64)[digit]
        lookup = np.array([int(costs[a](x) * scale) for x in dom], dtype=np.int64)
        cost += lookup[digit]

    inc = net.incidence()
    balance = values @ inc
    keep = np.ones(total, dtype=bool)
    for r in net.routers:
        if r in infinite_at:
            a = infinite_at[r]
            # router balance must vanish: the unbounded arc absorbs it
            x = balance[:, r] if net.arcs[a][1] == r else -balance[:, r]
            values[:, a] = x
            keep &= (x >= costs[a].lo) & (x <= costs[a].hi)
        else:
            keep &= balance[:, r] == 0
    values, cost = values[keep], cost[keep]
    for a in inf_arcs:
        col = values[:, a]
        uniq, inv = np.unique(col, return_inverse=True)
        lookup = np.array([int(costs[a](int(x)) * scale) for x in uniq], dtype=np.int64)
        cost = cost + lookup[inv.reshape(-1)]

    terminal_boundary = values @ inc
    keys = np.stack([terminal_boundary[:, list(g)].sum(axis=1) for g in groups], axis=1) if groups else np.zeros((len(cost), 0), dtype=np.int64)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    best = np.full(len(uniq), np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(best, inv.reshape(-1), cost)
    return {tuple(int(x) for x in row): int(c) for row, c in zip(uniq, best)}


def oracle_cost(p: Problem, budget: int = DEFAULT_ORACLE_BUDGET) -> Fraction:
    """Optimal objective by exhaustive enumeration plus dynamic programming over time.

    Each unit time is enumerated independently over every assignment of the
    bounded links; unbounded terminal links follow from router conservation.
    Assignments are summarised by the boundary they produce on each terminal
    group, keeping the cheapest; a DP then combines unit times and finally
    charges the group costs. Shares no code with the circulation solver.
    """
    groups, infinite_at = _oracle_layout(p)
    member_costs = [phi for _, phi in p.node_costs.members]
    scale = _lcm([phi.denominator for phi in member_costs]
                 + [phi.denominator for row in p.arc_costs for phi in row])
    states = {tuple(0 for _ in groups): 0}
    for t in range(p.N):
        table = _slice_table(p.net, tuple(p.arc_costs[t]), tuple(groups),
                             tuple(sorted(infinite_at.items())), scale, budget)
        nxt: dict[tuple, int] = {}
        for key, c in states.items():
            for step, sc in table.items():
                k = tuple(x + y for x, y in zip(key, step))
                v = c + sc
                if v < nxt.get(k, v + 1):
                    nxt[k] = v
        states = nxt
    best = None
    for key, c in states.items():
        value = Fraction(c, scale)
        for phi, x in zip(member_costs, key):
            value += phi(x)
        if best is None or value < best:
            best = value
    return best
