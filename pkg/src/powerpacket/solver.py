"""Convex-cost circulation reduction and cycle-canceling solver.

The packet-routing problem minimizes arc costs on the time-expanded graph
plus a laminar cost on the flow boundary. The boundary cost becomes flow on
a tree gadget: every ST node sends its negated boundary into the innermost
laminar member containing it, member arcs carry the aggregated boundary
toward the root, and the root closes the circulation. Minimizing a
separable convex cost over integer circulations is then done by repeatedly
pushing one unit around a negative residual cycle.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .costs import (
    INF,
    CostTree,
    Deviation,
    IndicatorInterval,
    LaminarCostSpec,
    PiecewiseLinearConvex,
    UnivariateConvexCost,
    _lcm,
    eval_node_cost,
    laminar_to_tree,
    validate_laminar,
)
from .errors import (
    DimensionMismatch,
    IterationLimit,
    NegativeCycleFound,
    NoObviousFeasiblePoint,
    UnboundedDomain,
    ValidationError,
)
from .network import ExpandedGraph, Network, NodeKind, SpatioTemporalFlow, STNode, boundary, expand

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 10**6


@dataclass(frozen=True)
class Problem:
    """One instance: network, horizon, per-ST-arc costs, node-group costs, hard zeros.

    ``arc_costs[t][a]`` is the cost of ST arc ``(t, a)``; its effective domain
    is the capacity interval. ``hard_zero`` lists router ST nodes whose
    boundary must vanish.
    """

    net: Network
    N: int
    arc_costs: tuple[tuple[UnivariateConvexCost, ...], ...]
    node_costs: LaminarCostSpec
    hard_zero: frozenset = frozenset()

    @classmethod
    def build(cls, net: Network, N: int, arc_costs: Sequence, node_costs=(), hard_zero=()) -> "Problem":
        """Convenience constructor.

        ``arc_costs`` may be one cost per arc (time-independent) or an
        ``N x |A|`` nested sequence. ``node_costs`` is a ``LaminarCostSpec`` or
        a sequence of ``(set of (t, v), cost)`` pairs.
        """
        arc_costs = list(arc_costs)
        if arc_costs and isinstance(arc_costs[0], UnivariateConvexCost):
            table = tuple(tuple(arc_costs) for _ in range(N))
        else:
            table = tuple(tuple(row) for row in arc_costs)
        if not isinstance(node_costs, LaminarCostSpec):
            node_costs = LaminarCostSpec(net, N, tuple(node_costs))
        return cls(net, N, table, node_costs, frozenset(STNode(*p) for p in hard_zero))

    @property
    def graph(self) -> ExpandedGraph:
        return expand(self.net, self.N)


def validate_problem(p: Problem) -> None:
    graph = expand(p.net, p.N)
    if len(p.arc_costs) != p.N or any(len(row) != p.net.n_arcs for row in p.arc_costs):
        raise DimensionMismatch(f"arc costs must form an {p.N} x {p.net.n_arcs} table")
    for t, row in enumerate(p.arc_costs):
        for a, phi in enumerate(row):
            if not isinstance(phi, UnivariateConvexCost):
                raise ValidationError(f"arc cost at (t={t}, arc={a}) is not a cost function")
            if not phi.is_convex():
                raise ValidationError(f"arc cost at (t={t}, arc={a}) is not convex")
    spec = p.node_costs
    if spec.net != p.net or spec.N != p.N:
        raise DimensionMismatch("node cost spec is defined on a different ground set")
    validate_laminar(spec)
    for q in p.hard_zero:
        if not (0 <= q.time < graph.N and 0 <= q.node < p.net.n_nodes):
            raise ValidationError(f"hard-zero node {tuple(q)} is outside the ground set")
        if p.net.kinds[q.node] is not NodeKind.ROUTER:
            raise ValidationError(f"hard-zero node {tuple(q)} is not a router")


@dataclass(frozen=True)
class ReducedCirculation:
    """Circulation instance equivalent to a ``Problem``.

    Node layout: ST nodes ``0 .. N|V|-1``, then tree nodes (root first).
    Arc layout: ST arcs, then one attachment arc per ST node, then one arc
    per laminar member. Every arc has a finite capacity ``[lo, hi]``;
    ``capped`` marks bounds that replaced an infinite domain end.
    """

    problem: Problem
    tree: CostTree
    n_nodes: int
    tails: tuple[int, ...]
    heads: tuple[int, ...]
    costs: tuple[UnivariateConvexCost, ...]
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    capped: tuple[tuple[bool, bool], ...]
    kinds: tuple[str, ...]
    cap: int
    scale: int

    @property
    def n_arcs(self) -> int:
        return len(self.tails)

    @property
    def n_st_nodes(self) -> int:
        return self.problem.N * self.problem.net.n_nodes

    @property
    def n_st_arcs(self) -> int:
        return self.problem.N * self.problem.net.n_arcs

    @property
    def root(self) -> int:
        return self.n_st_nodes

    def tree_node(self, k: int) -> int:
        return self.n_st_nodes + k

    def attachment_arc(self, st_node_index: int) -> int:
        return self.n_st_arcs + st_node_index

    def tree_arc(self, member: int) -> int:
        return self.n_st_arcs + self.n_st_nodes + member

    def cost_of(self, flow: Sequence[int]) -> Fraction:
        total = Fraction(0)
        for e, x in enumerate(flow):
            total += self.costs[e](x)
        return total

    def flow_from_problem_flow(self, u) -> list[int]:
        """Lift a flow on the expanded graph to the full circulation."""
        u = u if isinstance(u, SpatioTemporalFlow) else SpatioTemporalFlow(u)
        net = self.problem.net
        d = boundary(net, u)
        flow = [int(x) for x in u.values.flat]
        flow += [-int(x) for x in d.flat]
        tree_flows = self.tree.arc_flows(d)
        flow += tree_flows[1:]
        return flow


def _capacity_cap(p: Problem) -> int:
    bound = 1
    for _, phi in p.node_costs.members:
        if isinstance(phi, Deviation) and phi.coeff > 0:
            bound += abs(phi.target)
        if isinstance(phi, PiecewiseLinearConvex):
            bound += max(abs(b) for b in phi.breakpoints)
        for b in (phi.lo, phi.hi):
            if math.isfinite(b):
                bound += abs(int(b))
    for row in p.arc_costs:
        for phi in row:
            if math.isfinite(phi.lo) and math.isfinite(phi.hi):
                bound += max(abs(int(phi.lo)), abs(int(phi.hi)))
            elif isinstance(phi, PiecewiseLinearConvex):
                bound += max(abs(b) for b in phi.breakpoints)
    return bound


def reduce(p: Problem) -> ReducedCirculation:
    validate_problem(p)
    net, N = p.net, p.N
    graph = expand(net, N)
    tree = laminar_to_tree(p.node_costs)
    n_st = graph.n_nodes
    cap = _capacity_cap(p)

    tails: list[int] = []
    heads: list[int] = []
    costs: list[UnivariateConvexCost] = []
    kinds: list[str] = []
    for t in range(N):
        for a, (tail, head) in enumerate(net.arcs):
            tails.append(graph.node_index(t, tail))
            heads.append(graph.node_index(t, head))
            costs.append(p.arc_costs[t][a])
            kinds.append("st")
    free = IndicatorInterval()
    pinned = IndicatorInterval(0, 0)
    for i, q in enumerate(graph.nodes()):
        tails.append(i)
        heads.append(n_st + tree.attach[q])
        costs.append(pinned if q in p.hard_zero else free)
        kinds.append("attach")
    for k in range(1, tree.n_tree_nodes):
        tails.append(n_st + tree.parent[k])
        heads.append(n_st + k)
        costs.append(tree.arc_cost(k))
        kinds.append("tree")

    lo, hi, capped = [], [], []
    for e, phi in enumerate(costs):
        if not phi.contains(0):
            what = "arc" if kinds[e] == "st" else "node-group" if kinds[e] == "tree" else "attachment"
            raise NoObviousFeasiblePoint(
                f"zero flow is infeasible: {what} cost #{e} has domain [{phi.lo}, {phi.hi}] excluding 0"
            )
        lo.append(int(max(phi.lo, -cap)))
        hi.append(int(min(phi.hi, cap)))
        capped.append((phi.lo < -cap, phi.hi > cap))

    scale = _lcm(phi.denominator for phi in costs)
    return ReducedCirculation(
        problem=p,
        tree=tree,
        n_nodes=n_st + tree.n_tree_nodes,
        tails=tuple(tails),
        heads=tuple(heads),
        costs=tuple(costs),
        lo=tuple(lo),
        hi=tuple(hi),
        capped=tuple(capped),
        kinds=tuple(kinds),
        cap=cap,
        scale=scale,
    )


class ResidualArc(NamedTuple):
    tail: int
    head: int
    cost: Fraction | int
    arc: int
    direction: int  # +1 pushes along the arc, -1 against it


def residual_arcs(rc: ReducedCirculation, flow: Sequence[int], scaled: bool = False) -> list[ResidualArc]:
    """Unit-step residual arcs of ``flow``, ordered by (arc index, forward first).

    Forward cost is ``phi(x+1) - phi(x)`` when ``x+1 <= hi``; backward cost is
    ``phi(x-1) - phi(x)`` when ``x-1 >= lo``. With ``scaled`` the costs are
    multiplied by ``rc.scale`` and returned as ints.
    """
    out = []
    for e in range(rc.n_arcs):
        x = flow[e]
        phi = rc.costs[e]
        here = phi(x)
        if x + 1 <= rc.hi[e]:
            c = phi(x + 1) - here
            out.append(ResidualArc(rc.tails[e], rc.heads[e], int(c * rc.scale) if scaled else c, e, 1))
        if x - 1 >= rc.lo[e]:
            c = phi(x - 1) - here
            out.append(ResidualArc(rc.heads[e], rc.tails[e], int(c * rc.scale) if scaled else c, e, -1))
    return out


def _cycle_in_predecessors(n_nodes, pred, residual):
    """Return a cycle of the predecessor graph as residual-arc indices, or None."""
    state = [0] * n_nodes  # 0 unseen, 1 on current walk, 2 finished
    for start in range(n_nodes):
        if state[start]:
            continue
        walk = []
        v = start
        while v != -1 and state[v] == 0:
            state[v] = 1
            walk.append(v)
            k = pred[v]
            v = residual[k].tail if k != -1 else -1
        if v != -1 and state[v] == 1:
            cycle = []
            w = v
            while True:
                k = pred[w]
                cycle.append(k)
                w = residual[k].tail
                if w == v:
                    break
            cycle.reverse()
            for u in walk:
                state[u] = 2
            return cycle
        for u in walk:
            state[u] = 2
    return None


def find_negative_cycle(residual: Sequence[ResidualArc], n_nodes: int):
    """Bellman-Ford from a virtual source joined to every node at cost 0.

    Returns ``(cycle, potentials)``: ``cycle`` is a list of residual arcs
    forming a simple directed cycle of negative total cost, or None; in the
    latter case ``potentials`` are shortest distances satisfying
    ``cost + pot[tail] - pot[head] >= 0`` on every residual arc.
    The predecessor graph is scanned after every pass so cycles are found
    as soon as they form.
    """
    dist = [0] * n_nodes
    pred = [-1] * n_nodes
    for _ in range(n_nodes + 1):
        changed = False
        for k, r in enumerate(residual):
            nd = dist[r.tail] + r.cost
            if nd < dist[r.head]:
                dist[r.head] = nd
                pred[r.head] = k
                changed = True
        if not changed:
            return None, dist
        found = _cycle_in_predecessors(n_nodes, pred, residual)
        if found is not None:
            cycle = [residual[k] for k in found]
            if sum(r.cost for r in cycle) < 0:
                return cycle, None
    raise AssertionError("Bellman-Ford failed to settle or expose a cycle")


def verify_optimality(rc: ReducedCirculation, flow: Sequence[int]) -> list[Fraction]:
    """Independent optimality check of a feasible circulation.

    Runs a plain Bellman-Ford in exact rationals over the full residual
    graph. Returns node potentials proving that no negative residual cycle
    exists; raises ``NegativeCycleFound`` otherwise.
    """
    for e, x in enumerate(flow):
        if not rc.lo[e] <= x <= rc.hi[e]:
            raise ValidationError(f"arc {e} flow {x} outside [{rc.lo[e]}, {rc.hi[e]}]")
    excess = [0] * rc.n_nodes
    for e, x in enumerate(flow):
        excess[rc.tails[e]] -= x
        excess[rc.heads[e]] += x
    if any(excess):
        raise ValidationError("flow violates conservation")
    residual = residual_arcs(rc, flow)
    n = rc.n_nodes
    pot = [Fraction(0)] * n
    pred: list[ResidualArc | None] = [None] * n
    last = -1
    for _ in range(n):
        last = -1
        for r in residual:
            if pot[r.tail] + r.cost < pot[r.head]:
                pot[r.head] = pot[r.tail] + r.cost
                pred[r.head] = r
                last = r.head
        if last == -1:
            break
    if last != -1:
        v = last
        for _ in range(n):
            v = pred[v].tail
        cycle, w = [], v
        while True:
            r = pred[w]
            cycle.append(r)
            w = r.tail
            if w == v:
                break
        cycle.reverse()
        raise NegativeCycleFound(cycle, sum(r.cost for r in cycle))
    for r in residual:
        assert r.cost + pot[r.tail] - pot[r.head] >= 0
    return pot


@dataclass(frozen=True)
class CostBreakdown:
    """Objective split into source/destination (V1), link (V2) and router (V3) terms."""

    supply: Fraction | float
    transfer: Fraction | float
    storage: Fraction | float

    @property
    def total(self):
        return self.supply + self.transfer + self.storage


def evaluate(p: Problem, u) -> CostBreakdown:
    """Objective of ``u`` recomputed from scratch; ``inf`` terms flag infeasibility.

    Hard-zero violations and a nonzero total boundary count as infinite
    storage cost.
    """
    u = u if isinstance(u, SpatioTemporalFlow) else SpatioTemporalFlow(u)
    u.check_dimensions(p.net, p.N)
    transfer = Fraction(0)
    for t in range(p.N):
        for a in range(p.net.n_arcs):
            transfer += p.arc_costs[t][a](int(u.values[t, a]))
    d = boundary(p.net, u)
    spec = p.node_costs
    supply = Fraction(0)
    storage = Fraction(0)
    if eval_node_cost(spec, d) == INF:
        storage = INF
    for i, (s, phi) in enumerate(spec.members):
        value = phi(sum(int(d[q.time, q.node]) for q in s))
        if spec.is_router_group(i):
            storage += value
        else:
            supply += value
    if any(d[q.time, q.node] != 0 for q in p.hard_zero):
        storage = INF
    return CostBreakdown(supply, transfer, storage)


@dataclass(frozen=True)
class Solution:
    problem: Problem
    u: SpatioTemporalFlow
    cost: Fraction
    breakdown: CostBreakdown
    boundary: np.ndarray = field(repr=False)
    potentials: tuple[Fraction, ...] = field(repr=False)
    iterations: int = 0
    circulation: tuple[int, ...] = field(default=(), repr=False)

    @property
    def certified(self) -> bool:
        return bool(self.potentials)

    def deviations(self) -> list[tuple[int, int]]:
        """``(member index, |value - target|)`` for every missed deviation target."""
        out = []
        spec = self.problem.node_costs
        for i, (s, phi) in enumerate(spec.members):
            if isinstance(phi, Deviation):
                value = sum(int(self.boundary[q.time, q.node]) for q in s)
                if value != phi.target:
                    out.append((i, abs(value - phi.target)))
        return out


def solve(p: Problem, max_iters: int = DEFAULT_MAX_ITERS) -> Solution:
    """Globally optimal integer flow by unit-step cycle-canceling from zero flow."""
    rc = reduce(p)
    flow = [0] * rc.n_arcs
    iterations = 0
    cost = rc.cost_of(flow) * rc.scale
    while True:
        residual = residual_arcs(rc, flow, scaled=True)
        cycle, _ = find_negative_cycle(residual, rc.n_nodes)
        if cycle is None:
            break
        if iterations >= max_iters:
            raise IterationLimit(f"no optimum after {max_iters} augmentations")
        delta = sum(r.cost for r in cycle)
        for r in cycle:
            flow[r.arc] += r.direction
        new_cost = rc.cost_of(flow) * rc.scale
        assert new_cost == cost + delta < cost, "augmentation did not decrease the cost"
        cost = new_cost
        iterations += 1
    logger.debug("cycle-canceling finished after %d augmentations", iterations)

    for e, (low_capped, high_capped) in enumerate(rc.capped):
        if (low_capped and flow[e] == rc.lo[e]) or (high_capped and flow[e] == rc.hi[e]):
            raise UnboundedDomain(f"arc {e} reached the artificial bound {rc.cap}; the objective may be unbounded")

    potentials = verify_optimality(rc, flow)
    u = SpatioTemporalFlow(np.array(flow[: rc.n_st_arcs], dtype=np.int64).reshape(p.N, p.net.n_arcs))
    d = boundary(p.net, u)
    if [-x for x in flow[rc.n_st_arcs: rc.n_st_arcs + rc.n_st_nodes]] != [int(x) for x in d.flat]:
        raise AssertionError("attachment flows disagree with the boundary")
    breakdown = evaluate(p, u)
    total = breakdown.total
    if total != rc.cost_of(flow):
        raise AssertionError(f"objective {total} differs from circulation cost {rc.cost_of(flow)}")
    return Solution(
        problem=p,
        u=u,
        cost=total,
        breakdown=breakdown,
        boundary=d,
        potentials=tuple(potentials),
        iterations=iterations,
        circulation=tuple(flow),
    )
