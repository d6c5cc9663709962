"""Random instance generators and brute-force references shared by tests."""

import itertools
import math
import random

from powerpacket.costs import (
    INF,
    AbsoluteValue,
    Affine,
    Deviation,
    IndicatorInterval,
    LaminarCostSpec,
    PiecewiseLinearConvex,
)
from powerpacket.network import Network, NodeKind, STNode


def random_convex_cost(rng: random.Random, bounded: bool = False):
    kind = rng.choice(["dev", "abs", "affine", "pwl", "ind"])
    lo, hi = -INF, INF
    if bounded or rng.random() < 0.3:
        lo = rng.randint(-4, 0)
        hi = rng.randint(0, 4)
    if kind == "dev":
        return Deviation(rng.randint(0, 5), rng.randint(-3, 3), lo, hi)
    if kind == "abs":
        return AbsoluteValue(rng.choice([0, 1, 2, "1/2", "3/4"]), lo, hi)
    if kind == "affine":
        return Affine(rng.randint(-3, 3), lo, hi)
    if kind == "pwl":
        k = rng.randint(1, 3)
        bps = sorted(rng.sample(range(-4, 5), k))
        slopes = sorted(rng.randint(-4, 4) for _ in range(k + 1))
        return PiecewiseLinearConvex(tuple(bps), tuple(slopes), rng.randint(-3, 3), lo, hi)
    return IndicatorInterval(lo, hi)


def terminal_network(n: int = 3) -> Network:
    kinds = [NodeKind.SOURCE] + [NodeKind.DESTINATION] * (n - 1)
    return Network(tuple(kinds), ())


def random_laminar_spec(rng: random.Random, max_members: int = 4, N: int = 2, n_nodes: int = 3):
    net = terminal_network(n_nodes)
    ground = [STNode(t, v) for t in range(N) for v in range(n_nodes)]
    sets = []
    target = rng.randint(0, max_members)
    attempts = 0
    while len(sets) < target and attempts < 200:
        attempts += 1
        s = frozenset(rng.sample(ground, rng.randint(1, len(ground))))
        if all(s.isdisjoint(x) or s <= x or x <= s for x in sets):
            sets.append(s)
    members = tuple((s, random_convex_cost(rng)) for s in sets)
    return LaminarCostSpec(net, N, members)


def brute_force_tree_cost(tree, delta, r=0):
    """Cheapest tree-arc flow meeting leaf demands, by exhaustive search.

    Leaves draw ``delta`` out of the tree; the root supplies ``r``. Flows are
    searched in a box that contains every conservation-feasible value.
    """
    n = tree.n_tree_nodes
    demand = [0] * n
    for p, k in tree.attach.items():
        demand[k] += int(delta[p.time][p.node])
    box = sum(abs(x) for row in delta for x in row) + abs(r)
    best = INF
    for flows in itertools.product(range(-box, box + 1), repeat=n - 1):
        inflow = [0] * n
        outflow = [0] * n
        for k, x in enumerate(flows, start=1):
            inflow[k] += x
            outflow[tree.parent[k]] += x
        if any(inflow[k] - outflow[k] != demand[k] for k in range(1, n)):
            continue
        if outflow[0] + demand[0] != r:
            continue
        cost = sum(tree.arc_cost(k)(x) for k, x in enumerate(flows, start=1))
        best = min(best, cost)
    return best


def random_delta(rng: random.Random, N: int, n_nodes: int, span: int = 3, total: int = 0):
    cells = N * n_nodes
    vals = [rng.randint(-span, span) for _ in range(cells - 1)]
    vals.append(total - sum(vals))
    return [vals[t * n_nodes:(t + 1) * n_nodes] for t in range(N)]


def small_bounded_cost(rng: random.Random):
    """Random convex cost whose domain is a subinterval of [-2, 2] containing 0."""
    lo, hi = rng.randint(-2, 0), rng.randint(0, 2)
    kind = rng.choice(["dev", "abs", "affine", "pwl"])
    if kind == "dev":
        return Deviation(rng.randint(0, 4), rng.randint(-2, 2), lo, hi)
    if kind == "abs":
        return AbsoluteValue(rng.choice([0, 1, 3, "1/2"]), lo, hi)
    if kind == "affine":
        return Affine(rng.choice([-2, -1, 0, 1, "3/2"]), lo, hi)
    bp = rng.randint(-1, 1)
    slopes = sorted(rng.randint(-3, 3) for _ in range(2))
    return PiecewiseLinearConvex((bp,), tuple(slopes), 0, lo, hi)


def brute_force_optimum(p):
    """Minimum of ``evaluate`` over every integer flow inside the arc domains."""
    from powerpacket.solver import evaluate

    ranges = []
    for t in range(p.N):
        for a in range(p.net.n_arcs):
            phi = p.arc_costs[t][a]
            ranges.append(range(int(phi.lo), int(phi.hi) + 1))
    best = INF
    for values in itertools.product(*ranges):
        u = [list(values[t * p.net.n_arcs:(t + 1) * p.net.n_arcs]) for t in range(p.N)]
        best = min(best, evaluate(p, u).total)
    return best
