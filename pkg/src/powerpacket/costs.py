"""Univariate discrete convex costs and laminar node-group costs.

Values are exact: finite values are ``Fraction`` and points outside the
effective domain evaluate to ``math.inf``.

The node cost of a boundary ``d`` is ``sum_X f_X(d(X))`` over the members
``X`` of a laminar family, restricted to ``sum(d) == r``. Such a function is
M-convex, and it is realised as flow on a directed tree (``CostTree``) whose
arc for member ``X`` carries ``d(X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, MixedGroup, NotLaminar, ValidationError
from .network import Network, NodeKind, STNode

INF = math.inf
Value = Union[Fraction, float]
Bound = Union[int, float]


def as_rational(value) -> Fraction:
    """Accept ints, Fractions, ``"p/q"`` or decimal strings, and floats."""
    if isinstance(value, bool):
        raise ValidationError(f"not a number: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"coefficient must be finite, got {value!r}")
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational number: {value!r}") from None


def parse_bound(value, *, lower: bool) -> Bound:
    """Integer bound, or +-inf given as ``"-inf"``/``"+inf"``/``None``/float inf."""
    if value is None:
        return -INF if lower else INF
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("-inf", "-infinity"):
            return -INF
        if text in ("inf", "+inf", "infinity", "+infinity"):
            return INF
    if isinstance(value, float) and math.isinf(value):
        return value
    q = as_rational(value)
    if q.denominator != 1:
        raise ValidationError(f"capacity bounds must be integers, got {value!r}")
    return int(q)


def _lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


class UnivariateConvexCost:
    """Base class: ``phi(x)`` on an integer interval ``[lo, hi]``, ``inf`` elsewhere."""

    lo: Bound
    hi: Bound

    def __call__(self, x: int) -> Value:
        if not self.contains(x):
            return INF
        return self._value(int(x))

    def _value(self, x: int) -> Fraction:
        raise NotImplementedError

    def contains(self, x: int) -> bool:
        return self.lo <= x <= self.hi

    def _check_domain(self):
        lo = parse_bound(self.lo, lower=True)
        hi = parse_bound(self.hi, lower=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo > hi or lo == INF or hi == -INF:
            raise ValidationError(f"empty effective domain [{lo}, {hi}]")

    @property
    def denominator(self) -> int:
        """Common denominator of every value at an integer point."""
        return 1

    def is_convex(self) -> bool:
        return True

    def to_dict(self) -> dict:
        raise NotImplementedError


def _bound_to_json(b: Bound):
    if b == INF:
        return "+inf"
    if b == -INF:
        return "-inf"
    return int(b)


def _rational_to_json(q: Fraction):
    return int(q) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Affine(UnivariateConvexCost):
    slope: Fraction
    lo: Bound = -INF
    hi: Bound = INF

    def __post_init__(self):
        object.__setattr__(self, "slope", as_rational(self.slope))
        self._check_domain()

    def _value(self, x):
        return self.slope * x

    @property
    def denominator(self):
        return self.slope.denominator

    def to_dict(self):
        return {"type": "affine", "slope": _rational_to_json(self.slope),
                "lo": _bound_to_json(self.lo), "hi": _bound_to_json(self.hi)}


@dataclass(frozen=True)
class AbsoluteValue(UnivariateConvexCost):
    """``coeff * |x|``."""

    coeff: Fraction
    lo: Bound = -INF
    hi: Bound = INF

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_rational(self.coeff))
        if self.coeff < 0:
            raise ValidationError("absolute-value coefficient must be nonnegative")
        self._check_domain()

    def _value(self, x):
        return self.coeff * abs(x)

    @property
    def denominator(self):
        return self.coeff.denominator

    def to_dict(self):
        return {"type": "absolute", "coeff": _rational_to_json(self.coeff),
                "lo": _bound_to_json(self.lo), "hi": _bound_to_json(self.hi)}


@dataclass(frozen=True)
class Deviation(UnivariateConvexCost):
    """``coeff * |x - target|``."""

    coeff: Fraction
    target: int
    lo: Bound = -INF
    hi: Bound = INF

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_rational(self.coeff))
        target = as_rational(self.target)
        if target.denominator != 1:
            raise ValidationError("deviation target must be an integer")
        object.__setattr__(self, "target", int(target))
        if self.coeff < 0:
            raise ValidationError("deviation coefficient must be nonnegative")
        self._check_domain()

    def _value(self, x):
        return self.coeff * abs(x - self.target)

    @property
    def denominator(self):
        return self.coeff.denominator

    def to_dict(self):
        return {"type": "deviation", "coeff": _rational_to_json(self.coeff), "target": self.target,
                "lo": _bound_to_json(self.lo), "hi": _bound_to_json(self.hi)}


@dataclass(frozen=True)
class IndicatorInterval(UnivariateConvexCost):
    """0 on ``[lo, hi]``; a pure capacity constraint."""

    lo: Bound = -INF
    hi: Bound = INF

    def __post_init__(self):
        self._check_domain()

    def _value(self, x):
        return Fraction(0)

    def to_dict(self):
        return {"type": "indicator", "lo": _bound_to_json(self.lo), "hi": _bound_to_json(self.hi)}


@dataclass(frozen=True)
class PiecewiseLinearConvex(UnivariateConvexCost):
    """Piecewise linear function with kinks at integer ``breakpoints``.

    ``slopes[0]`` applies left of the first breakpoint, ``slopes[i]`` between
    breakpoints ``i-1`` and ``i``, ``slopes[-1]`` right of the last one.
    ``anchor_value`` is the value at ``breakpoints[0]``. Slopes are not forced
    to be nondecreasing here; ``is_convex`` reports whether they are.
    """

    breakpoints: tuple[int, ...]
    slopes: tuple[Fraction, ...]
    anchor_value: Fraction = Fraction(0)
    lo: Bound = -INF
    hi: Bound = INF

    def __post_init__(self):
        bps = tuple(int(as_rational(b)) for b in self.breakpoints)
        slopes = tuple(as_rational(s) for s in self.slopes)
        if not bps:
            raise ValidationError("piecewise-linear cost needs at least one breakpoint")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ValidationError("breakpoints must be strictly increasing")
        if len(slopes) != len(bps) + 1:
            raise ValidationError("need exactly one more slope than breakpoints")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "slopes", slopes)
        object.__setattr__(self, "anchor_value", as_rational(self.anchor_value))
        self._check_domain()

    def _value(self, x):
        bps, slopes = self.breakpoints, self.slopes
        value = self.anchor_value
        if x <= bps[0]:
            return value - slopes[0] * (bps[0] - x)
        for i in range(len(bps)):
            right = bps[i + 1] if i + 1 < len(bps) else None
            if right is None or x <= right:
                return value + slopes[i + 1] * (x - bps[i])
            value += slopes[i + 1] * (right - bps[i])
        raise AssertionError("unreachable")

    @property
    def denominator(self):
        return _lcm([self.anchor_value.denominator] + [s.denominator for s in self.slopes])

    def is_convex(self):
        return all(s2 >= s1 for s1, s2 in zip(self.slopes, self.slopes[1:]))

    def to_dict(self):
        return {"type": "pwl", "breakpoints": list(self.breakpoints),
                "slopes": [_rational_to_json(s) for s in self.slopes],
                "anchor_value": _rational_to_json(self.anchor_value),
                "lo": _bound_to_json(self.lo), "hi": _bound_to_json(self.hi)}


def cost_from_dict(d: dict) -> UnivariateConvexCost:
    """Inverse of ``to_dict``; also used by the problem-file reader."""
    kind = str(d.get("type", "")).lower()
    lo = parse_bound(d.get("lo"), lower=True)
    hi = parse_bound(d.get("hi"), lower=False)
    if kind in ("absolute", "abs", "absolute_value"):
        return AbsoluteValue(d.get("coeff", d.get("beta", 1)), lo, hi)
    if kind == "deviation":
        if "target" not in d:
            raise ValidationError("deviation cost needs a target")
        return Deviation(d.get("coeff", 1), d["target"], lo, hi)
    if kind == "affine":
        return Affine(d.get("slope", 0), lo, hi)
    if kind == "indicator":
        return IndicatorInterval(lo, hi)
    if kind in ("pwl", "piecewise_linear"):
        return PiecewiseLinearConvex(tuple(d["breakpoints"]), tuple(d["slopes"]),
                                     d.get("anchor_value", 0), lo, hi)
    raise ValidationError(f"unknown cost type {d.get('type')!r}")


def eval_univariate(phi: UnivariateConvexCost, x: int) -> Value:
    return phi(x)


def check_midpoint_convexity(phi: UnivariateConvexCost, lo: int, hi: int) -> int | None:
    """First ``x`` in ``[lo, hi]`` where ``phi(x-1) + phi(x+1) < 2 phi(x)``, else None.

    Only points whose neighbours both lie in the effective domain are checked.
    """
    if lo > hi:
        raise ValueError("lo must not exceed hi")
    for x in range(lo, hi + 1):
        if not (phi.contains(x - 1) and phi.contains(x + 1)):
            continue
        if phi(x - 1) + phi(x + 1) < 2 * phi(x):
            return x
    return None


# --- laminar families -------------------------------------------------------

NodeSet = frozenset  # of STNode


def all_times(N: int, node: int) -> frozenset:
    """``T x {node}``."""
    return frozenset(STNode(t, node) for t in range(N))


def all_times_group(N: int, nodes: Iterable[int]) -> frozenset:
    """``T x nodes``."""
    nodes = list(nodes)
    return frozenset(STNode(t, v) for t in range(N) for v in nodes)


@dataclass(frozen=True)
class LaminarCostSpec:
    """Node-group costs over the ST nodes of ``net`` expanded to ``N`` unit times."""

    net: Network
    N: int
    members: tuple[tuple[frozenset, UnivariateConvexCost], ...] = ()

    def __post_init__(self):
        members = tuple((frozenset(STNode(*p) for p in s), c) for s, c in self.members)
        object.__setattr__(self, "members", members)

    @property
    def sets(self) -> list[frozenset]:
        return [s for s, _ in self.members]

    @property
    def costs(self) -> list[UnivariateConvexCost]:
        return [c for _, c in self.members]

    def is_router_group(self, i: int) -> bool:
        s = self.members[i][0]
        return any(self.net.kinds[p.node] is NodeKind.ROUTER for p in s)


def validate_laminar(spec: LaminarCostSpec) -> None:
    """Raise ``NotLaminar``/``MixedGroup`` if the family is malformed."""
    net, N = spec.net, spec.N
    sets = spec.sets
    for i, s in enumerate(sets):
        if not s:
            raise ValidationError(f"member {i} is empty")
        for p in s:
            if not (0 <= p.time < N and 0 <= p.node < net.n_nodes):
                raise ValidationError(f"member {i} contains {tuple(p)} outside the ground set")
        nodes = {p.node for p in s}
        routers = [v for v in nodes if net.kinds[v] is NodeKind.ROUTER]
        if routers and len(nodes) > 1:
            raise MixedGroup(i)
        if not spec.members[i][1].is_convex():
            raise ValidationError(f"cost of member {i} is not convex")
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            x, y = sets[i], sets[j]
            if x.isdisjoint(y) or x <= y or y <= x:
                continue
            raise NotLaminar(i, j)


def _as_table(spec: LaminarCostSpec, delta) -> np.ndarray:
    arr = np.asarray(delta, dtype=object)
    if arr.shape != (spec.N, spec.net.n_nodes):
        raise DimensionMismatch(f"boundary table must have shape {(spec.N, spec.net.n_nodes)}, got {arr.shape}")
    return arr


def set_sum(table: np.ndarray, s: Iterable[STNode]) -> int:
    return sum(int(table[p.time, p.node]) for p in s)


def eval_node_cost(spec: LaminarCostSpec, delta, r: int = 0) -> Value:
    """``sum_X f_X(delta(X))`` if ``sum(delta) == r``, else ``inf``."""
    table = _as_table(spec, delta)
    if sum(int(x) for x in table.flat) != r:
        return INF
    total: Value = Fraction(0)
    for s, phi in spec.members:
        total += phi(set_sum(table, s))
    return total


@dataclass(frozen=True)
class CostTree:
    """Directed tree representation of a laminar family.

    Tree node 0 is the root; member ``i`` is tree node ``i + 1`` and its
    arc runs from ``parent[i + 1]`` to ``i + 1`` carrying that member's cost.
    ``attach`` maps every ST node to the innermost tree node containing it
    (the root for uncovered nodes); these are the implicit singleton leaves.
    """

    spec: LaminarCostSpec
    parent: tuple[int, ...]
    attach: dict = field(repr=False)

    @property
    def n_tree_nodes(self) -> int:
        return len(self.parent)

    def arc_cost(self, tree_node: int) -> UnivariateConvexCost:
        return self.spec.members[tree_node - 1][1]

    def children(self, tree_node: int) -> list[int]:
        return [k for k in range(1, len(self.parent)) if self.parent[k] == tree_node]

    def leaves_under(self, tree_node: int) -> list[STNode]:
        return sorted(p for p, k in self.attach.items() if k == tree_node)

    def arc_flows(self, delta) -> list[int]:
        """Flow forced on each tree arc when every ST node ``p`` draws ``delta[p]``.

        Entry ``k`` is the flow into tree node ``k`` (entry 0 is unused and
        holds the total drawn, which must equal ``r`` at the root).
        """
        table = _as_table(self.spec, delta)
        flows = [0] * len(self.parent)
        for p, k in self.attach.items():
            flows[k] += int(table[p.time, p.node])
        # members are numbered so that a child may precede its parent; process deepest first
        for k in sorted(range(1, len(self.parent)), key=self._depth, reverse=True):
            flows[self.parent[k]] += flows[k]
        return flows

    def _depth(self, k: int) -> int:
        d = 0
        while k != 0:
            k = self.parent[k]
            d += 1
        return d

    def evaluate(self, delta, r: int = 0) -> Value:
        """Tree-flow cost of routing the boundary ``delta`` out of the root."""
        flows = self.arc_flows(delta)
        if flows[0] != r:
            return INF
        total: Value = Fraction(0)
        for k in range(1, len(self.parent)):
            total += self.arc_cost(k)(flows[k])
        return total


def laminar_to_tree(spec: LaminarCostSpec) -> CostTree:
    validate_laminar(spec)
    sets = spec.sets
    m = len(sets)
    # larger sets first; among equal sets the earlier-listed one is the outer one
    order = sorted(range(m), key=lambda i: (-len(sets[i]), i))
    parent = [0] * (m + 1)
    for pos, i in enumerate(order):
        for j in reversed(order[:pos]):
            if sets[i] <= sets[j]:
                parent[i + 1] = j + 1
                break
    attach = {}
    for t in range(spec.N):
        for v in range(spec.net.n_nodes):
            p = STNode(t, v)
            k = 0
            for i in reversed(order):
                if p in sets[i]:
                    k = i + 1
                    break
            attach[p] = k
    return CostTree(spec, tuple(parent), attach)
