"""Static network, time horizon, time-expanded graph and integer flows.

A flow assigns an integer energy to every (unit time, arc) pair. Its
boundary at a spatio-temporal node is outflow minus inflow during that
unit time; the negated boundary is the energy a node stores.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyGraph, SelfLoop, ValidationError

_INT64_LIMIT = 2**62


class NodeKind(enum.Enum):
    ROUTER = "router"
    SOURCE = "source"
    DESTINATION = "destination"

    @classmethod
    def parse(cls, value: "str | NodeKind") -> "NodeKind":
        if isinstance(value, NodeKind):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown node kind {value!r}") from None


class STNode(NamedTuple):
    time: int
    node: int


class STArc(NamedTuple):
    time: int
    arc: int


@dataclass(frozen=True)
class Network:
    """Directed multigraph whose nodes are routers, sources or destinations.

    Arcs are ``(tail, head)`` pairs; a positive flow on an arc moves energy
    from tail to head. Parallel arcs are allowed.
    """

    kinds: tuple[NodeKind, ...]
    arcs: tuple[tuple[int, int], ...]
    names: tuple[str, ...] | None = None
    out_arcs: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    in_arcs: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kinds = tuple(NodeKind.parse(k) for k in self.kinds)
        arcs = tuple((int(t), int(h)) for t, h in self.arcs)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "arcs", arcs)
        if self.names is not None:
            names = tuple(str(n) for n in self.names)
            if len(names) != len(kinds):
                raise DimensionMismatch("one name per node is required")
            object.__setattr__(self, "names", names)
        n = len(kinds)
        out: list[list[int]] = [[] for _ in range(n)]
        inc: list[list[int]] = [[] for _ in range(n)]
        for a, (tail, head) in enumerate(arcs):
            if not (0 <= tail < n and 0 <= head < n):
                raise ValidationError(f"arc {a} references a node outside 0..{n - 1}")
            out[tail].append(a)
            inc[head].append(a)
        object.__setattr__(self, "out_arcs", tuple(map(tuple, out)))
        object.__setattr__(self, "in_arcs", tuple(map(tuple, inc)))

    @property
    def n_nodes(self) -> int:
        return len(self.kinds)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    def tail(self, a: int) -> int:
        return self.arcs[a][0]

    def head(self, a: int) -> int:
        return self.arcs[a][1]

    def nodes_of_kind(self, kind: NodeKind) -> list[int]:
        return [v for v, k in enumerate(self.kinds) if k is kind]

    @property
    def routers(self) -> list[int]:
        return self.nodes_of_kind(NodeKind.ROUTER)

    @property
    def sources(self) -> list[int]:
        return self.nodes_of_kind(NodeKind.SOURCE)

    @property
    def destinations(self) -> list[int]:
        return self.nodes_of_kind(NodeKind.DESTINATION)

    def node_name(self, v: int) -> str:
        return self.names[v] if self.names is not None else f"v{v}"

    def incidence(self) -> np.ndarray:
        """``|A| x |V|`` matrix with +1 at the tail and -1 at the head of each arc."""
        m = np.zeros((self.n_arcs, self.n_nodes), dtype=np.int64)
        for a, (tail, head) in enumerate(self.arcs):
            m[a, tail] += 1
            m[a, head] -= 1
        return m


def validate_network(net: Network) -> None:
    """Raise if ``net`` has self-loops or no router."""
    if net.n_nodes == 0:
        raise EmptyGraph("network has no nodes")
    for a, (tail, head) in enumerate(net.arcs):
        if tail == head:
            raise SelfLoop(a)
    if not net.routers:
        raise EmptyGraph("network has no router")


@dataclass(frozen=True)
class TimeHorizon:
    """``N`` synchronized unit times indexed ``0..N-1``."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"horizon must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))

    def __iter__(self):
        return iter(range(self.N))

    def __len__(self):
        return self.N


def _horizon_length(horizon: "TimeHorizon | int") -> int:
    return horizon.N if isinstance(horizon, TimeHorizon) else TimeHorizon(horizon).N


@dataclass(frozen=True)
class ExpandedGraph:
    """Time-expanded copy of a network: ``N`` slices and no arcs between slices.

    ST node ``(t, v)`` has index ``t * |V| + v``; ST arc ``(t, a)`` has index
    ``t * |A| + a``.
    """

    net: Network
    N: int

    @property
    def n_nodes(self) -> int:
        return self.N * self.net.n_nodes

    @property
    def n_arcs(self) -> int:
        return self.N * self.net.n_arcs

    def node_index(self, t: int, v: int) -> int:
        return t * self.net.n_nodes + v

    def arc_index(self, t: int, a: int) -> int:
        return t * self.net.n_arcs + a

    def node_at(self, i: int) -> STNode:
        return STNode(*divmod(i, self.net.n_nodes))

    def arc_at(self, i: int) -> STArc:
        return STArc(*divmod(i, self.net.n_arcs))

    def nodes(self) -> list[STNode]:
        return [STNode(t, v) for t in range(self.N) for v in range(self.net.n_nodes)]

    def arcs(self) -> list[STArc]:
        return [STArc(t, a) for t in range(self.N) for a in range(self.net.n_arcs)]

    def endpoints(self, t: int, a: int) -> tuple[STNode, STNode]:
        tail, head = self.net.arcs[a]
        return STNode(t, tail), STNode(t, head)

    def arc_list(self) -> list[tuple[int, int]]:
        """ST arcs as ``(tail index, head index)`` pairs in ST-arc index order."""
        out = []
        for t in range(self.N):
            for tail, head in self.net.arcs:
                out.append((self.node_index(t, tail), self.node_index(t, head)))
        return out


def expand(net: Network, horizon: "TimeHorizon | int") -> ExpandedGraph:
    validate_network(net)
    return ExpandedGraph(net, _horizon_length(horizon))


class SpatioTemporalFlow:
    """Integer flow on ``T x A``, stored densely as an ``N x |A|`` int64 table."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values)
        if arr.ndim != 2:
            raise DimensionMismatch(f"flow table must be 2-D (N x |A|), got shape {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            items = arr.ravel().tolist()
            if not all(float(x).is_integer() for x in items):
                raise ValidationError("flow values must be integers")
            items = [int(x) for x in items]
            if max(abs(x) for x in items) >= _INT64_LIMIT:
                raise OverflowError("flow magnitude exceeds the 64-bit range")
            arr = np.array(items, dtype=np.int64).reshape(arr.shape)
        self.values = np.array(arr, dtype=np.int64)

    @classmethod
    def zeros(cls, net: Network, horizon: "TimeHorizon | int") -> "SpatioTemporalFlow":
        return cls(np.zeros((_horizon_length(horizon), net.n_arcs), dtype=np.int64))

    @classmethod
    def from_entries(cls, net: Network, horizon, entries: Iterable[tuple[int, int, int]]):
        """Build from ``(t, arc, value)`` triples; unspecified entries are 0."""
        flow = cls.zeros(net, horizon)
        for t, a, x in entries:
            flow.values[t, a] = x
        return flow

    @property
    def N(self) -> int:
        return self.values.shape[0]

    @property
    def n_arcs(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, key):
        return int(self.values[key]) if np.ndim(self.values[key]) == 0 else self.values[key]

    def __eq__(self, other):
        if isinstance(other, SpatioTemporalFlow):
            return self.values.shape == other.values.shape and bool(np.all(self.values == other.values))
        return NotImplemented

    def __repr__(self):
        return f"SpatioTemporalFlow({self.values.tolist()!r})"

    def tolist(self) -> list[list[int]]:
        return self.values.tolist()

    def check_dimensions(self, net: Network, horizon=None) -> None:
        if self.n_arcs != net.n_arcs:
            raise DimensionMismatch(f"flow has {self.n_arcs} arcs, network has {net.n_arcs}")
        if horizon is not None and self.N != _horizon_length(horizon):
            raise DimensionMismatch(f"flow has {self.N} unit times, horizon is {_horizon_length(horizon)}")


def _as_flow(u) -> SpatioTemporalFlow:
    return u if isinstance(u, SpatioTemporalFlow) else SpatioTemporalFlow(u)


def boundary(net: Network, u) -> np.ndarray:
    """Outflow minus inflow at every ST node, as an ``N x |V|`` int64 table."""
    flow = _as_flow(u)
    flow.check_dimensions(net)
    if flow.values.size:
        degree = max((len(o) + len(i) for o, i in zip(net.out_arcs, net.in_arcs)), default=0)
        if int(np.abs(flow.values).max()) * max(degree, 1) >= _INT64_LIMIT:
            raise OverflowError("boundary would overflow 64-bit integers")
    return flow.values @ net.incidence()


def strain(net: Network, u) -> np.ndarray:
    """Stored-energy increment per ST node: the negated boundary."""
    return -boundary(net, u)


def path_network(n_nodes: int = 3, kinds: Sequence[NodeKind] | None = None) -> Network:
    """``v0 -> v1 -> ... -> v{n-1}``; all routers unless ``kinds`` is given."""
    if kinds is None:
        kinds = [NodeKind.ROUTER] * n_nodes
    return Network(tuple(kinds), tuple((i, i + 1) for i in range(n_nodes - 1)))
