"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PowerPacketError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PowerPacketError, ValueError):
    """Malformed input: network, cost specification, or problem file."""


class SelfLoop(ValidationError):
    def __init__(self, arc: int):
        super().__init__(f"arc {arc} is a self-loop")
        self.arc = arc


class EmptyGraph(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotLaminar(ValidationError):
    def __init__(self, first: int, second: int):
        super().__init__(f"members {first} and {second} cross (neither disjoint nor nested)")
        self.first = first
        self.second = second


class MixedGroup(ValidationError):
    def __init__(self, member: int):
        super().__init__(
            f"member {member} mixes a router with other nodes; groups must lie in "
            "T x (sources and destinations) or in T x {single router}"
        )
        self.member = member


class UnbalancedE1(ValidationError):
    pass


class EnergyNotRepresentable(ValidationError):
    def __init__(self, t: int, arc: int, value: int):
        super().__init__(f"no symbol with energy {abs(value)} for flow {value} at (t={t}, arc={arc})")
        self.t = t
        self.arc = arc
        self.value = value


class SolverError(PowerPacketError):
    """The solver could not produce a certified optimum."""


class NoObviousFeasiblePoint(SolverError):
    pass


class UnboundedDomain(SolverError):
    pass


class IterationLimit(SolverError):
    pass


class NegativeCycleFound(SolverError):
    def __init__(self, cycle, cost):
        super().__init__(f"residual cycle of cost {cost} through {len(cycle)} arcs")
        self.cycle = cycle
        self.cost = cost


class TooLarge(PowerPacketError):
    """Instance exceeds the brute-force oracle's enumeration budget or shape."""
