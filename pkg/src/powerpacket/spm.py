"""Symbols, cells and symbol propagation matrices (SPMs).

An SPM records, for every (unit time, link), either one symbol moving
forward (tail to head), one moving backward, or nothing. Reading symbols
as their energies with a sign for direction turns an SPM into a flow and
back.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .costs import as_rational
from .errors import DimensionMismatch, EnergyNotRepresentable, ValidationError
from .network import Network, SpatioTemporalFlow

EMPTY_SYMBOL = "σ∅"


@dataclass(frozen=True)
class SymbolSet:
    """Partition of all symbols into cells, plus each symbol's energy."""

    cells: tuple[tuple[str, ...], ...]
    energies: Mapping[str, Fraction]

    def __post_init__(self):
        cells = tuple(tuple(str(s) for s in cell) for cell in self.cells)
        energies = {str(k): as_rational(v) for k, v in dict(self.energies).items()}
        seen = set()
        for m, cell in enumerate(cells):
            if not cell:
                raise ValidationError(f"cell {m} is empty")
            for s in cell:
                if s in seen:
                    raise ValidationError(f"symbol {s!r} appears in more than one cell")
                if s == EMPTY_SYMBOL:
                    raise ValidationError(f"{EMPTY_SYMBOL} is reserved for 'no symbol'")
                seen.add(s)
                if energies.get(s, 0) <= 0:
                    raise ValidationError(f"symbol {s!r} needs a positive energy")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "energies", energies)

    @classmethod
    def successive(cls, K: int, prefix: str = "σ") -> "SymbolSet":
        """One cell of ``K`` symbols with energies ``1, 2, ..., K``."""
        if K < 1:
            raise ValidationError("a cell needs at least one symbol")
        names = tuple(f"{prefix}{k}" for k in range(1, K + 1))
        return cls((names,), {n: k for k, n in enumerate(names, start=1)})

    def energy(self, symbol: str) -> Fraction:
        return self.energies[symbol]

    def is_successive(self, cell: int = 0) -> bool:
        values = sorted(self.energies[s] for s in self.cells[cell])
        return values == list(range(1, len(values) + 1))

    def symbol_with_energy(self, cell: int, energy: int) -> str | None:
        for s in self.cells[cell]:
            if self.energies[s] == energy:
                return s
        return None


@dataclass(frozen=True)
class SpmEntry:
    direction: str | None = None  # "f", "b" or None for the empty element
    symbol: str | None = None

    def __post_init__(self):
        if (self.direction is None) != (self.symbol is None) or self.direction not in (None, "f", "b"):
            raise ValidationError(f"malformed SPM entry ({self.symbol!r}, {self.direction!r})")

    @property
    def is_empty(self) -> bool:
        return self.direction is None

    def __str__(self):
        return EMPTY_SYMBOL if self.is_empty else f"({self.symbol},{self.direction})"


EMPTY = SpmEntry()


def Forward(symbol: str) -> SpmEntry:
    return SpmEntry("f", symbol)


def Backward(symbol: str) -> SpmEntry:
    return SpmEntry("b", symbol)


@dataclass(frozen=True)
class SymbolPropagationMatrix:
    """``N x |A|`` table of entries for one cell; ``entries[t][a]``."""

    entries: tuple[tuple[SpmEntry, ...], ...]
    symbols: SymbolSet
    cell: int = 0

    def __post_init__(self):
        entries = tuple(tuple(row) for row in self.entries)
        widths = {len(row) for row in entries}
        if len(widths) > 1:
            raise DimensionMismatch("SPM rows have different lengths")
        allowed = set(self.symbols.cells[self.cell])
        for row in entries:
            for e in row:
                if not e.is_empty and e.symbol not in allowed:
                    raise ValidationError(f"symbol {e.symbol!r} is not in cell {self.cell}")
        object.__setattr__(self, "entries", entries)

    @property
    def N(self) -> int:
        return len(self.entries)

    @property
    def n_arcs(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, key):
        t, a = key
        return self.entries[t][a]

    def to_json(self) -> dict:
        rows = []
        for row in self.entries:
            out = []
            for e in row:
                if e.is_empty:
                    out.append({"dir": "none", "energy": 0})
                else:
                    energy = self.symbols.energy(e.symbol)
                    out.append({"dir": e.direction, "energy": int(energy) if energy.denominator == 1 else str(energy)})
            rows.append(out)
        return {"cell": self.cell, "N": self.N, "n_arcs": self.n_arcs, "entries": rows}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, doc: dict, symbols: SymbolSet | None = None) -> "SymbolPropagationMatrix":
        """Rebuild from ``to_json`` output; symbols default to energies 1..K."""
        rows = doc["entries"]
        cell = int(doc.get("cell", 0))
        if symbols is None:
            top = max((int(as_rational(e["energy"])) for row in rows for e in row if e["dir"] != "none"), default=1)
            symbols = SymbolSet.successive(max(top, 1))
        entries = []
        for t, row in enumerate(rows):
            out = []
            for a, e in enumerate(row):
                if e["dir"] == "none":
                    out.append(EMPTY)
                    continue
                energy = as_rational(e["energy"])
                name = symbols.symbol_with_energy(cell, energy)
                if name is None or e["dir"] not in ("f", "b"):
                    raise EnergyNotRepresentable(t, a, int(energy) if energy.denominator == 1 else 0)
                out.append(SpmEntry(e["dir"], name))
            entries.append(out)
        return cls(tuple(map(tuple, entries)), symbols, cell)


def from_flow(u, symbols: SymbolSet | None = None, cell: int = 0) -> SymbolPropagationMatrix:
    """SPM whose entry at ``(t, a)`` is the single symbol of energy ``|u(t, a)|``.

    Without ``symbols`` a cell with energies ``1..max|u|`` is created.
    """
    flow = u if isinstance(u, SpatioTemporalFlow) else SpatioTemporalFlow(u)
    values = flow.values
    if symbols is None:
        top = int(np.abs(values).max()) if values.size else 0
        symbols = SymbolSet.successive(max(top, 1))
    lookup = {symbols.energies[s]: s for s in symbols.cells[cell]}
    rows = []
    for t in range(values.shape[0]):
        row = []
        for a in range(values.shape[1]):
            x = int(values[t, a])
            if x == 0:
                row.append(EMPTY)
                continue
            name = lookup.get(abs(x))
            if name is None:
                raise EnergyNotRepresentable(t, a, x)
            row.append(SpmEntry("f" if x > 0 else "b", name))
        rows.append(tuple(row))
    return SymbolPropagationMatrix(tuple(rows), symbols, cell)


def to_flow(spm: SymbolPropagationMatrix, symbols: SymbolSet | None = None) -> SpatioTemporalFlow:
    symbols = symbols or spm.symbols
    out = np.zeros((spm.N, spm.n_arcs), dtype=np.int64)
    for t, row in enumerate(spm.entries):
        for a, e in enumerate(row):
            if e.is_empty:
                continue
            energy = symbols.energy(e.symbol)
            if energy.denominator != 1:
                raise ValidationError(f"symbol {e.symbol!r} has non-integer energy {energy}; no integer flow")
            out[t, a] = int(energy) if e.direction == "f" else -int(energy)
    return SpatioTemporalFlow(out)


def render(spm: SymbolPropagationMatrix, net: Network | None = None) -> str:
    """Plain-text grid: one row per arc, one column per unit time."""
    header = ["arc"] + [f"t{t}" for t in range(spm.N)]
    rows = [header]
    for a in range(spm.n_arcs):
        label = f"a{a}"
        if net is not None:
            tail, head = net.arcs[a]
            label = f"a{a} {net.node_name(tail)}->{net.node_name(head)}"
        rows.append([label] + [str(spm.entries[t][a]) for t in range(spm.N)])
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = [" | ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


_ENTRY = re.compile(r"^\((?P<sym>.+),(?P<dir>[fb])\)$")


def parse_render(text: str) -> list[list[SpmEntry]]:
    """Read back the entries of ``render`` output as ``entries[t][a]``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValidationError("not an SPM rendering")
    n_times = len(lines[0].split(" | ")) - 1
    columns: list[list[SpmEntry]] = [[] for _ in range(n_times)]
    for ln in lines[2:]:
        cells = [c.strip() for c in ln.split(" | ")]
        for t, cell in enumerate(cells[1:]):
            if cell == EMPTY_SYMBOL:
                columns[t].append(EMPTY)
                continue
            m = _ENTRY.match(cell)
            if m is None:
                raise ValidationError(f"unreadable SPM entry {cell!r}")
            columns[t].append(SpmEntry(m["dir"], m["sym"]))
    return columns
