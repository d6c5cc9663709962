import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from powerpacket.errors import EnergyNotRepresentable, ValidationError
from powerpacket.network import boundary
from powerpacket.scenarios import build_problem_e1
from powerpacket.solver import solve
from powerpacket.spm import (
    EMPTY,
    Backward,
    Forward,
    SymbolPropagationMatrix,
    SymbolSet,
    from_flow,
    parse_render,
    render,
    to_flow,
)


@pytest.fixture
def unit_cell():
    return SymbolSet((("σ",),), {"σ": 1})


def test_example_flow_to_spm(fig2_flow, unit_cell):
    spm = from_flow(fig2_flow, unit_cell)
    assert spm[0, 0] == Forward("σ")
    assert spm[0, 1] == EMPTY
    assert spm[1, 0] == EMPTY
    assert spm[1, 1] == Forward("σ")


def test_zero_flow_gives_empty_spm():
    spm = from_flow(np.zeros((2, 3), dtype=int))
    assert all(e.is_empty for row in spm.entries for e in row)


def test_negative_flow_is_backward_symbol():
    symbols = SymbolSet.successive(3)
    spm = from_flow([[-2, 0]], symbols)
    assert spm[0, 0] == Backward("σ2")
    assert symbols.energy("σ2") == 2


def test_missing_energy_is_reported():
    with pytest.raises(EnergyNotRepresentable) as info:
        from_flow([[0, 3]], SymbolSet.successive(2))
    assert (info.value.t, info.value.arc, info.value.value) == (0, 1, 3)


def test_default_cell_extends_to_largest_value():
    spm = from_flow([[4, -1]])
    assert spm.symbols.is_successive()
    assert len(spm.symbols.cells[0]) == 4


def test_example_spm_to_flow(unit_cell, path3):
    spm = SymbolPropagationMatrix(((Forward("σ"), EMPTY), (EMPTY, Forward("σ"))), unit_cell)
    u = to_flow(spm)
    assert u.tolist() == [[1, 0], [0, 1]]
    assert -boundary(path3, u)[0, 1] == 1


def test_empty_spm_to_zero_flow(unit_cell):
    spm = SymbolPropagationMatrix(((EMPTY, EMPTY),), unit_cell)
    assert to_flow(spm).tolist() == [[0, 0]]


def test_symbols_must_belong_to_cell():
    symbols = SymbolSet((("a",), ("b",)), {"a": 1, "b": 2})
    with pytest.raises(ValidationError):
        SymbolPropagationMatrix(((Forward("b"),),), symbols, cell=0)


def test_symbol_set_validation():
    with pytest.raises(ValidationError):
        SymbolSet((("a",), ("a",)), {"a": 1})
    with pytest.raises(ValidationError):
        SymbolSet((("a",),), {"a": 0})
    with pytest.raises(ValidationError):
        SymbolSet(((),), {})


def test_decimal_energies_are_stored_but_not_flows():
    symbols = SymbolSet((("x",), ("y",)), {"x": "0.5", "y": 2})
    assert not symbols.is_successive(0)
    spm = SymbolPropagationMatrix(((Forward("x"),),), symbols)
    assert spm.to_json()["entries"][0][0] == {"dir": "f", "energy": "1/2"}
    with pytest.raises(ValidationError):
        to_flow(spm)


def test_render_example(fig2_flow, unit_cell):
    text = render(from_flow(fig2_flow, unit_cell))
    assert text.splitlines() == [
        "arc | t0    | t1",
        "----+-------+------",
        "a0  | (σ,f) | σ∅",
        "a1  | σ∅    | (σ,f)",
    ]


def test_render_of_empty_spm_only_has_empty_entries():
    text = render(from_flow(np.zeros((2, 2), dtype=int)))
    body = [c.strip() for ln in text.splitlines()[2:] for c in ln.split("|")[1:]]
    assert set(body) == {"σ∅"}


def test_json_format_and_round_trip():
    spm = from_flow([[1, -2, 0]])
    doc = spm.to_json()
    assert doc["entries"] == [[{"dir": "f", "energy": 1}, {"dir": "b", "energy": 2}, {"dir": "none", "energy": 0}]]
    again = SymbolPropagationMatrix.from_json(json.loads(spm.dumps()))
    assert to_flow(again) == to_flow(spm)


def test_solution_spm_keeps_router_storage_constant(mesh):
    p = build_problem_e1(mesh, 2, (2, 1, -1, -2))
    sol = solve(p)
    u = to_flow(from_flow(sol.u))
    stored = -boundary(mesh, u)
    for r in mesh.routers:
        assert not stored[:, r].any()


small_flows = arrays(np.int64, st.tuples(st.integers(1, 4), st.integers(1, 6)), elements=st.integers(-5, 5))


@settings(max_examples=100, deadline=None)
@given(small_flows)
def test_round_trip_flow_spm_flow(u):
    symbols = SymbolSet.successive(5)
    assert to_flow(from_flow(u, symbols)).tolist() == u.tolist()


@settings(max_examples=100, deadline=None)
@given(small_flows)
def test_round_trip_spm_flow_spm(u):
    spm = from_flow(u, SymbolSet.successive(5))
    assert from_flow(to_flow(spm), spm.symbols) == spm


@settings(max_examples=50, deadline=None)
@given(small_flows)
def test_render_parses_back(u):
    spm = from_flow(u, SymbolSet.successive(5))
    assert parse_render(render(spm)) == [list(row) for row in spm.entries]
