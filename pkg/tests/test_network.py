import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from powerpacket.errors import DimensionMismatch, EmptyGraph, SelfLoop
from powerpacket.network import (
    Network,
    NodeKind,
    SpatioTemporalFlow,
    STNode,
    TimeHorizon,
    boundary,
    expand,
    strain,
    validate_network,
)

R = NodeKind.ROUTER


def test_path_graph_is_valid(path3):
    validate_network(path3)
    assert path3.out_arcs == ((0,), (1,), ())
    assert path3.in_arcs == ((), (0,), (1,))


def test_self_loop_rejected():
    with pytest.raises(SelfLoop) as info:
        validate_network(Network((R, R), ((0, 1), (0, 0))))
    assert info.value.arc == 1


def test_empty_and_routerless_graphs_rejected():
    with pytest.raises(EmptyGraph):
        validate_network(Network((), ()))
    with pytest.raises(EmptyGraph):
        validate_network(Network((NodeKind.SOURCE, NodeKind.DESTINATION), ((0, 1),)))


def test_mesh_is_valid(mesh):
    validate_network(mesh)


def test_parallel_arcs_allowed():
    net = Network((R, R), ((0, 1), (0, 1)))
    validate_network(net)
    assert net.out_arcs[0] == (0, 1)


def test_adjacency_reconstructs_arc_list(mesh):
    rebuilt = {}
    for v in range(mesh.n_nodes):
        for a in mesh.out_arcs[v]:
            rebuilt.setdefault(a, [None, None])[0] = v
        for a in mesh.in_arcs[v]:
            rebuilt.setdefault(a, [None, None])[1] = v
    assert [tuple(rebuilt[a]) for a in range(mesh.n_arcs)] == list(mesh.arcs)


def test_horizon_must_be_positive():
    with pytest.raises(ValueError):
        TimeHorizon(0)
    assert list(TimeHorizon(3)) == [0, 1, 2]


@pytest.mark.parametrize("N, nodes, arcs", [(2, 6, 4), (1, 3, 2)])
def test_expand_path_graph(path3, N, nodes, arcs):
    g = expand(path3, N)
    assert (g.n_nodes, g.n_arcs) == (nodes, arcs)


def test_expand_mesh_counts(mesh):
    g = expand(mesh, 3)
    assert (g.n_nodes, g.n_arcs) == (39, 48)


def test_expand_single_slice_is_copy(mesh):
    g = expand(mesh, 1)
    assert g.arc_list() == list(mesh.arcs)


def test_expanded_incidence_preserves_time(mesh):
    g = expand(mesh, 4)
    for i, (tail, head) in enumerate(g.arc_list()):
        t, a = g.arc_at(i)
        assert g.node_at(tail) == STNode(t, mesh.tail(a))
        assert g.node_at(head) == STNode(t, mesh.head(a))


def test_collapsing_time_recovers_arcs(mesh):
    N = 3
    g = expand(mesh, N)
    collapsed = sorted((g.node_at(h).node, g.node_at(k).node) for h, k in g.arc_list())
    assert collapsed == sorted(list(mesh.arcs) * N)


def test_boundary_of_two_step_example(path3, fig2_flow):
    d = boundary(path3, fig2_flow)
    assert -d[0, 1] == 1
    assert d.tolist() == [[1, -1, 0], [0, 1, -1]]


def test_boundary_single_arc():
    net = Network((R, R), ((0, 1),))
    d = boundary(net, [[2]])
    assert d.tolist() == [[2, -2]]


def test_zero_flow_has_zero_boundary_and_strain(mesh):
    u = SpatioTemporalFlow.zeros(mesh, 3)
    assert not boundary(mesh, u).any()
    assert not strain(mesh, u).any()


def test_strain_of_example(path3, fig2_flow):
    assert strain(path3, fig2_flow)[0, 1] == 1


def test_boundary_dimension_mismatch(path3):
    with pytest.raises(DimensionMismatch):
        boundary(path3, [[1, 0, 0]])


def test_flow_rejects_fractional_values():
    with pytest.raises(ValueError):
        SpatioTemporalFlow([[0.5, 0]])


def test_flow_overflow_is_reported(path3):
    with pytest.raises(OverflowError):
        SpatioTemporalFlow(np.array([[2**63 - 1, 0]], dtype=object))
    with pytest.raises(OverflowError):
        boundary(path3, np.array([[2**61, 2**61]], dtype=np.int64))


flows = arrays(np.int64, (3, 16), elements=st.integers(-50, 50))


@settings(max_examples=60, deadline=None)
@given(flows)
def test_boundary_telescopes(mesh, u):
    assert boundary(mesh, u).sum() == 0


@settings(max_examples=60, deadline=None)
@given(flows, flows)
def test_boundary_is_linear(mesh, u, w):
    assert np.array_equal(boundary(mesh, u + w), boundary(mesh, u) + boundary(mesh, w))


@settings(max_examples=30, deadline=None)
@given(flows)
def test_strain_is_negated_boundary(mesh, u):
    assert np.array_equal(strain(mesh, u), -boundary(mesh, u))
