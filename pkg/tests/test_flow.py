import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flow_oracles import brute_force_max_flow, exhaustive_min_cut
from spikeflow.errors import ParseError
from spikeflow.flow import (
    FlowAssignment,
    FlowNetwork,
    bfs_shortest_augmenting_path,
    edmonds_karp,
    format_dimacs,
    generate_random,
    max_feasible_edges,
    min_cut_capacity,
    parse_dimacs,
    validate_flow,
)


def trap_graph():
    # s->a, a->b, b->t, s->c, c->b, a->e, e->t, all capacity 1;
    # greedy forward-only augmentation through a->b->t blocks the optimum 2.
    # Nodes: s=0, a=1, b=2, c=3, e=4, t=5; edges in lexicographic order.
    return FlowNetwork(
        6,
        [(0, 1, 1), (0, 3, 1), (1, 2, 1), (1, 4, 1), (2, 5, 1), (3, 2, 1), (4, 5, 1)],
        source=0,
        sink=5,
    )


def diamond_graph():
    return FlowNetwork(4, [(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)], 0, 3)


def test_network_invariants_enforced():
    with pytest.raises(ValueError):
        FlowNetwork(3, [(1, 0, 1)], 0, 2)  # incoming edge at the source
    with pytest.raises(ValueError):
        FlowNetwork(3, [(2, 1, 1)], 0, 2)  # outgoing edge at the sink
    with pytest.raises(ValueError):
        FlowNetwork(3, [(1, 1, 1)], 0, 2)  # self loop
    with pytest.raises(ValueError):
        FlowNetwork(3, [(0, 1, -2)], 0, 2)  # negative capacity


def test_single_edge_max_flow():
    net = FlowNetwork(2, [(0, 1, 7)], 0, 1)
    result = edmonds_karp(net)
    assert result.value == 7
    assert validate_flow(net, result) == []


def test_diamond_max_flow():
    result = edmonds_karp(diamond_graph())
    assert result.value == 2


def test_trap_graph_optimum_is_two():
    net = trap_graph()
    assert brute_force_max_flow(net) == 2
    result = edmonds_karp(net)
    assert result.value == 2
    assert validate_flow(net, result) == []
    assert min_cut_capacity(net, result) == 2


def test_bfs_none_on_saturated_edge():
    net = FlowNetwork(2, [(0, 1, 3)], 0, 1)
    assert bfs_shortest_augmenting_path(net, {0: 3}) is None


def test_bfs_direct_path_on_empty_flow():
    net = FlowNetwork(2, [(0, 1, 3)], 0, 1)
    assert bfs_shortest_augmenting_path(net, {0: 0}) == [(0, True)]


def test_bfs_uses_reverse_arc_in_trap_graph():
    # after pushing s->a->b->t the only augmenting route cancels flow on a->b:
    # s->c->b, reverse(a->b), a->e->t -- five residual steps.
    net = trap_graph()
    flows = {e.id: 0 for e in net.edges}
    for eid in (0, 2, 4):  # s->a, a->b, b->t
        flows[eid] = 1
    path = bfs_shortest_augmenting_path(net, flows)
    assert path == [(1, True), (5, True), (2, False), (3, True), (6, True)]


def test_validate_flow_reports_violations():
    net = diamond_graph()
    ok = FlowAssignment.zero(net)
    assert validate_flow(net, ok) == []

    over = FlowAssignment({0: 2, 1: 0, 2: 0, 3: 0}, 2)
    messages = " ".join(validate_flow(net, over))
    assert "outside" in messages

    unbalanced = FlowAssignment({0: 1, 1: 0, 2: 0, 3: 0}, 1)
    messages = " ".join(validate_flow(net, unbalanced))
    assert "node 1" in messages


def test_generator_two_nodes_single_edge():
    net = generate_random(2, 1, c_max=1, seed=0)
    assert [(e.tail, e.head, e.cap) for e in net.edges] == [(0, 1, 1)]


def test_generator_complete_dag_when_no_deletions():
    net = generate_random(3, 3, c_max=5, seed=1)
    assert sorted((e.tail, e.head) for e in net.edges) == [(0, 1), (0, 2), (1, 2)]


def test_generator_properties_and_determinism():
    net = generate_random(5, 7, c_max=10, seed=42)
    again = generate_random(5, 7, c_max=10, seed=42)
    assert [(e.tail, e.head, e.cap) for e in net.edges] == [
        (e.tail, e.head, e.cap) for e in again.edges
    ]
    assert net.source == 0 and net.sink == 4
    assert net.n_edges == 7
    assert all(e.tail < e.head for e in net.edges)  # acyclic by construction
    assert all(1 <= e.cap <= 10 for e in net.edges)
    # one weak component
    from spikeflow.flow import _weakly_connected

    assert _weakly_connected(5, [(e.tail, e.head) for e in net.edges])


def test_generator_rejects_infeasible_edge_counts():
    with pytest.raises(ValueError):
        generate_random(5, 3, c_max=1, seed=0)
    with pytest.raises(ValueError):
        generate_random(5, 11, c_max=1, seed=0)
    assert max_feasible_edges(5) == 10


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 8),
    c_max=st.integers(1, 6),
    seed=st.integers(0, 10**6),
    data=st.data(),
)
def test_generator_always_connected_and_acyclic(n, c_max, seed, data):
    m = data.draw(st.integers(n - 1, max_feasible_edges(n)))
    net = generate_random(n, m, c_max, seed)
    assert net.n_edges == m
    assert all(e.tail < e.head for e in net.edges)
    from spikeflow.flow import _weakly_connected

    assert _weakly_connected(n, [(e.tail, e.head) for e in net.edges])


def test_edmonds_karp_equals_brute_force_on_tiny_suite():
    # every edge subset of the complete DAG on 4 nodes, striped capacities
    all_pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    for k in range(1, 7):
        for subset in itertools.combinations(all_pairs, k):
            for stripe in range(3):
                edges = [
                    (u, v, ((i * (stripe + 1) + stripe) % 3) + 1)
                    for i, (u, v) in enumerate(subset)
                ]
                net = FlowNetwork(4, edges, 0, 3)
                result = edmonds_karp(net)
                assert validate_flow(net, result) == []
                assert result.value == brute_force_max_flow(net)
                assert result.value == min_cut_capacity(net, result)
                assert result.value == exhaustive_min_cut(net)


def test_dimacs_roundtrip():
    net = generate_random(5, 7, c_max=10, seed=7)
    text = format_dimacs(net, comment="seed 7")
    parsed = parse_dimacs(text)
    assert parsed.n_nodes == net.n_nodes
    assert parsed.source == net.source and parsed.sink == net.sink
    assert [(e.tail, e.head, e.cap) for e in parsed.edges] == [
        (e.tail, e.head, e.cap) for e in net.edges
    ]


def test_dimacs_rejects_multi_source():
    text = "p max 3 1\nn 1 s\nn 2 s\nn 3 t\na 1 3 1\n"
    with pytest.raises(ParseError) as exc:
        parse_dimacs(text)
    assert "multiple sources" in str(exc.value)


def test_dimacs_errors_carry_line_numbers():
    with pytest.raises(ParseError) as exc:
        parse_dimacs("p max 2 1\nn 1 s\nn 2 t\na 1 2\n")
    assert "line 4" in str(exc.value)
    with pytest.raises(ParseError):
        parse_dimacs("n 1 s\nn 2 t\n")  # missing problem line
    with pytest.raises(ParseError):
        parse_dimacs("p max 2 2\nn 1 s\nn 2 t\na 1 2 1\n")  # arc count mismatch
