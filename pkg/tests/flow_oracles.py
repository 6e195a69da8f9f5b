"""Independent reference oracles for max-flow tests.

Deliberately dumb: `brute_force_max_flow` enumerates every integer assignment
(with conservation pruning), and `exhaustive_min_cut` enumerates every s/t
partition.  By weak duality, a feasible flow whose value equals any cut
capacity is provably optimal, so these certify optimality without trusting
any augmenting-path search.
"""

from itertools import combinations

from spikeflow.flow import FlowNetwork


def brute_force_max_flow(net: FlowNetwork) -> int:
    m = net.n_edges
    # last edge index incident to each node, for early conservation checks
    last_incident = {}
    for v in range(net.n_nodes):
        ids = [e.id for e in net.in_edges[v]] + [e.id for e in net.out_edges[v]]
        if ids and v not in (net.source, net.sink):
            last_incident[v] = max(ids)
    check_after = {}
    for v, idx in last_incident.items():
        check_after.setdefault(idx, []).append(v)

    flows = [0] * m
    best = 0

    def conserved(v):
        inflow = sum(flows[e.id] for e in net.in_edges[v])
        outflow = sum(flows[e.id] for e in net.out_edges[v])
        return inflow == outflow

    def rec(i):
        nonlocal best
        if i == m:
            value = sum(flows[e.id] for e in net.out_edges[net.source])
            best = max(best, value)
            return
        for f in range(net.edges[i].cap + 1):
            flows[i] = f
            if all(conserved(v) for v in check_after.get(i, ())):
                rec(i + 1)
        flows[i] = 0

    rec(0)
    return best


def exhaustive_min_cut(net: FlowNetwork) -> int:
    interior = [v for v in range(net.n_nodes) if v not in (net.source, net.sink)]
    best = None
    for k in range(len(interior) + 1):
        for chosen in combinations(interior, k):
            s_side = {net.source, *chosen}
            cap = sum(
                e.cap for e in net.edges if e.tail in s_side and e.head not in s_side
            )
            if best is None or cap < best:
                best = cap
    return best
