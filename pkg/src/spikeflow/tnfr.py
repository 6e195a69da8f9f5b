"""Threshold network flow with reservoirs: problem type, reduction, exact checker.

A TNFR instance is a digraph whose arc flows are each either zero or within
the arc's [c_min, c_max] interval, with conservation everywhere except the
master source/sink and designated reservoir nodes (auxiliary sinks R and
sources P).  ``reduce_network`` unrolls a constrained spiking network over
its time bound into such an instance so that a flow of 3 can cross from
master source to master sink exactly when the network accepts within its
time and energy budgets; ``check_feasible`` decides instances exactly at
desk scale; ``verify_reduction`` exercises both directions.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import GuardExceeded, ParseError, SearchBudgetExceeded
from .snn import SimulationState, SpikingNetwork
from .snn import step as snn_step

ONE = Fraction(1)

PLAIN, SOURCE, SINK, RES_SINK, RES_SOURCE = "plain", "s", "t", "r", "p"


@dataclass(frozen=True)
class TnfrArc:
    idx: int
    tail: str
    head: str
    c_min: int
    c_max: int
    tag: str = ""


class TNFRInstance:
    def __init__(self, d: int):
        if d < 0:
            raise ValueError("decision threshold must be >= 0")
        self.d = d
        self.kinds: dict[str, str] = {}
        self.order: list[str] = []
        self.arcs: list[TnfrArc] = []
        self.out_arcs: dict[str, list[TnfrArc]] = {}
        self.in_arcs: dict[str, list[TnfrArc]] = {}
        self.node_tags: dict[str, str] = {}
        self.source: str | None = None
        self.sink: str | None = None

    def add_node(self, name: str, kind: str = PLAIN, tag: str = "") -> str:
        if name in self.kinds:
            raise ValueError(f"duplicate node {name!r}")
        if kind == SOURCE:
            if self.source is not None:
                raise ValueError("a second master source")
            self.source = name
        if kind == SINK:
            if self.sink is not None:
                raise ValueError("a second master sink")
            self.sink = name
        self.kinds[name] = kind
        self.order.append(name)
        self.out_arcs[name] = []
        self.in_arcs[name] = []
        if tag:
            self.node_tags[name] = tag
        return name

    def add_arc(self, tail: str, head: str, c_min: int, c_max: int, tag: str = "") -> TnfrArc:
        if tail not in self.kinds or head not in self.kinds:
            raise ValueError(f"arc ({tail!r},{head!r}) references unknown node")
        if not (0 <= c_min <= c_max):
            raise ValueError(f"bad capacity interval [{c_min},{c_max}]")
        arc = TnfrArc(len(self.arcs), tail, head, c_min, c_max, tag)
        self.arcs.append(arc)
        self.out_arcs[tail].append(arc)
        self.in_arcs[head].append(arc)
        return arc

    def conserving_nodes(self) -> list[str]:
        return [n for n in self.order if self.kinds[n] == PLAIN]

    def reservoirs(self) -> tuple[list[str], list[str]]:
        sinks = [n for n in self.order if self.kinds[n] == RES_SINK]
        sources = [n for n in self.order if self.kinds[n] == RES_SOURCE]
        return sinks, sources

    def without_arcs(self, tag_prefix: str) -> "TNFRInstance":
        """A copy minus every arc whose tag starts with the prefix (mutation hook)."""
        clone = TNFRInstance(self.d)
        for name in self.order:
            clone.add_node(name, self.kinds[name], self.node_tags.get(name, ""))
        for arc in self.arcs:
            if not arc.tag.startswith(tag_prefix):
                clone.add_arc(arc.tail, arc.head, arc.c_min, arc.c_max, arc.tag)
        return clone


def validate_witness(inst: TNFRInstance, flows: dict[int, int]) -> list[str]:
    """All threshold/conservation violations of a flow assignment (empty = valid)."""
    problems = []
    for arc in inst.arcs:
        f = flows.get(arc.idx, 0)
        if f != 0 and not (arc.c_min <= f <= arc.c_max):
            problems.append(f"arc {arc.idx} ({arc.tag}): flow {f} outside {{0}} u [{arc.c_min},{arc.c_max}]")
        if f < 0:
            problems.append(f"arc {arc.idx}: negative flow")
    for node in inst.conserving_nodes():
        inflow = sum(flows.get(a.idx, 0) for a in inst.in_arcs[node])
        outflow = sum(flows.get(a.idx, 0) for a in inst.out_arcs[node])
        if inflow != outflow:
            problems.append(f"node {node} ({inst.node_tags.get(node, '')}): {inflow} in != {outflow} out")
    return problems


def witness_value(inst: TNFRInstance, flows: dict[int, int]) -> int:
    return sum(flows.get(a.idx, 0) for a in inst.out_arcs[inst.source])


# --- exact feasibility search ------------------------------------------------


def _topological_arc_order(inst: TNFRInstance) -> list[TnfrArc]:
    indegree = {n: 0 for n in inst.order}
    for arc in inst.arcs:
        indegree[arc.head] += 1
    queue = deque(n for n in inst.order if indegree[n] == 0)
    node_rank: dict[str, int] = {}
    while queue:
        n = queue.popleft()
        node_rank[n] = len(node_rank)
        for arc in inst.out_arcs[n]:
            indegree[arc.head] -= 1
            if indegree[arc.head] == 0:
                queue.append(arc.head)
    if len(node_rank) < len(inst.order):  # cyclic: fall back to insertion order
        node_rank = {n: i for i, n in enumerate(inst.order)}
    return sorted(inst.arcs, key=lambda a: (node_rank[a.tail], node_rank[a.head], a.idx))


def check_feasible(
    inst: TNFRInstance,
    d: int | None = None,
    max_arcs: int = 64,
    max_domain: int = 129,
    budget: int = 10**8,
) -> tuple[bool, dict[int, int] | None]:
    """Exact backtracking search for a feasible flow with source outflow > d.

    Arc domains are {0} u [c_min, c_max]; partial assignments are pruned via
    per-node attainable-interval intersection and the source-outflow bound.
    Raises on oversized instances or when the expansion budget runs out.
    """
    if d is None:
        d = inst.d
    if inst.source is None or inst.sink is None:
        raise ValueError("instance needs a master source and sink")
    if len(inst.arcs) > max_arcs:
        raise GuardExceeded(f"{len(inst.arcs)} arcs exceed the limit {max_arcs}")
    for arc in inst.arcs:
        if arc.c_max - arc.c_min + 2 > max_domain:
            raise GuardExceeded(f"arc {arc.idx} domain too large")

    order = _topological_arc_order(inst)
    position = {arc.idx: i for i, arc in enumerate(order)}
    flows: dict[int, int] = {}
    # per-node list of (arc, is_incoming) sorted by assignment position
    incident: dict[str, list[tuple[TnfrArc, bool]]] = {n: [] for n in inst.order}
    for arc in inst.arcs:
        incident[arc.tail].append((arc, False))
        incident[arc.head].append((arc, True))
    conserving = set(inst.conserving_nodes())
    source_out = [a.idx for a in inst.out_arcs[inst.source]]
    expansions = 0

    def node_can_balance(node: str) -> bool:
        in_lo = in_hi = out_lo = out_hi = 0
        for arc, incoming in incident[node]:
            f = flows.get(arc.idx)
            lo, hi = (f, f) if f is not None else (0, arc.c_max)
            if incoming:
                in_lo += lo
                in_hi += hi
            else:
                out_lo += lo
                out_hi += hi
        return in_lo <= out_hi and out_lo <= in_hi

    def value_can_exceed() -> bool:
        total = 0
        for idx in source_out:
            f = flows.get(idx)
            total += f if f is not None else inst.arcs[idx].c_max
        return total > d

    def rec(i: int) -> bool:
        nonlocal expansions
        if i == len(order):
            return witness_value(inst, flows) > d
        arc = order[i]
        expansions += 1
        if expansions > budget:
            raise SearchBudgetExceeded(f"exceeded {budget} expansions")
        domain = list(range(arc.c_max, arc.c_min - 1, -1))
        if 0 not in domain:
            domain.append(0)
        for f in domain:
            flows[arc.idx] = f
            ok = value_can_exceed()
            if ok:
                for node in (arc.tail, arc.head):
                    if node in conserving and not node_can_balance(node):
                        ok = False
                        break
            if ok and rec(i + 1):
                return True
        del flows[arc.idx]
        return False

    if rec(0):
        witness = {arc.idx: flows.get(arc.idx, 0) for arc in inst.arcs}
        return True, witness
    return False, None


def enumerate_feasible_naive(inst: TNFRInstance, d: int | None = None) -> bool:
    """Unpruned full enumeration; the independent oracle for the checker itself."""
    if d is None:
        d = inst.d
    domains = []
    for arc in inst.arcs:
        dom = sorted({0, *range(arc.c_min, arc.c_max + 1)})
        domains.append(dom)
    for combo in itertools.product(*domains):
        flows = dict(enumerate(combo))
        if validate_witness(inst, flows):
            continue
        if witness_value(inst, flows) > d:
            return True
    return False


# --- the reduction -----------------------------------------------------------


@dataclass
class ReductionConfig:
    """A constrained spiking network plus its time and energy budgets.

    The network must use overflow resets, leak 1 and non-negative integer
    weights/delays; ``constant_id`` is the single always-firing input (unit
    threshold, no incoming synapses) and ``accept_id`` the acceptance neuron.
    The rejection neuron is behavioral (fires until acceptance) and is
    represented in the flow instance by forced per-step tokens.
    """

    net: SpikingNetwork
    constant_id: int
    accept_id: int
    time_bound: int
    energy_bound: int

    def validate(self) -> None:
        n = self.net
        if self.time_bound < 1:
            raise ValueError("time bound must be >= 1")
        if not n.overflow_reset:
            raise ValueError("assumption 5 violated: network must use overflow resets")
        for neuron in n.neurons.values():
            if neuron.leak != 1:
                raise ValueError(f"assumption 4 violated: neuron {neuron.id} leak {neuron.leak}")
            if neuron.v0 != 0 and neuron.id != self.constant_id:
                raise ValueError(
                    f"assumption 2 violated: neuron {neuron.id} has a bias potential"
                )
        for syns in n.out_synapses.values():
            for s in syns:
                if s.weight < 0:
                    raise ValueError(
                        f"assumption 3 violated: synapse {s.pre}->{s.post} has negative weight"
                    )
                if s.delay < 1:
                    # delay-0 deliveries cannot be unrolled into a time-forward
                    # flow graph; one step is the model's minimum latency here
                    raise ValueError(
                        f"assumption 3 violated: synapse {s.pre}->{s.post} needs delay >= 1"
                    )
        if self.constant_id not in n.neurons or self.accept_id not in n.neurons:
            raise ValueError("assumption 2 violated: constant or accept neuron missing")
        if n.neurons[self.constant_id].threshold != 1:
            raise ValueError("assumption 2 violated: the constant input must have unit threshold")
        for syns in n.out_synapses.values():
            for s in syns:
                if s.post == self.constant_id:
                    raise ValueError("assumption 2 violated: the constant input has an incoming synapse")
        if not (0 <= self.energy_bound <= len(n.neurons) * self.time_bound):
            raise ValueError("energy bound must satisfy 0 <= e <= n*t")

    def unrolled_ids(self) -> list[int]:
        return sorted(self.net.neurons)


@dataclass
class SimulationOutcome:
    accepted: bool
    accept_step: int | None
    spikes: int
    fires: dict[int, set[int]]          # neuron -> steps fired
    potential_after: dict[int, list[int]]  # neuron -> V at end of each step


def simulate_constrained(cfg: ReductionConfig) -> SimulationOutcome:
    """Run the network for the time bound with the constant input forced on."""
    cfg.validate()
    t_bound = cfg.time_bound
    sim = SpikingNetwork(overflow_reset=True)
    for neuron in cfg.net.neurons.values():
        sim.add_neuron(neuron)
    for syns in cfg.net.out_synapses.values():
        for s in syns:
            sim.add_synapse(s)
    for step_idx in range(t_bound):
        sim.add_schedule(cfg.constant_id, step_idx)

    state = SimulationState.initial(sim)
    fires: dict[int, set[int]] = {nid: set() for nid in sim.neurons}
    potential_after: dict[int, list[int]] = {nid: [] for nid in sim.neurons}
    for s_idx in range(t_bound):
        _, fired = snn_step(sim, state)
        for nid in fired:
            fires[nid].add(s_idx)
        for nid in sim.neurons:
            # leak is 1 throughout, so an untouched potential is current
            potential_after[nid].append(state.potentials[nid])
    accept_steps = fires[cfg.accept_id]
    accept_step = min(accept_steps) if accept_steps else None
    spikes = sum(len(v) for v in fires.values())
    accepted = accept_step is not None and spikes <= cfg.energy_bound
    return SimulationOutcome(accepted, accept_step, spikes, fires, potential_after)


def _live_dead_weights(cfg: ReductionConfig, nid: int, k: int) -> tuple[list[tuple[int, int, int]], int]:
    """Synapse deliveries from a firing at unroll column k that land within
    the horizon (as (post, arrival column, weight)), plus the dumped weight."""
    live = []
    dead = 0
    for s in cfg.net.out_synapses[nid]:
        arrival = k + s.delay
        if s.weight == 0:
            continue
        if arrival <= cfg.time_bound and s.delay >= 1:
            live.append((s.post, arrival, s.weight))
        else:
            dead += s.weight
    return live, dead


def reduce_network(cfg: ReductionConfig) -> TNFRInstance:
    """Unroll the constrained network into a TNFR instance with d = 2.

    Flow semantics: a neuron's carried potential rides its chain arcs, a
    firing pushes exactly the threshold through that column's distribution
    gadget (tapping one energy unit and feeding post-synaptic columns), and
    three master channels (energy, time, failure) each admit one unit exactly
    when the corresponding global constraint holds, so value 3 is attainable
    iff the network accepts within its bounds.
    """
    cfg.validate()
    t_bound, e_bound = cfg.time_bound, cfg.energy_bound
    T_acc = cfg.net.neurons[cfg.accept_id].threshold
    inst = TNFRInstance(d=2)

    s = inst.add_node("src", SOURCE, tag="master")
    t = inst.add_node("sink", SINK, tag="master")

    # step 4: energy gadget (unit passes iff total spikes <= e)
    s_e = inst.add_node("e:in", tag="energy")
    t_e = inst.add_node("e:out", tag="energy")
    r_e = inst.add_node("e:res", RES_SINK, tag="energy")
    j = [inst.add_node(f"e:j{k}", tag=f"energy:{k}") for k in range(1, t_bound + 1)]
    inst.add_arc(s, s_e, 0, 1, tag="master:energy:in")
    inst.add_arc(s_e, j[0], 0, 1, tag="energy:unit")
    for k in range(t_bound - 1):
        inst.add_arc(j[k], j[k + 1], 0, e_bound + 1, tag=f"energy:chain:{k + 1}")
    inst.add_arc(j[-1], r_e, 0, e_bound, tag="energy:overflow")
    inst.add_arc(j[-1], t_e, 0, 1, tag="energy:pass")
    inst.add_arc(t_e, t, 0, 1, tag="master:energy:out")

    # step 5: time gadget.  The channel unit can only cross the pairing gate
    # together with a silencing unit, and silencing units exist exactly when
    # the acceptance neuron fired inside the unrolled window (the window is
    # the time bound, so "accepted in time" and "accepted at all" coincide).
    # The rejection stream is therefore represented by the *absence* of its
    # silencing evidence: an idle network leaves the gate starved, which is
    # what "the rejection neuron keeps firing" must mean flow-side.
    s_t = inst.add_node("t:in", tag="time")
    t_t = inst.add_node("t:out", tag="time")
    r_t = inst.add_node("t:res", RES_SINK, tag="time")
    gate = inst.add_node("t:gate", tag="time:gate")
    burn = inst.add_node("t:burn", tag="time:gate")
    inst.add_arc(s, s_t, 0, 1, tag="master:time:in")
    inst.add_arc(s_t, gate, 0, 1, tag="time:unit")
    inst.add_arc(gate, burn, 2, 2, tag="time:pair")
    inst.add_arc(burn, t_t, 0, 1, tag="time:pass")
    inst.add_arc(burn, r_t, 0, 1, tag="time:spent-key")
    inst.add_arc(t_t, t, 0, 1, tag="master:time:out")

    # step 7: failure gadget (unit passes iff no forced fire was dodged)
    s_f = inst.add_node("f:in", tag="failure")
    t_f = inst.add_node("f:out", tag="failure")
    f_nodes = [inst.add_node(f"f:f{k}", tag=f"failure:{k}") for k in range(1, t_bound + 1)]
    inst.add_arc(s, s_f, 0, 1, tag="failure:master:in")
    inst.add_arc(s_f, f_nodes[0], 0, 1, tag="failure:unit")
    for k in range(t_bound - 1):
        inst.add_arc(f_nodes[k], f_nodes[k + 1], 0, 1, tag=f"failure:chain:{k + 1}")
    for k in range(t_bound):
        inst.add_arc(f_nodes[k], t_f, 0, 1, tag=f"failure:collect:{k + 1}")
    inst.add_arc(t_f, t, 0, 1, tag="failure:master:out")

    # step 1: the constant input fires all-or-nothing
    p_con = inst.add_node("p:con", RES_SOURCE, tag="constant")
    con_src = inst.add_node("con:src", tag="constant")
    inst.add_arc(p_con, con_src, t_bound, t_bound, tag="constant:drive")
    con_cols = []
    for k in range(1, t_bound + 1):
        col = inst.add_node(f"n:{cfg.constant_id}:{k}", tag=f"unroll:{cfg.constant_id}:{k}")
        con_cols.append(col)
        inst.add_arc(con_src, col, 1, 1, tag=f"constant:token:{k}")

    # step 2: unrolled potential chains for every other neuron
    unrolled: dict[tuple[int, int], str] = {}
    for k, col in enumerate(con_cols, start=1):
        unrolled[(cfg.constant_id, k)] = col
    plain_ids = [nid for nid in cfg.unrolled_ids() if nid != cfg.constant_id]
    for nid in plain_ids:
        T_i = cfg.net.neurons[nid].threshold
        for k in range(1, t_bound + 1):
            unrolled[(nid, k)] = inst.add_node(f"n:{nid}:{k}", tag=f"unroll:{nid}:{k}")
        for k in range(1, t_bound):
            inst.add_arc(
                unrolled[(nid, k)], unrolled[(nid, k + 1)], 0, max(T_i - 1, 0),
                tag=f"chain:{nid}:{k}",
            )
        # carried potential at the horizon drains to a reservoir
        leftover = inst.add_node(f"r:fin:{nid}", RES_SINK, tag=f"leftover:{nid}")
        inst.add_arc(
            unrolled[(nid, t_bound)], leftover, 0, max(T_i - 1, 0),
            tag=f"chain:fin:{nid}",
        )
        for k in range(1, t_bound + 1):
            inst.add_arc(unrolled[(nid, k)], f_nodes[k - 1], 0, 1, tag=f"failure:escape:{nid}:{k}")

    # the silencing stream: one unit per acceptance firing, ferried along a
    # per-timestep chain to the time gate; surplus drains to a reservoir
    z_nodes = [inst.add_node(f"z:{k}", tag=f"silence:{k}") for k in range(1, t_bound + 1)]
    r_z = inst.add_node("r:z", RES_SINK, tag="silence")
    for k in range(t_bound - 1):
        inst.add_arc(z_nodes[k], z_nodes[k + 1], 0, t_bound, tag=f"silence:chain:{k + 1}")
    inst.add_arc(z_nodes[-1], gate, 0, 1, tag="time:key")
    inst.add_arc(z_nodes[-1], r_z, 0, t_bound, tag="silence:drain")

    # steps 3 and 6: one distribution gadget per (neuron, column).  The merge
    # vertex collects the firing plus any auxiliary-source residue and must
    # forward the exact total through one all-or-nothing arc; only then is
    # the total split over taps and deliveries.  Without that serializer, an
    # auxiliary source could push its residue through a subset of the out-arcs
    # and fabricate deliveries or silence units without the neuron firing.
    for nid in cfg.unrolled_ids():
        is_constant = nid == cfg.constant_id
        is_accept = nid == cfg.accept_id
        T_i = 1 if is_constant else cfg.net.neurons[nid].threshold
        for k in range(1, t_bound + 1):
            live, _dead = _live_dead_weights(cfg, nid, k)
            w_live = sum(w for _, _, w in live)
            silence_units = 1 if is_accept else 0
            drained = 1 + w_live + silence_units
            res = T_i - drained
            total = drained + max(res, 0)

            out_node = inst.add_node(f"g:out:{nid}:{k}", tag=f"gadget:{nid}:{k}")
            dist = inst.add_node(f"g:dist:{nid}:{k}", tag=f"gadget:{nid}:{k}")
            inst.add_arc(unrolled[(nid, k)], out_node, T_i, T_i, tag=f"gadget:fire:{nid}:{k}")
            if res < 0:
                p_node = inst.add_node(f"p:g:{nid}:{k}", RES_SOURCE, tag=f"gadget:res:{nid}:{k}")
                inst.add_arc(p_node, out_node, -res, -res, tag=f"gadget:residue:{nid}:{k}")
            inst.add_arc(out_node, dist, total, total, tag=f"gadget:total:{nid}:{k}")
            inst.add_arc(dist, j[k - 1], 1, 1, tag=f"energy:tap:{nid}:{k}")
            if w_live > 0:
                ass = inst.add_node(f"g:ass:{nid}:{k}", tag=f"gadget:ass:{nid}:{k}")
                inst.add_arc(dist, ass, w_live, w_live, tag=f"gadget:spread:{nid}:{k}")
                for post, arrival, w in live:
                    inst.add_arc(ass, unrolled[(post, arrival)], w, w, tag=f"gadget:deliver:{nid}:{k}:{post}")
            if is_accept:
                inst.add_arc(dist, z_nodes[k - 1], silence_units, silence_units, tag=f"silence:inject:{k}")
            if res > 0:
                r_node = inst.add_node(f"r:g:{nid}:{k}", RES_SINK, tag=f"gadget:res:{nid}:{k}")
                inst.add_arc(dist, r_node, res, res, tag=f"gadget:residue:{nid}:{k}")
    return inst


def simulate_to_witness(cfg: ReductionConfig) -> dict[int, int] | None:
    """Translate an accepting run into a concrete value-3 flow (None if the
    run rejects or violates its bounds)."""
    outcome = simulate_constrained(cfg)
    if not outcome.accepted:
        return None
    inst = reduce_network(cfg)
    return _witness_from_run(cfg, inst, outcome)


def _witness_from_run(cfg: ReductionConfig, inst: TNFRInstance, outcome: SimulationOutcome) -> dict[int, int]:
    t_bound = cfg.time_bound
    arcs_by_tag = {arc.tag: arc for arc in inst.arcs}
    flows: dict[int, int] = {arc.idx: 0 for arc in inst.arcs}

    def put(tag: str, value: int) -> None:
        flows[arcs_by_tag[tag].idx] = value

    # master channels: the time unit crosses the gate paired with one
    # silencing unit contributed by the accepting fire
    put("master:energy:in", 1)
    put("master:energy:out", 1)
    put("energy:unit", 1)
    put("master:time:in", 1)
    put("master:time:out", 1)
    put("time:unit", 1)
    put("time:key", 1)
    put("time:pair", 2)
    put("time:pass", 1)
    put("time:spent-key", 1)
    put("failure:master:in", 1)
    put("failure:master:out", 1)
    put("failure:unit", 1)
    put("failure:collect:1", 1)

    # the constant drive runs its all-on branch
    put("constant:drive", t_bound)
    for k in range(1, t_bound + 1):
        put(f"constant:token:{k}", 1)

    fires = outcome.fires
    # neuron chains carry end-of-step potentials
    for nid in cfg.unrolled_ids():
        if nid == cfg.constant_id:
            continue
        pot = outcome.potential_after[nid]
        T_i = cfg.net.neurons[nid].threshold
        for k in range(1, t_bound):
            carried = pot[k - 1]
            if carried > max(T_i - 1, 0):
                raise GuardExceeded(
                    f"neuron {nid} carries potential {carried} >= threshold {T_i}: "
                    "outside the reduction's dynamic range"
                )
            put(f"chain:{nid}:{k}", carried)
        put(f"chain:fin:{nid}", pot[t_bound - 1])

    # distribution gadgets mirror the firings
    spikes_per_col = [0] * (t_bound + 1)
    for nid in cfg.unrolled_ids():
        is_constant = nid == cfg.constant_id
        is_accept = nid == cfg.accept_id
        T_i = 1 if is_constant else cfg.net.neurons[nid].threshold
        for k in range(1, t_bound + 1):
            fired = (k - 1) in fires[nid]
            if not fired:
                continue
            spikes_per_col[k] += 1
            live, _ = _live_dead_weights(cfg, nid, k)
            w_live = sum(w for _, _, w in live)
            silence_units = 1 if is_accept else 0
            drained = 1 + w_live + silence_units
            res = T_i - drained
            put(f"gadget:fire:{nid}:{k}", T_i)
            put(f"gadget:total:{nid}:{k}", drained + max(res, 0))
            put(f"energy:tap:{nid}:{k}", 1)
            if w_live > 0:
                put(f"gadget:spread:{nid}:{k}", w_live)
                for post, arrival, w in live:
                    key = f"gadget:deliver:{nid}:{k}:{post}"
                    flows[arcs_by_tag[key].idx] += w
            if is_accept:
                put(f"silence:inject:{k}", 1)
            if res != 0:
                put(f"gadget:residue:{nid}:{k}", abs(res))

    # energy chain accumulates spike units, plus the channel unit up front
    running = 1
    for k in range(1, t_bound):
        running += spikes_per_col[k]
        put(f"energy:chain:{k}", running)
    total_spikes = sum(spikes_per_col)
    put("energy:overflow", total_spikes)
    put("energy:pass", 1)

    # silencing stream: one unit per acceptance firing rides to the gate
    accept_fire_cols = {s + 1 for s in fires[cfg.accept_id]}
    running = 0
    for k in range(1, t_bound + 1):
        if k in accept_fire_cols:
            running += 1
        if k < t_bound:
            put(f"silence:chain:{k}", running)
    put("silence:drain", running - 1)  # one unit is spent as the gate key
    return flows


@dataclass
class ReductionVerdict:
    snn_accepts: bool
    accept_step: int | None
    spikes: int
    flow_feasible: bool
    witness_valid: bool | None
    witness_value: int | None
    passed: bool
    details: list[str] = field(default_factory=list)


def verify_reduction(cfg: ReductionConfig, search_budget: int = 10**8) -> ReductionVerdict:
    """Check the biconditional on one configuration, both directions."""
    outcome = simulate_constrained(cfg)
    inst = reduce_network(cfg)
    details: list[str] = []
    witness_ok: bool | None = None
    value: int | None = None
    if outcome.accepted:
        witness = _witness_from_run(cfg, inst, outcome)
        problems = validate_witness(inst, witness)
        value = witness_value(inst, witness)
        witness_ok = not problems and value == 3
        details.extend(problems)
        if value != 3:
            details.append(f"witness value {value} != 3")
        feasible = witness_ok  # the witness itself is the certificate
        if not witness_ok:
            feasible, _ = check_feasible(
                inst, max_arcs=len(inst.arcs), budget=search_budget
            )
    else:
        feasible, found = check_feasible(inst, max_arcs=len(inst.arcs), budget=search_budget)
        if feasible:
            details.append(f"rejecting network but flow of value > 2 exists: {found}")
    passed = (outcome.accepted == feasible) and (witness_ok is not False)
    return ReductionVerdict(
        snn_accepts=outcome.accepted,
        accept_step=outcome.accept_step,
        spikes=outcome.spikes,
        flow_feasible=feasible,
        witness_valid=witness_ok,
        witness_value=value,
        passed=passed,
        details=details,
    )


# --- text formats ------------------------------------------------------------


def format_tnfr(inst: TNFRInstance) -> str:
    ids = {name: i + 1 for i, name in enumerate(inst.order)}
    lines = [f"p tnfr {len(inst.order)} {len(inst.arcs)} {inst.d}"]
    for name in inst.order:
        kind = inst.kinds[name]
        if kind != PLAIN:
            lines.append(f"n {ids[name]} {kind}")
    for arc in inst.arcs:
        lines.append(f"a {ids[arc.tail]} {ids[arc.head]} {arc.c_min} {arc.c_max}")
    return "\n".join(lines) + "\n"


def parse_tnfr(text: str) -> TNFRInstance:
    inst: TNFRInstance | None = None
    n_nodes = n_arcs = None
    kinds: dict[int, str] = {}
    arcs: list[tuple[int, int, int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("#"):
            continue
        fields = line.split()
        try:
            if fields[0] == "p":
                if len(fields) != 5 or fields[1] != "tnfr":
                    raise ValueError("expected: p tnfr <nodes> <arcs> <d>")
                n_nodes, n_arcs = int(fields[2]), int(fields[3])
                inst = TNFRInstance(d=int(fields[4]))
            elif fields[0] == "n":
                if len(fields) != 3 or fields[2] not in (SOURCE, SINK, RES_SINK, RES_SOURCE):
                    raise ValueError("expected: n <id> s|t|r|p")
                kinds[int(fields[1])] = fields[2]
            elif fields[0] == "a":
                if len(fields) != 5:
                    raise ValueError("expected: a <u> <v> <cmin> <cmax>")
                arcs.append((int(fields[1]), int(fields[2]), int(fields[3]), int(fields[4])))
            else:
                raise ValueError(f"unknown record kind {fields[0]!r}")
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
    if inst is None or n_nodes is None:
        raise ParseError("missing problem line")
    for i in range(1, n_nodes + 1):
        inst.add_node(str(i), kinds.get(i, PLAIN))
    for line_idx, (u, v, lo, hi) in enumerate(arcs):
        try:
            inst.add_arc(str(u), str(v), lo, hi)
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
    if n_arcs is not None and n_arcs != len(inst.arcs):
        raise ParseError(f"problem line promises {n_arcs} arcs, file has {len(inst.arcs)}")
    if inst.source is None or inst.sink is None:
        raise ParseError("missing master source or sink")
    return inst


def format_witness_csv(flows: dict[int, int]) -> str:
    lines = ["arc,flow"]
    for idx in sorted(flows):
        lines.append(f"{idx},{flows[idx]}")
    return "\n".join(lines) + "\n"
