"""Spiking Edmonds-Karp: capacity/search/readout constructions plus the controller loop.

Neuron families per arc (offset K):

* capacity ``C``: threshold ``cap + K``, potential ``K + flow`` -- fires at
  step 0 exactly when the arc is exhausted, and its delay-0 inhibition of the
  arc's wave neurons lands before the delay-1 wave.
* search ``H``: threshold ``K + 1``, potential ``K`` -- a backward wave from
  the sink edges; fires once, at ``1 + (shortest hop count from the arc's
  head to the sink)``.
* readout ``R`` (forward-decode mode only): same idiom, flooded forward from
  source edges whose ``H`` fired; sink-edge readouts fire at ``2 * L`` for an
  augmenting path of ``L`` edges.

``solve`` offers two modes.  ``paper-faithful`` augments greedily over
forward arcs only and decodes one readout tape per episode; it is feasible
but not always optimal.  ``residual`` materializes a reverse companion arc
(with a mirror capacity neuron) per edge and walks the search wave one arc
per consultation, which makes it exactly Edmonds-Karp.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConstructionBugError
from .flow import FlowAssignment, FlowNetwork
from .oracle import ConsultMode, ConsultRecord, NeuromorphicOracle, OutputTape, ResourceReport, WorkingMemory
from .snn import Neuron, Role, Synapse

ONE = Fraction(1)

PAPER_FAITHFUL = "paper-faithful"
RESIDUAL = "residual"

# The eight working-memory words the controller ever uses, in any mode.
_WM_WORDS = ("head", "min_cap", "started", "episodes", "jams", "delta", "value", "tmp")


class DecodeJamError(ConstructionBugError):
    """Greedy tape decoding started a path but could not complete it."""


@dataclass(frozen=True)
class Arc:
    idx: int
    tail: int
    head: int
    cap: int      # 0 for reverse companions; their headroom lives in the mirror
    edge_id: int
    forward: bool


class EdgeNeuronMap:
    """Arc table plus the arithmetic neuron-id layout for one oracle network.

    Ids: transmitter 0, capacity family ``1..U``, search family ``U+1..2U``,
    readout family ``2U+1..3U`` (forward-decode mode only), where U is the
    arc count.  Readout/search ids ascend with arc index, so the oracle's
    (time, id) tape order breaks same-step ties by arc index.
    """

    def __init__(self, net: FlowNetwork, residual: bool):
        self.net = net
        self.residual = residual
        arcs = [Edge_to_arc(e) for e in net.edges]
        if residual:
            for e in net.edges:
                # reverse companions; arcs into the source or out of the sink
                # can never lie on an augmenting path
                if e.tail == net.source or e.head == net.sink:
                    continue
                arcs.append(Arc(len(arcs), e.head, e.tail, 0, e.id, False))
        self.arcs = arcs
        self.mirror: dict[int, int | None] = {a.idx: None for a in arcs}
        by_edge: dict[int, list[Arc]] = {}
        for a in arcs:
            by_edge.setdefault(a.edge_id, []).append(a)
        for pair in by_edge.values():
            if len(pair) == 2:
                fwd, rev = pair if pair[0].forward else (pair[1], pair[0])
                self.mirror[fwd.idx] = rev.idx
                self.mirror[rev.idx] = fwd.idx
        # offset: |E|+1 in forward-decode mode; the fixed arc-universe bound
        # 2|E|+1 in residual mode so capacity thresholds survive flow updates
        self.K = (2 * net.n_edges + 1) if residual else (net.n_edges + 1)
        self.arcs_by_tail: dict[int, list[Arc]] = {}
        self.arcs_by_head: dict[int, list[Arc]] = {}
        for a in arcs:
            self.arcs_by_tail.setdefault(a.tail, []).append(a)
            self.arcs_by_head.setdefault(a.head, []).append(a)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    # --- id layout ---

    transmitter_id = 0

    def cap_id(self, arc_idx: int) -> int:
        return 1 + arc_idx

    def search_id(self, arc_idx: int) -> int:
        return 1 + self.n_arcs + arc_idx

    def readout_id(self, arc_idx: int) -> int:
        return 1 + 2 * self.n_arcs + arc_idx

    def arc_of_readout(self, neuron_id: int) -> Arc:
        return self.arcs[neuron_id - 1 - 2 * self.n_arcs]

    def arc_of_search(self, neuron_id: int) -> Arc:
        return self.arcs[neuron_id - 1 - self.n_arcs]

    def sink_arc_idxs(self) -> list[int]:
        return [a.idx for a in self.arcs_by_head.get(self.net.sink, [])]

    def source_arc_idxs(self) -> list[int]:
        return [a.idx for a in self.arcs_by_tail.get(self.net.source, [])]

    def query_time_limit(self) -> int:
        return 2 * self.n_arcs + 1


def Edge_to_arc(e) -> Arc:
    return Arc(e.id, e.tail, e.head, e.cap, e.id, True)


@dataclass
class PathRecord:
    arcs: list[Arc]
    min_cap: int

    def __post_init__(self):
        if not self.arcs:
            raise ConstructionBugError("empty path")
        if self.min_cap < 1:
            raise ConstructionBugError("augmenting path with no headroom")
        for prev, nxt in zip(self.arcs, self.arcs[1:]):
            if prev.head != nxt.tail:
                raise ConstructionBugError("path edges do not chain")

    def edge_ids(self) -> list[int]:
        return [a.edge_id for a in self.arcs]


def build_capacity_neurons(oracle: NeuromorphicOracle, emap: EdgeNeuronMap) -> None:
    """One accumulator neuron per arc; its potential above K is the arc's flow."""
    for a in emap.arcs:
        oracle.write_neuron(
            Neuron(emap.cap_id(a.idx), a.cap + emap.K, 0, ONE, v0=emap.K, role=Role.CAPACITY)
        )
        if not a.forward:
            # a fresh reverse companion has no headroom until flow is pushed,
            # so it starts exactly at threshold and silences its wave neuron
            pass


def build_search_network(oracle: NeuromorphicOracle, emap: EdgeNeuronMap) -> None:
    """Transmitter, backward search wave, and (forward-decode mode) the
    forward readout network, wired against the already-written capacities."""
    K = emap.K
    with_readout = not emap.residual
    oracle.write_neuron(Neuron(emap.transmitter_id, 1, 0, ONE, v0=1, role=Role.TRANSMITTER))
    search_role = Role.READOUT if emap.residual else Role.STANDARD
    for a in emap.arcs:
        oracle.write_neuron(Neuron(emap.search_id(a.idx), 1 + K, 0, ONE, v0=K, role=search_role))
        oracle.write_synapse(Synapse(emap.cap_id(a.idx), emap.search_id(a.idx), 0, -K))
    if with_readout:
        for a in emap.arcs:
            oracle.write_neuron(Neuron(emap.readout_id(a.idx), 1 + K, 0, ONE, v0=K, role=Role.READOUT))
            oracle.write_synapse(Synapse(emap.cap_id(a.idx), emap.readout_id(a.idx), 0, -K))
    for idx in emap.sink_arc_idxs():
        oracle.write_synapse(Synapse(emap.transmitter_id, emap.search_id(idx), 1, 1))
    for a in emap.arcs:
        # wave direction is reversed: the downstream arc excites the upstream one
        for downstream in emap.arcs_by_tail.get(a.head, []):
            oracle.write_synapse(Synapse(emap.search_id(downstream.idx), emap.search_id(a.idx), 1, 1))
    if with_readout:
        for idx in emap.source_arc_idxs():
            oracle.write_synapse(Synapse(emap.search_id(idx), emap.readout_id(idx), 1, 1))
        for a in emap.arcs:
            for downstream in emap.arcs_by_tail.get(a.head, []):
                oracle.write_synapse(Synapse(emap.readout_id(a.idx), emap.readout_id(downstream.idx), 1, 1))


def run_search_query(oracle: NeuromorphicOracle, emap: EdgeNeuronMap) -> tuple[OutputTape, ConsultRecord]:
    """One episode's query: run until a sink-edge readout spikes, or for the
    full 2*arcs+1 steps when no augmenting path remains."""
    stop = {emap.readout_id(i) for i in emap.sink_arc_idxs()}
    return oracle.consult(
        ConsultMode.TRANSDUCER,
        time_limit=emap.query_time_limit(),
        stop_on_fire=stop or None,
    )


def _remaining_capacity(oracle: NeuromorphicOracle, emap: EdgeNeuronMap, arc: Arc) -> int:
    cid = emap.cap_id(arc.idx)
    return oracle.threshold_of(cid) - oracle.read_voltage(cid)


def decode_path(
    tape: OutputTape,
    emap: EdgeNeuronMap,
    oracle: NeuromorphicOracle,
    wm: WorkingMemory,
) -> PathRecord | None:
    """Single forward scan of a readout tape.

    Starts at the first source-edge event, accepts an event exactly when its
    arc continues the previous one, tracks the minimum remaining capacity and
    stops at an accepted sink-edge event.  Only three working-memory words
    are live (continuation head, running minimum, progress flag); the path
    itself is written back onto the oracle's path store.

    Returns None when the tape holds no source-edge event.  A tape that
    starts a path the scan cannot finish raises :class:`DecodeJamError`
    (the readout flood can outrun a greedy scan on branchy graphs).
    """
    source, sink = emap.net.source, emap.net.sink
    wm.write("started", 0)
    wm.write("min_cap", 0)
    wm.write("head", source)
    while not tape.end():
        oracle.report.charge()  # one tape read
        _, nid = tape.read()
        arc = emap.arc_of_readout(nid)
        if not wm.read("started"):
            if arc.tail != source:
                continue
        elif arc.tail != wm.read("head"):
            continue
        wm.write("tmp", _remaining_capacity(oracle, emap, arc))
        if wm.read("tmp") < 1:
            raise ConstructionBugError("saturated arc fired a readout")
        if not wm.read("started") or wm.read("tmp") < wm.read("min_cap"):
            wm.write("min_cap", wm.read("tmp"))
        wm.write("started", 1)
        wm.write("head", arc.head)
        oracle.write_path(arc.idx)
        if arc.head == sink:
            return _path_from_store(oracle, emap, wm.read("min_cap"))
    if not wm.read("started"):
        return None
    raise DecodeJamError(
        "readout tape started a path but offered no continuation to the sink"
    )


def _path_from_store(
    oracle: NeuromorphicOracle, emap: EdgeNeuronMap, min_cap: int, reverse: bool = False
) -> PathRecord:
    arcs = [emap.arcs[idx] for idx in oracle.read_path()]
    if reverse:
        arcs.reverse()
    return PathRecord(arcs, min_cap)


def recover_path_backward(
    oracle: NeuromorphicOracle,
    emap: EdgeNeuronMap,
    wm: WorkingMemory,
) -> PathRecord:
    """Jam recovery: rebuild a path by chaining readout events backward in time.

    A jammed tape still ends in a sink-edge readout, and every fired readout
    was excited by an event exactly one step earlier, so walking "who fired
    at t-1 into my tail" from the first sink event always reaches a source
    edge.  Each hop re-consults the oracle (the query is deterministic, so
    every consultation yields the identical tape) and scans it afresh.
    """
    oracle.clear_path()
    source = emap.net.source
    sink_ids = {emap.readout_id(i) for i in emap.sink_arc_idxs()}
    tape, _ = run_search_query(oracle, emap)
    wm.write("started", 0)
    while not tape.end():
        oracle.report.charge()
        t, nid = tape.read()
        if nid in sink_ids:
            arc = emap.arc_of_readout(nid)
            wm.write("tmp", t)
            wm.write("min_cap", _remaining_capacity(oracle, emap, arc))
            wm.write("head", arc.tail)
            oracle.write_path(arc.idx)
            wm.write("started", 1)
            break
    if not wm.read("started"):
        raise ConstructionBugError("jammed tape holds no sink-edge readout")
    while wm.read("head") != source:
        tape, _ = run_search_query(oracle, emap)
        found = False
        while not tape.end():
            oracle.report.charge()
            t, nid = tape.read()
            if t >= wm.read("tmp"):
                break
            arc = emap.arc_of_readout(nid)
            if t == wm.read("tmp") - 1 and arc.head == wm.read("head"):
                if _remaining_capacity(oracle, emap, arc) < wm.read("min_cap"):
                    wm.write("min_cap", _remaining_capacity(oracle, emap, arc))
                oracle.write_path(arc.idx)
                wm.write("head", arc.tail)
                wm.write("tmp", wm.read("tmp") - 1)
                found = True
                break
        if not found:
            raise ConstructionBugError("backward chain lost its exciter")
    return _path_from_store(oracle, emap, wm.read("min_cap"), reverse=True)


def descend_path(
    oracle: NeuromorphicOracle,
    emap: EdgeNeuronMap,
    wm: WorkingMemory,
) -> PathRecord | None:
    """Residual-mode path extraction: one consultation per path arc.

    Every consultation reruns the (identical, deterministic) backward wave
    and stops at the first fired search neuron among the current node's
    out-arcs; that arc's head is one hop closer to the sink, so the walk
    terminates at the sink in shortest-path length many steps.
    """
    source, sink = emap.net.source, emap.net.sink
    wm.write("head", source)
    wm.write("min_cap", 0)
    wm.write("started", 0)
    while True:
        out_arcs = emap.arcs_by_tail.get(wm.read("head"), [])
        stop = {emap.search_id(a.idx) for a in out_arcs}
        if not stop:
            if not wm.read("started"):
                return None
            raise ConstructionBugError("descent reached a node with no out-arcs")
        tape, _ = oracle.consult(
            ConsultMode.TRANSDUCER, time_limit=emap.query_time_limit(), stop_on_fire=stop
        )
        accepted = None
        while not tape.end():
            oracle.report.charge()
            _, nid = tape.read()
            arc = emap.arc_of_search(nid)
            if arc.tail == wm.read("head"):
                accepted = arc
                break
        if accepted is None:
            if not wm.read("started"):
                return None  # no augmenting path at all
            raise ConstructionBugError("descent wave died before the sink")
        wm.write("tmp", _remaining_capacity(oracle, emap, accepted))
        if wm.read("tmp") < 1:
            raise ConstructionBugError("inhibited arc fired in the search wave")
        if not wm.read("started") or wm.read("tmp") < wm.read("min_cap"):
            wm.write("min_cap", wm.read("tmp"))
        wm.write("started", wm.read("started") + 1)
        if wm.read("started") > emap.n_arcs:
            raise ConstructionBugError("descent exceeded the arc count")
        oracle.write_path(accepted.idx)
        wm.write("head", accepted.head)
        if accepted.head == sink:
            return _path_from_store(oracle, emap, wm.read("min_cap"))


def apply_flow_update(
    oracle: NeuromorphicOracle,
    emap: EdgeNeuronMap,
    path: PathRecord,
    wm: WorkingMemory,
) -> None:
    """Add the path's bottleneck onto every traversed arc's capacity neuron
    (and subtract it from the mirror companion, when one exists)."""
    wm.write("delta", path.min_cap)
    for idx in oracle.read_path():
        arc = emap.arcs[idx]
        cid = emap.cap_id(arc.idx)
        oracle.write_voltage(cid, wm.read("delta"))
        if oracle.read_voltage(cid) > oracle.threshold_of(cid):
            raise ConstructionBugError("flow pushed past an arc's capacity")
        mirror = emap.mirror[arc.idx]
        if mirror is not None:
            oracle.write_voltage(emap.cap_id(mirror), -wm.read("delta"))
    oracle.clear_path()


def read_max_flow(
    oracle: NeuromorphicOracle,
    emap: EdgeNeuronMap,
    wm: WorkingMemory,
) -> tuple[int, dict[int, int], int]:
    """Read per-edge flows (capacity potential minus K) and the net source
    outflow; also returns the raw potential sum over all capacity neurons."""
    net = emap.net
    wm.write("value", 0)
    voltage_sum = 0
    flows: dict[int, int] = {}
    for e in net.edges:
        wm.write("tmp", oracle.read_voltage(emap.cap_id(e.id)))
        voltage_sum += wm.read("tmp")
        flows[e.id] = wm.read("tmp") - emap.K
        if e.tail == net.source:
            wm.write("value", wm.read("value") + flows[e.id])
    return wm.read("value"), flows, voltage_sum


def verify_episode_properties(net: FlowNetwork, result: "SolveResult") -> list[str]:
    """Re-check the per-episode resource invariants on a finished solve:
    timestep and spike ceilings per query, single-spike wave neurons, and
    (forward-decode mode) the episode budget of one saturation per edge."""
    violations: list[str] = []
    emap = EdgeNeuronMap(net, residual=(result.mode == RESIDUAL))
    m = net.n_edges
    wave_ids = {emap.search_id(a.idx) for a in emap.arcs}
    wave_ids |= {emap.readout_id(a.idx) for a in emap.arcs} if not emap.residual else set()
    horizon = emap.query_time_limit()
    for i, rec in enumerate(result.query_records):
        if rec.timesteps > horizon:
            violations.append(f"query {i}: {rec.timesteps} steps > {horizon}")
        if result.mode == PAPER_FAITHFUL and rec.spikes > 3 * m + 1:
            violations.append(f"query {i}: {rec.spikes} spikes > {3 * m + 1}")
        counts: dict[int, int] = {}
        for _, nid in rec.trace or []:
            counts[nid] = counts.get(nid, 0) + 1
        for nid, count in counts.items():
            if nid in wave_ids and count > 1:
                violations.append(f"query {i}: wave neuron {nid} spiked {count} times")
    if result.mode == PAPER_FAITHFUL and result.episodes > m:
        violations.append(f"{result.episodes} augmenting episodes > {m} edges")
    return violations


@dataclass
class SolveResult:
    assignment: FlowAssignment
    report: ResourceReport
    mode: str
    episodes: int                 # augmenting episodes (each saturates an arc)
    total_consults: int
    decode_jams: int
    voltage_sum: int              # literal sum of capacity-neuron potentials
    query_records: list[ConsultRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "value": self.assignment.value,
            "flows": sorted(self.assignment.flows.items()),
            "episodes": self.episodes,
            "total_consults": self.total_consults,
            "decode_jams": self.decode_jams,
            "capacity_voltage_sum": self.voltage_sum,
            "report": self.report.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def solve(net: FlowNetwork, mode: str = PAPER_FAITHFUL, wm_capacity: int = 8) -> SolveResult:
    """Full controller loop: build the oracle network once, then alternate
    search queries, path decoding and flow updates until no path remains."""
    if mode not in (PAPER_FAITHFUL, RESIDUAL):
        raise ValueError(f"unknown mode {mode!r}")
    report = ResourceReport()
    wm = WorkingMemory(wm_capacity, report)
    oracle = NeuromorphicOracle(report)
    emap = EdgeNeuronMap(net, residual=(mode == RESIDUAL))
    build_capacity_neurons(oracle, emap)
    build_search_network(oracle, emap)

    wm.write("episodes", 0)
    wm.write("jams", 0)
    while True:
        if mode == PAPER_FAITHFUL:
            tape, _ = run_search_query(oracle, emap)
            try:
                path = decode_path(tape, emap, oracle, wm)
            except DecodeJamError:
                # The greedy scan lost the path even though the query proved
                # one exists; chain the (deterministic) tape backward instead.
                wm.write("jams", wm.read("jams") + 1)
                path = recover_path_backward(oracle, emap, wm)
        else:
            path = descend_path(oracle, emap, wm)
        if path is None:
            break
        apply_flow_update(oracle, emap, path, wm)
        wm.write("episodes", wm.read("episodes") + 1)
        if mode == PAPER_FAITHFUL and wm.read("episodes") > net.n_edges:
            raise ConstructionBugError("more augmenting episodes than edges")

    value, flows, voltage_sum = read_max_flow(oracle, emap, wm)
    return SolveResult(
        assignment=FlowAssignment(flows, value),
        report=report,
        mode=mode,
        episodes=wm.read("episodes"),
        total_consults=len(report.consultations),
        decode_jams=wm.read("jams"),
        voltage_sum=voltage_sum,
        query_records=list(report.consultations),
    )
