"""Exponential single-consultation decider for the max-flow decision problem.

Enumerates every candidate flow whose source outflow exceeds the threshold
and builds, per candidate and interior node, a spiking comparison circuit
that reports conservation violations.  A candidate's violation neuron feeds
a global reject latch; an accept neuron fires on schedule unless the latch
silences it.  Intentionally desk-scale only: the network is exponential in
the instance size, which is the point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import GuardExceeded
from .flow import FlowNetwork
from .oracle import ConsultMode, NeuromorphicOracle, ResourceReport
from .snn import Neuron, Role, Synapse

ONE = Fraction(1)
ZERO = Fraction(0)

CANDIDATE_GUARD = 4096


def candidate_count_bound(net: FlowNetwork) -> int:
    bound = 1
    for e in net.edges:
        bound *= e.cap + 1
        if bound > CANDIDATE_GUARD:
            return bound
    return bound


def enumerate_candidates(net: FlowNetwork, d: int):
    """All per-edge flow assignments with source outflow > d, in lexicographic
    edge-id order.  Conservation is deliberately not filtered here: testing it
    is the spiking network's job."""
    domains = [range(e.cap + 1) for e in net.edges]
    source_ids = [e.id for e in net.out_edges[net.source]]
    for combo in itertools.product(*domains):
        if sum(combo[i] for i in source_ids) > d:
            yield combo


@dataclass
class DeciderLayout:
    accept_id: int
    reject_id: int
    accept_time: int
    f_max: int
    n_candidates: int
    n_neurons: int
    n_interior: int


class _IdAllocator:
    def __init__(self):
        self.next_id = 0

    def take(self) -> int:
        nid = self.next_id
        self.next_id += 1
        return nid


def _add_timer(oracle, ids, metronome, value):
    """A neuron that fires exactly once, at step ``value``: the metronome
    feeds it one unit per step against a value+1 threshold, and a latch
    cancels the drive once it has fired."""
    timer = ids.take()
    latch = ids.take()
    oracle.write_neuron(Neuron(timer, value + 1, 0, ONE, v0=0))
    oracle.write_neuron(Neuron(latch, 1, 0, ONE, v0=0))
    oracle.write_synapse(Synapse(metronome, timer, 0, 1))
    oracle.write_synapse(Synapse(timer, latch, 0, 1))
    oracle.write_synapse(Synapse(latch, latch, 1, 1))
    oracle.write_synapse(Synapse(latch, timer, 0, -1))
    return timer


def add_conservation_subnet(
    oracle: NeuromorphicOracle,
    ids: _IdAllocator,
    metronome: int,
    flow_in: int,
    flow_out: int,
) -> int:
    """Detector for one (candidate, node) pair: returns the neuron that fires
    at ``min(flow_in, flow_out) + 2`` iff the two values differ.

    Two single-shot timers fire at their respective values; each of two
    one-sided coincidence detectors (memoryless, leak 0) fires when its timer
    fired unaccompanied one step earlier; either detector trips the output,
    which uses the single-spike offset idiom so later events cannot re-trip it.
    """
    timer_in = _add_timer(oracle, ids, metronome, flow_in)
    timer_out = _add_timer(oracle, ids, metronome, flow_out)
    out_neuron = ids.take()
    oracle.write_neuron(Neuron(out_neuron, 3, 0, ONE, v0=2))
    for first, second in ((timer_in, timer_out), (timer_out, timer_in)):
        detector = ids.take()
        oracle.write_neuron(Neuron(detector, 1, 0, ZERO, v0=0))
        oracle.write_synapse(Synapse(first, detector, 1, 1))
        oracle.write_synapse(Synapse(second, detector, 1, -1))
        oracle.write_synapse(Synapse(detector, out_neuron, 1, 1))
    return out_neuron


def _interior_nodes(net: FlowNetwork) -> list[int]:
    return [
        v
        for v in range(net.n_nodes)
        if v not in (net.source, net.sink) and (net.in_edges[v] or net.out_edges[v])
    ]


def _worst_detector_latency(net: FlowNetwork) -> int:
    """Upper bound on any violation detector's firing time.

    A detector fires at min(flow_in, flow_out) + 2 and only when the two
    differ, so the worst case over a node is min of the incident capacity
    sums, less one when those sums are equal (equal maxima cannot differ).
    """
    worst = 0
    for v in _interior_nodes(net):
        cap_in = sum(e.cap for e in net.in_edges[v])
        cap_out = sum(e.cap for e in net.out_edges[v])
        if cap_in == 0 and cap_out == 0:
            continue
        bound = min(cap_in, cap_out) - (1 if cap_in == cap_out else 0)
        worst = max(worst, bound)
    return worst + 2


def build_decider(net: FlowNetwork, d: int, oracle: NeuromorphicOracle) -> DeciderLayout:
    """Write the full pre-processing decider network onto the oracle."""
    if candidate_count_bound(net) > CANDIDATE_GUARD:
        raise GuardExceeded(
            f"candidate bound {candidate_count_bound(net)} exceeds {CANDIDATE_GUARD}"
        )
    f_max = max((e.cap for e in net.edges), default=0)
    interior = _interior_nodes(net)
    ids = _IdAllocator()

    metronome = ids.take()
    oracle.write_neuron(Neuron(metronome, 1, 1, ONE, v0=1, role=Role.INPUT))

    candidate_outputs: list[int] = []
    for combo in enumerate_candidates(net, d):
        violation = ids.take()  # fires once if any conservation constraint breaks
        oracle.write_neuron(Neuron(violation, net.n_nodes + 2, 0, ONE, v0=net.n_nodes + 1))
        for v in interior:
            flow_in = sum(combo[e.id] for e in net.in_edges[v])
            flow_out = sum(combo[e.id] for e in net.out_edges[v])
            detector = add_conservation_subnet(oracle, ids, metronome, flow_in, flow_out)
            oracle.write_synapse(Synapse(detector, violation, 0, 1))
        candidate_outputs.append(violation)

    n_candidates = len(candidate_outputs)
    # the reject latch must hear from every candidate before it may fire
    reject = ids.take()
    reject_threshold = max(n_candidates, 1)
    oracle.write_neuron(Neuron(reject, reject_threshold, 0, ONE, v0=0, role=Role.REJECT))
    oracle.write_synapse(Synapse(reject, reject, 1, reject_threshold))
    for violation in candidate_outputs:
        oracle.write_synapse(Synapse(violation, reject, 0, 1))
    if n_candidates == 0:
        oracle.write_schedule(reject, 0)

    # accept fires on schedule unless the reject latch keeps inhibiting it;
    # the schedule leaves room for the slowest possible violation report
    accept_time = max(f_max + 5, _worst_detector_latency(net) + 2)
    accept = ids.take()
    starter = ids.take()
    oracle.write_neuron(Neuron(accept, 1, 0, ONE, v0=0, role=Role.ACCEPT))
    oracle.write_neuron(Neuron(starter, accept_time + 2, 0, ONE, v0=0, role=Role.SCHEDULED))
    oracle.write_schedule(starter, accept_time)
    oracle.write_synapse(Synapse(starter, accept, 0, 1))
    oracle.write_synapse(Synapse(reject, accept, 1, -2))

    return DeciderLayout(
        accept_id=accept,
        reject_id=reject,
        accept_time=accept_time,
        f_max=f_max,
        n_candidates=n_candidates,
        n_neurons=ids.next_id,
        n_interior=len(interior),
    )


@dataclass
class NaiveDecision:
    accepted: bool
    accept_fire_time: int | None
    layout: DeciderLayout
    report: ResourceReport


def decide_naive(net: FlowNetwork, d: int) -> NaiveDecision:
    """Single oracle consultation (pre-processing model): build, run, read a bit."""
    report = ResourceReport()
    oracle = NeuromorphicOracle(report)
    layout = build_decider(net, d, oracle)
    tape, record = oracle.consult(ConsultMode.DECIDER, time_limit=layout.accept_time + 2)
    accept_fire_time = None
    for t, nid in tape.events:
        if nid == layout.accept_id:
            accept_fire_time = t
            break
    return NaiveDecision(
        accepted=(record.bit == 1),
        accept_fire_time=accept_fire_time,
        layout=layout,
        report=report,
    )
