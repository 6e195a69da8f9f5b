"""Deterministic discrete-time simulator for integer leaky integrate-and-fire networks.

The membrane update per timestep is ``V <- leak * V + sum(arriving weights)``;
a neuron fires when V reaches its threshold and its potential then drops to the
reset value (or, in overflow mode, the threshold is subtracted).  Potentials
are clamped at zero only after all same-step arrivals have been summed, so
inhibition can cancel excitation within a step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

from .errors import ParseError, UnknownNeuronError


class Role(enum.Enum):
    STANDARD = "standard"
    READOUT = "readout"
    SCHEDULED = "scheduled"
    INPUT = "input"
    ACCEPT = "accept"
    REJECT = "reject"
    TRANSMITTER = "transmitter"
    CAPACITY = "capacity"


# Roles whose spikes are visible on an oracle's output tape.
TAPE_ROLES = frozenset({Role.READOUT, Role.ACCEPT, Role.REJECT})


@dataclass(frozen=True)
class Neuron:
    id: int
    threshold: int
    reset: int
    leak: Fraction
    v0: int = 0
    role: Role = Role.STANDARD

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError(f"neuron {self.id}: threshold must be >= 1")
        if self.v0 < 0:
            raise ValueError(f"neuron {self.id}: initial potential must be >= 0")


@dataclass(frozen=True)
class Synapse:
    pre: int
    post: int
    delay: int
    weight: int

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("synapse delay must be >= 0")


class SpikingNetwork:
    """A static network: neurons, synapses and a forced-fire schedule.

    ``overflow_reset=True`` switches firing to subtract-threshold semantics
    instead of jumping to the reset value (used by the reduction module).
    """

    def __init__(self, overflow_reset: bool = False):
        self.neurons: dict[int, Neuron] = {}
        self.out_synapses: dict[int, list[Synapse]] = {}
        self.schedule: list[tuple[int, int]] = []  # (neuron id, fire time)
        self.overflow_reset = overflow_reset
        self._schedule_by_time: dict[int, list[int]] = {}

    def add_neuron(self, neuron: Neuron) -> Neuron:
        if neuron.id in self.neurons:
            raise ValueError(f"duplicate neuron id {neuron.id}")
        self.neurons[neuron.id] = neuron
        self.out_synapses[neuron.id] = []
        return neuron

    def add_synapse(self, synapse: Synapse) -> Synapse:
        for endpoint in (synapse.pre, synapse.post):
            if endpoint not in self.neurons:
                raise UnknownNeuronError(f"synapse endpoint {endpoint} not in network")
        self.out_synapses[synapse.pre].append(synapse)
        return synapse

    def add_schedule(self, neuron_id: int, time: int) -> None:
        if neuron_id not in self.neurons:
            raise UnknownNeuronError(f"scheduled neuron {neuron_id} not in network")
        if time < 0:
            raise ValueError("scheduled fire time must be >= 0")
        self.schedule.append((neuron_id, time))
        self._schedule_by_time.setdefault(time, []).append(neuron_id)

    def scheduled_at(self, t: int) -> list[int]:
        return self._schedule_by_time.get(t, [])

    def size(self) -> int:
        """Neuron count plus synapse count (the oracle's space measure)."""
        return len(self.neurons) + sum(len(s) for s in self.out_synapses.values())

    def neurons_with_role(self, role: Role) -> list[int]:
        return sorted(n.id for n in self.neurons.values() if n.role is role)


@dataclass
class SimulationState:
    """Mutable run state; ``t`` is the next step to execute (or the halting
    step once a stop condition has triggered inside :func:`run`)."""

    t: int = 0
    potentials: dict[int, int] = field(default_factory=dict)
    last_update: dict[int, int] = field(default_factory=dict)
    pending: dict[int, dict[int, int]] = field(default_factory=dict)
    trace: list[tuple[int, int]] = field(default_factory=list)
    halted: bool = False
    _recheck: set[int] = field(default_factory=set)

    @classmethod
    def initial(
        cls, net: SpikingNetwork, potentials: dict[int, int] | None = None
    ) -> "SimulationState":
        state = cls()
        for nid, neuron in net.neurons.items():
            v = neuron.v0 if potentials is None else potentials.get(nid, neuron.v0)
            state.potentials[nid] = v
            state.last_update[nid] = 0
        # Neurons already at threshold fire at t=0, before any synaptic input.
        state._recheck = {
            nid for nid, n in net.neurons.items() if state.potentials[nid] >= n.threshold
        }
        return state

    @property
    def steps_used(self) -> int:
        """Timesteps consumed: t+1 when halted mid-run, t when run to the limit."""
        return self.t + 1 if self.halted else self.t


def _materialize(net: SpikingNetwork, state: SimulationState, nid: int, t: int) -> int:
    """Apply the multiplicative leak lazily up to time ``t`` and return V."""
    last = state.last_update[nid]
    if last == t:
        return state.potentials[nid]
    v = state.potentials[nid]
    if v:
        leak = net.neurons[nid].leak
        if leak == 0:
            v = 0
        elif leak != 1:
            scaled = v * leak ** (t - last)
            v = int(scaled) if scaled.denominator == 1 else scaled
    state.potentials[nid] = v
    state.last_update[nid] = t
    return v


def step(net: SpikingNetwork, state: SimulationState) -> tuple[SimulationState, frozenset[int]]:
    """Execute timestep ``state.t`` and advance.  Returns the spike set of the step.

    Order within a step: scheduled fires, delayed-arrival integration,
    threshold check, delay-0 propagation, one threshold re-check, clamp.
    A neuron fires at most once per timestep.
    """
    t = state.t
    fired: set[int] = set()
    touched: set[int] = set()
    zero_queue: list[tuple[int, int]] = []

    def do_fire(nid: int) -> None:
        fired.add(nid)
        neuron = net.neurons[nid]
        v = _materialize(net, state, nid, t)
        if net.overflow_reset:
            state.potentials[nid] = v - neuron.threshold
        else:
            state.potentials[nid] = neuron.reset
        touched.add(nid)
        for syn in net.out_synapses[nid]:
            if syn.delay == 0:
                zero_queue.append((syn.post, syn.weight))
            else:
                bucket = state.pending.setdefault(t + syn.delay, {})
                bucket[syn.post] = bucket.get(syn.post, 0) + syn.weight

    # 1. Scheduled fires happen unconditionally.
    for nid in net.scheduled_at(t):
        if nid not in fired:
            do_fire(nid)

    # 2. Integrate arrivals due now; 3. threshold check.
    arrivals = state.pending.pop(t, {})
    for nid, weight in arrivals.items():
        _materialize(net, state, nid, t)
        state.potentials[nid] += weight
        touched.add(nid)
    check = set(arrivals) | state._recheck
    state._recheck = set()
    for nid in sorted(check):
        if nid not in fired and _materialize(net, state, nid, t) >= net.neurons[nid].threshold:
            do_fire(nid)

    # 4. Same-step delivery over delay-0 synapses; 5. one re-check pass.
    deliveries, zero_queue = zero_queue, []
    recheck: set[int] = set()
    for post, weight in deliveries:
        _materialize(net, state, post, t)
        state.potentials[post] += weight
        touched.add(post)
        recheck.add(post)
    for nid in sorted(recheck):
        if nid not in fired and state.potentials[nid] >= net.neurons[nid].threshold:
            do_fire(nid)
    # Delay-0 output of re-check fires still lands this step (depth-1 chains
    # are all this artifact's constructions need), without another check.
    for post, weight in zero_queue:
        _materialize(net, state, post, t)
        state.potentials[post] += weight
        touched.add(post)

    # 6. Clamp after all same-step arrivals, never per synapse.
    for nid in touched:
        if state.potentials[nid] < 0:
            state.potentials[nid] = 0
        elif state.potentials[nid] >= net.neurons[nid].threshold:
            state._recheck.add(nid)

    state.trace.extend((t, nid) for nid in sorted(fired))
    state.t = t + 1
    return state, frozenset(fired)


def run(
    net: SpikingNetwork,
    max_steps: int,
    stop_on_fire: Iterable[int] | None = None,
    initial_potentials: dict[int, int] | None = None,
) -> SimulationState:
    """Drive :func:`step` for up to ``max_steps`` timesteps.

    With ``stop_on_fire`` the run halts at the first step in which any listed
    neuron spikes; ``state.t`` then names that step and the state is terminal.
    ``initial_potentials`` overrides per-neuron starting values.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    stop_set = frozenset(stop_on_fire) if stop_on_fire is not None else None
    state = SimulationState.initial(net, initial_potentials)
    while state.t < max_steps:
        _, fired = step(net, state)
        if stop_set is not None and not stop_set.isdisjoint(fired):
            state.t -= 1
            state.halted = True
            break
    return state


def energy(state: SimulationState) -> int:
    """Total spike count of the run (one unit of energy per spike)."""
    return len(state.trace)


def set_potential(net: SpikingNetwork, state: SimulationState, neuron_id: int, value: int) -> SimulationState:
    """Additively write ``value`` onto a neuron's potential (a controller write)."""
    if neuron_id not in net.neurons:
        raise UnknownNeuronError(f"no neuron {neuron_id}")
    v = _materialize(net, state, neuron_id, state.t) + value
    if v < 0:
        raise ValueError(f"write would drive neuron {neuron_id} below zero")
    state.potentials[neuron_id] = v
    if v >= net.neurons[neuron_id].threshold:
        state._recheck.add(neuron_id)
    return state


# --- netlist and trace I/O -------------------------------------------------

_ROLES_BY_NAME = {r.value: r for r in Role}


def format_netlist(net: SpikingNetwork) -> str:
    lines = []
    for nid in sorted(net.neurons):
        n = net.neurons[nid]
        lines.append(f"N {n.id} {n.threshold} {n.reset} {n.leak} {n.v0} {n.role.value}")
    for nid in sorted(net.out_synapses):
        for s in net.out_synapses[nid]:
            lines.append(f"S {s.pre} {s.post} {s.delay} {s.weight}")
    for nid, time in net.schedule:
        lines.append(f"SCHED {nid} {time}")
    return "\n".join(lines) + "\n"


def parse_netlist(text: str) -> SpikingNetwork:
    net = SpikingNetwork()
    pending_synapses: list[tuple[int, Synapse]] = []
    pending_schedule: list[tuple[int, int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        kind = fields[0]
        try:
            if kind == "N":
                if len(fields) != 7:
                    raise ValueError("expected: N <id> <threshold> <reset> <leak> <v0> <role>")
                role = _ROLES_BY_NAME.get(fields[6])
                if role is None:
                    raise ValueError(f"unknown role {fields[6]!r}")
                net.add_neuron(
                    Neuron(
                        id=int(fields[1]),
                        threshold=int(fields[2]),
                        reset=int(fields[3]),
                        leak=Fraction(fields[4]),
                        v0=int(fields[5]),
                        role=role,
                    )
                )
            elif kind == "S":
                if len(fields) != 5:
                    raise ValueError("expected: S <pre> <post> <delay> <weight>")
                pending_synapses.append(
                    (line_no, Synapse(int(fields[1]), int(fields[2]), int(fields[3]), int(fields[4])))
                )
            elif kind == "SCHED":
                if len(fields) != 3:
                    raise ValueError("expected: SCHED <id> <time>")
                pending_schedule.append((line_no, int(fields[1]), int(fields[2])))
            else:
                raise ValueError(f"unknown record kind {kind!r}")
        except ParseError:
            raise
        except (ValueError, UnknownNeuronError) as exc:
            raise ParseError(str(exc), line_no) from exc
    # Synapses may reference neurons declared later in the file.
    for line_no, syn in pending_synapses:
        try:
            net.add_synapse(syn)
        except UnknownNeuronError as exc:
            raise ParseError(str(exc), line_no) from exc
    for line_no, nid, time in pending_schedule:
        try:
            net.add_schedule(nid, time)
        except (ValueError, UnknownNeuronError) as exc:
            raise ParseError(str(exc), line_no) from exc
    return net


def write_trace_csv(state: SimulationState, out: TextIO) -> None:
    out.write("time,neuron_id\n")
    for time, nid in state.trace:
        out.write(f"{time},{nid}\n")
