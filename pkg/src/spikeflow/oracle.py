"""Controller/oracle interaction: output tapes, resource metering, working memory.

The conventional controller builds a spiking network on the oracle through
metered write operations, consults it, and reads time-ordered spike events
back.  Every abstract controller operation costs one time unit; oracle
resources (timesteps, network size, spikes) are tallied per consultation.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from .errors import UndecidedError, UnknownNeuronError, WorkingMemoryExceeded
from .snn import TAPE_ROLES, Neuron, Role, SpikingNetwork, Synapse, energy, run

SpikeEvent = tuple[int, int]  # (time, neuron id)


class ConsultMode(enum.Enum):
    TRANSDUCER = "transducer"
    DECIDER = "decider"


class OutputTape:
    """Time-ordered spike events of readout/accept/reject neurons, read once."""

    def __init__(self, events: list[SpikeEvent]):
        self.events = sorted(events)
        self.cursor = 0

    def end(self) -> bool:
        return self.cursor >= len(self.events)

    def read(self) -> SpikeEvent:
        if self.end():
            raise IndexError("read past end of output tape")
        event = self.events[self.cursor]
        self.cursor += 1
        return event

    def __len__(self) -> int:
        return len(self.events)


@dataclass
class ConsultRecord:
    mode: str
    timesteps: int
    spikes: int
    network_size: int
    bit: int | None = None
    # full spike trace kept for property checks; not part of the JSON report
    trace: list[SpikeEvent] | None = None


@dataclass
class ResourceReport:
    """Append-only resource meter for one controller/oracle pair."""

    controller_time: int = 0
    controller_wm_peak: int = 0
    consultations: list[ConsultRecord] = field(default_factory=list)

    def charge(self, n: int = 1) -> None:
        self.controller_time += n

    def note_wm_cells(self, in_use: int) -> None:
        if in_use > self.controller_wm_peak:
            self.controller_wm_peak = in_use

    def add_consultation(self, record: ConsultRecord) -> None:
        self.consultations.append(record)

    @property
    def oracle_time(self) -> int:
        return max((c.timesteps for c in self.consultations), default=0)

    @property
    def oracle_space(self) -> int:
        return max((c.network_size for c in self.consultations), default=0)

    @property
    def oracle_energy(self) -> int:
        return sum(c.spikes for c in self.consultations)

    def to_dict(self) -> dict:
        return {
            "controller_time": self.controller_time,
            "controller_wm_peak": self.controller_wm_peak,
            "oracle_time": self.oracle_time,
            "oracle_space": self.oracle_space,
            "oracle_energy": self.oracle_energy,
            "consultations": [
                {
                    "mode": c.mode,
                    "timesteps": c.timesteps,
                    "spikes": c.spikes,
                    "network_size": c.network_size,
                    "bit": c.bit,
                }
                for c in self.consultations
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class WorkingMemory:
    """A bounded set of named integer cells; going over capacity is an error."""

    def __init__(self, capacity: int, report: ResourceReport | None = None):
        self.capacity = capacity
        self.report = report
        self.cells: dict[str, int] = {}

    def write(self, name: str, value: int) -> None:
        if name not in self.cells and len(self.cells) >= self.capacity:
            raise WorkingMemoryExceeded(
                f"cannot allocate {name!r}: all {self.capacity} words in use"
            )
        self.cells[name] = value
        if self.report is not None:
            self.report.charge()
            self.report.note_wm_cells(len(self.cells))

    def read(self, name: str) -> int:
        if self.report is not None:
            self.report.charge()
        return self.cells[name]


class NeuromorphicOracle:
    """Holds a network under construction and simulates it on demand.

    Controller-facing writes mutate the stored network (including per-neuron
    resting potentials); each consultation simulates from those potentials in
    a fresh state, so values written between consultations persist while
    within-episode dynamics do not.
    """

    def __init__(self, report: ResourceReport | None = None, overflow_reset: bool = False):
        self.report = report or ResourceReport()
        self.net = SpikingNetwork(overflow_reset=overflow_reset)
        self._v: dict[int, int] = {}
        self._path: list[int] = []

    def _charge(self, n: int = 1) -> None:
        self.report.charge(n)

    # --- construction (communication counts toward controller time) ---

    def write_neuron(self, neuron: Neuron) -> None:
        self._charge()
        self.net.add_neuron(neuron)
        self._v[neuron.id] = neuron.v0

    def write_synapse(self, synapse: Synapse) -> None:
        self._charge()
        self.net.add_synapse(synapse)

    def write_schedule(self, neuron_id: int, time: int) -> None:
        self._charge()
        self.net.add_schedule(neuron_id, time)

    def write_voltage(self, neuron_id: int, delta: int) -> None:
        """Additively adjust a neuron's resting potential (Write_Voltage)."""
        self._charge()
        if neuron_id not in self._v:
            raise UnknownNeuronError(f"no neuron {neuron_id}")
        value = self._v[neuron_id] + delta
        if value < 0:
            raise ValueError(f"write would drive neuron {neuron_id} below zero")
        self._v[neuron_id] = value

    def read_voltage(self, neuron_id: int) -> int:
        self._charge()
        if neuron_id not in self._v:
            raise UnknownNeuronError(f"no neuron {neuron_id}")
        return self._v[neuron_id]

    def threshold_of(self, neuron_id: int) -> int:
        self._charge()
        if neuron_id not in self.net.neurons:
            raise UnknownNeuronError(f"no neuron {neuron_id}")
        return self.net.neurons[neuron_id].threshold

    def drop_network(self) -> None:
        """Discard the constructed network (a rebuild follows)."""
        self._charge()
        overflow = self.net.overflow_reset
        self.net = SpikingNetwork(overflow_reset=overflow)
        self._v = {}
        self._path = []

    # --- path store (the oracle-side network that "maintains the path") ---

    def write_path(self, marker: int) -> None:
        """Append one marker to the oracle-held path (Write_Path)."""
        self._charge()
        self._path.append(marker)

    def read_path(self) -> list[int]:
        """Read the stored path back in write order (Read_Path), metered per item."""
        self._charge(max(1, len(self._path)))
        return list(self._path)

    def clear_path(self) -> None:
        self._charge()
        self._path = []

    # --- consultation ---

    def consult(
        self,
        mode: ConsultMode,
        time_limit: int,
        stop_on_fire: set[int] | None = None,
    ) -> tuple[OutputTape, ConsultRecord]:
        if time_limit < 1:
            raise ValueError("time_limit must be >= 1")
        net = self.net
        if mode is ConsultMode.DECIDER and stop_on_fire is None:
            stop_on_fire = set(net.neurons_with_role(Role.ACCEPT)) | set(
                net.neurons_with_role(Role.REJECT)
            )
        state = run(net, time_limit, stop_on_fire=stop_on_fire, initial_potentials=self._v)
        tape = OutputTape(
            [
                (t, nid)
                for t, nid in state.trace
                if net.neurons[nid].role in TAPE_ROLES
            ]
        )
        record = ConsultRecord(
            mode=mode.value,
            timesteps=state.steps_used,
            spikes=energy(state),
            network_size=net.size(),
            trace=state.trace,
        )
        if mode is ConsultMode.DECIDER:
            accepted = any(
                net.neurons[nid].role is Role.ACCEPT for _, nid in tape.events
            )
            rejected = any(
                net.neurons[nid].role is Role.REJECT for _, nid in tape.events
            )
            if accepted:
                record.bit = 1
            elif rejected:
                record.bit = 0
            else:
                self.report.add_consultation(record)
                raise UndecidedError(
                    f"decider ran {record.timesteps} steps with neither accept nor reject"
                )
        self.report.add_consultation(record)
        return tape, record
