import io
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeflow.errors import ParseError, UnknownNeuronError
from spikeflow.snn import (
    Neuron,
    Role,
    SimulationState,
    SpikingNetwork,
    Synapse,
    energy,
    format_netlist,
    parse_netlist,
    run,
    set_potential,
    step,
    write_trace_csv,
)

ONE = Fraction(1)


def make_net(overflow=False):
    return SpikingNetwork(overflow_reset=overflow)


def driver(net, nid, times):
    """A scheduled neuron forced to fire at the given times."""
    net.add_neuron(Neuron(nid, threshold=10**9, reset=0, leak=ONE, v0=0, role=Role.SCHEDULED))
    for t in times:
        net.add_schedule(nid, t)
    return nid


def test_threshold_at_start_fires_at_t0():
    net = make_net()
    net.add_neuron(Neuron(0, threshold=1, reset=0, leak=ONE, v0=1, role=Role.TRANSMITTER))
    state = run(net, 3)
    assert state.trace == [(0, 0)]
    assert state.potentials[0] == 0


def test_pure_integration_fires_when_sum_reaches_threshold():
    net = make_net()
    net.add_neuron(Neuron(0, threshold=3, reset=0, leak=ONE, v0=0))
    driver(net, 9, [0, 1, 2])
    net.add_synapse(Synapse(9, 0, delay=1, weight=1))
    state = run(net, 5)
    spikes = [(t, n) for t, n in state.trace if n == 0]
    assert spikes == [(3, 0)]


def test_leak_zero_erases_history():
    # V=1 at t=1, then V = 0*1 + 1 = 1 at t=2: threshold 2 is never reached.
    net = make_net()
    net.add_neuron(Neuron(0, threshold=2, reset=0, leak=Fraction(0), v0=0))
    driver(net, 9, [0, 1])
    net.add_synapse(Synapse(9, 0, delay=1, weight=1))
    state = run(net, 5)
    assert [(t, n) for t, n in state.trace if n == 0] == []


def test_leak_one_holds_potential_without_input():
    net = make_net()
    net.add_neuron(Neuron(0, threshold=5, reset=0, leak=ONE, v0=3))
    state = SimulationState.initial(net)
    for _ in range(4):
        step(net, state)
    assert state.potentials[0] == 3


def test_fractional_leak_decays_lazily():
    net = make_net()
    net.add_neuron(Neuron(0, threshold=100, reset=0, leak=Fraction(1, 2), v0=8))
    driver(net, 9, [2])
    net.add_synapse(Synapse(9, 0, delay=1, weight=1))
    state = run(net, 4)
    # 8 halves three times (t=1,2,3) and picks up +1 at t=3.
    assert state.potentials[0] == 2


def test_empty_network_runs_to_limit():
    state = run(make_net(), 5)
    assert state.trace == []
    assert state.t == 5
    assert state.steps_used == 5


def test_exact_step_count_stop():
    net = make_net()
    net.add_neuron(Neuron(0, threshold=1, reset=0, leak=ONE, v0=1, role=Role.TRANSMITTER))
    state = run(net, 3)
    assert state.trace == [(0, 0)]
    assert state.t == 3


def chain_search_net():
    """Hand-built two-edge chain search/readout network (|E|=2, offset K=3)."""
    net = make_net()
    T, H1, H2, R1, R2, C1, C2 = range(7)
    net.add_neuron(Neuron(T, 1, 0, ONE, v0=1, role=Role.TRANSMITTER))
    for nid in (H1, H2):
        net.add_neuron(Neuron(nid, 4, 0, ONE, v0=3))
    for nid in (R1, R2):
        net.add_neuron(Neuron(nid, 4, 0, ONE, v0=3, role=Role.READOUT))
    # capacities 3 and 5, zero flow: thresholds c+K, potentials K
    net.add_neuron(Neuron(C1, 6, 0, ONE, v0=3, role=Role.CAPACITY))
    net.add_neuron(Neuron(C2, 8, 0, ONE, v0=3, role=Role.CAPACITY))
    net.add_synapse(Synapse(T, H2, 1, 1))    # transmitter -> sink edge
    net.add_synapse(Synapse(H2, H1, 1, 1))   # backward wave
    net.add_synapse(Synapse(H1, R1, 1, 1))   # source-edge bridge
    net.add_synapse(Synapse(R1, R2, 1, 1))   # forward readout
    net.add_synapse(Synapse(C1, H1, 0, -3))
    net.add_synapse(Synapse(C1, R1, 0, -3))
    net.add_synapse(Synapse(C2, H2, 0, -3))
    net.add_synapse(Synapse(C2, R2, 0, -3))
    return net, (T, H1, H2, R1, R2, C1, C2)


def test_chain_wave_stops_at_sink_readout():
    net, (T, H1, H2, R1, R2, _, _) = chain_search_net()
    state = run(net, 2 * 2 + 1, stop_on_fire=[R2])
    assert state.t == 4
    assert state.halted
    assert state.steps_used == 5
    assert state.trace == [(0, T), (1, H2), (2, H1), (3, R1), (4, R2)]


def test_chain_episode_energy_is_five_spikes():
    net, (_, _, _, _, R2, _, _) = chain_search_net()
    state = run(net, 5, stop_on_fire=[R2])
    assert energy(state) == 5


def test_saturated_capacity_inhibits_same_step():
    # A capacity neuron at threshold fires at t=0 and its delay-0 inhibition
    # must land before the delay-1 wave, silencing its edge for the episode.
    net = make_net()
    C, H, T = 0, 1, 2
    net.add_neuron(Neuron(C, 5, 0, ONE, v0=5, role=Role.CAPACITY))
    net.add_neuron(Neuron(H, 4, 0, ONE, v0=3))
    net.add_neuron(Neuron(T, 1, 0, ONE, v0=1, role=Role.TRANSMITTER))
    net.add_synapse(Synapse(C, H, 0, -3))
    net.add_synapse(Synapse(T, H, 1, 1))
    state = run(net, 5)
    assert (0, C) in state.trace
    assert all(n != H for _, n in state.trace)
    assert state.potentials[H] == 1  # 0 after inhibition, +1 from the wave


def test_energy_counts_trace_events():
    assert energy(SimulationState.initial(make_net())) == 0
    net = make_net()
    net.add_neuron(Neuron(0, 1, 0, ONE, v0=1, role=Role.TRANSMITTER))
    state = run(net, 3)
    assert energy(state) == 1


def test_set_potential_is_additive():
    net = make_net()
    net.add_neuron(Neuron(0, 100, 0, ONE, v0=4))
    state = SimulationState.initial(net)
    set_potential(net, state, 0, 2)
    assert state.potentials[0] == 6
    set_potential(net, state, 0, 0)
    assert state.potentials[0] == 6


def test_set_potential_crossing_threshold_fires_on_next_step():
    # Capacity neuron for c=3 with |E|=4: threshold 8, resting at K+f=5.
    net = make_net()
    net.add_neuron(Neuron(0, 8, 0, ONE, v0=5, role=Role.CAPACITY))
    state = SimulationState.initial(net)
    set_potential(net, state, 0, 3)
    assert state.potentials[0] == 8
    _, fired = step(net, state)
    assert fired == {0}


def test_set_potential_errors():
    net = make_net()
    net.add_neuron(Neuron(0, 8, 0, ONE, v0=5))
    state = SimulationState.initial(net)
    with pytest.raises(UnknownNeuronError):
        set_potential(net, state, 99, 1)
    with pytest.raises(ValueError):
        set_potential(net, state, 0, -6)


def test_overflow_reset_subtracts_threshold():
    net = make_net(overflow=True)
    net.add_neuron(Neuron(0, 2, 0, ONE, v0=0))
    driver(net, 9, [0])
    net.add_synapse(Synapse(9, 0, delay=1, weight=3))
    state = run(net, 3)
    assert (1, 0) in state.trace
    assert state.potentials[0] == 1  # 3 - threshold 2


def test_scheduled_fire_resets_potential():
    net = make_net()
    net.add_neuron(Neuron(0, 100, 7, ONE, v0=50, role=Role.SCHEDULED))
    net.add_schedule(0, 2)
    state = run(net, 4)
    assert (2, 0) in state.trace
    assert state.potentials[0] == 7


def test_fires_at_most_once_per_step():
    # Forced fire and threshold crossing in the same step yield one event.
    net = make_net()
    net.add_neuron(Neuron(0, 1, 0, ONE, v0=1, role=Role.SCHEDULED))
    net.add_schedule(0, 0)
    state = run(net, 2)
    assert state.trace.count((0, 0)) == 1


def test_metronome_neuron_fires_every_step():
    # threshold 1, reset 1, leak 1, v0 1: a self-sustaining constant driver.
    net = make_net()
    net.add_neuron(Neuron(0, 1, 1, ONE, v0=1, role=Role.INPUT))
    state = run(net, 4)
    assert state.trace == [(0, 0), (1, 0), (2, 0), (3, 0)]


def test_inhibition_clamps_to_zero_after_summation():
    net = make_net()
    net.add_neuron(Neuron(0, 10, 0, ONE, v0=2))
    driver(net, 9, [0])
    net.add_synapse(Synapse(9, 0, delay=1, weight=-5))
    state = run(net, 3)
    assert state.potentials[0] == 0


def test_single_spike_offset_idiom():
    # threshold K+1, v0=K, reset 0: with fan-in <= K weight-1 inputs the
    # neuron cannot re-reach threshold after its reset.
    K = 4
    net = make_net()
    net.add_neuron(Neuron(0, K + 1, 0, ONE, v0=K))
    for i in range(K):
        driver(net, 10 + i, [i])
        net.add_synapse(Synapse(10 + i, 0, delay=1, weight=1))
    state = run(net, K + 3)
    assert sum(1 for _, n in state.trace if n == 0) == 1


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_determinism_and_nonnegativity(data):
    n_neurons = data.draw(st.integers(2, 6))
    net = make_net()
    for i in range(n_neurons):
        net.add_neuron(
            Neuron(
                i,
                threshold=data.draw(st.integers(1, 5)),
                reset=data.draw(st.integers(0, 2)),
                leak=Fraction(data.draw(st.sampled_from([0, 1]))),
                v0=data.draw(st.integers(0, 4)),
            )
        )
    for _ in range(data.draw(st.integers(0, 12))):
        net.add_synapse(
            Synapse(
                pre=data.draw(st.integers(0, n_neurons - 1)),
                post=data.draw(st.integers(0, n_neurons - 1)),
                delay=data.draw(st.integers(0, 2)),
                weight=data.draw(st.integers(-3, 3)),
            )
        )
    for _ in range(data.draw(st.integers(0, 3))):
        net.add_schedule(data.draw(st.integers(0, n_neurons - 1)), data.draw(st.integers(0, 4)))

    first = run(net, 8)
    second = run(net, 8)
    assert first.trace == second.trace
    assert all(v >= 0 for v in first.potentials.values())
    assert first.trace == sorted(first.trace)
    assert len(first.trace) == len(set(first.trace))  # no double-counted spikes


def test_netlist_roundtrip():
    net, _ = chain_search_net()
    net.add_schedule(0, 7)
    text = format_netlist(net)
    parsed = parse_netlist(text)
    assert format_netlist(parsed) == text


def test_netlist_comments_and_errors():
    good = "# comment\nN 0 1 0 1 1 transmitter\n"
    net = parse_netlist(good)
    assert net.neurons[0].role is Role.TRANSMITTER

    with pytest.raises(ParseError) as exc:
        parse_netlist("N 0 1 0 1 1 nosuchrole\n")
    assert "line 1" in str(exc.value)

    with pytest.raises(ParseError):
        parse_netlist("S 0 1 0\n")

    with pytest.raises(ParseError) as exc:
        parse_netlist("N 0 1 0 1 0 standard\nS 0 9 1 1\n")
    assert "line 2" in str(exc.value)


def test_netlist_forward_references_allowed():
    net = parse_netlist("S 1 0 1 1\nN 0 1 0 1 0 standard\nN 1 1 0 1 0 standard\n")
    assert len(net.out_synapses[1]) == 1


def test_trace_csv():
    net = make_net()
    net.add_neuron(Neuron(3, 1, 0, ONE, v0=1))
    state = run(net, 2)
    buf = io.StringIO()
    write_trace_csv(state, buf)
    assert buf.getvalue() == "time,neuron_id\n0,3\n"
