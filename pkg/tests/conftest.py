from fractions import Fraction

from spikeflow.snn import Neuron, Role, SpikingNetwork, Synapse

ONE = Fraction(1)


def build_chain_search_net():
    """Two-edge chain (s->a->t) search/readout network, |E|=2 so K=3.

    Capacities 3 and 5 at zero flow.  Returns the net and the neuron ids
    (T, H1, H2, R1, R2, C1, C2) where edge 1 is s->a and edge 2 is a->t.
    """
    net = SpikingNetwork()
    T, H1, H2, R1, R2, C1, C2 = range(7)
    net.add_neuron(Neuron(T, 1, 0, ONE, v0=1, role=Role.TRANSMITTER))
    for nid in (H1, H2):
        net.add_neuron(Neuron(nid, 4, 0, ONE, v0=3))
    for nid in (R1, R2):
        net.add_neuron(Neuron(nid, 4, 0, ONE, v0=3, role=Role.READOUT))
    net.add_neuron(Neuron(C1, 6, 0, ONE, v0=3, role=Role.CAPACITY))
    net.add_neuron(Neuron(C2, 8, 0, ONE, v0=3, role=Role.CAPACITY))
    net.add_synapse(Synapse(T, H2, 1, 1))
    net.add_synapse(Synapse(H2, H1, 1, 1))
    net.add_synapse(Synapse(H1, R1, 1, 1))
    net.add_synapse(Synapse(R1, R2, 1, 1))
    net.add_synapse(Synapse(C1, H1, 0, -3))
    net.add_synapse(Synapse(C1, R1, 0, -3))
    net.add_synapse(Synapse(C2, H2, 0, -3))
    net.add_synapse(Synapse(C2, R2, 0, -3))
    return net, (T, H1, H2, R1, R2, C1, C2)
