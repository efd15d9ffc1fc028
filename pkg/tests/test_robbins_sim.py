import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdnet import AdversaryPolicy, CycleRep, Graph, SchedulerPolicy, build_robbins, builtin_protocol, simulate
from fdnet.codec import WireCodec
from fdnet.cycle_sim import BINARY, UNARY
from fdnet.protocol import Envelope
from fdnet.robbins_sim import OccurrenceState, RobbinsSim, SimError, rotate_edges
from fdnet.verifier import check_lemma_properties, extract_epochs, pulse_metrics, verify_tau

from conftest import random_two_edge_connected, ring
from procs import EVERYONE, SILENT, send

A, B, C, D, E = range(5)
K23 = Graph(range(5), [(E, B), (A, B), (D, E), (D, A), (B, C), (C, D)], root=D)
K23_WALK = CycleRep.from_global([D, A, B, C, D, E, B, C])
NOISY = dict(scheduler=SchedulerPolicy.random_delay(3), adversary=AdversaryPolicy.randomize(3))


def test_rotate_edges_examples():
    one = OccurrenceState([1], [2])
    assert rotate_edges(one) == one
    two = rotate_edges(OccurrenceState(["p0", "p1"], ["n0", "n1"]))
    assert two == OccurrenceState(["p1", "p0"], ["n1", "n0"])


@settings(max_examples=100)
@given(st.integers(1, 8))
def test_k_rotations_are_identity(k):
    s = OccurrenceState(list(range(k)), list(range(10, 10 + k)))
    r = s
    for _ in range(k):
        r = rotate_edges(r)
    assert r == s


def test_k23_walk_unary_one_envelope():
    sim = simulate(K23, send(A, E, "1"), {}, cycle=K23_WALK, mode=UNARY, **NOISY)
    assert sim.result.quiescent
    assert sim.outputs[E] == ["1"]
    assert all(sim.outputs[v] == [] for v in K23.nodes if v != E)
    (ep,) = extract_epochs(sim.recorder)
    d = WireCodec(5).unary(Envelope("1", A, E))
    assert ep.encoded == d
    data = {}
    for (node, _), s in ep.strings.items():
        data[node] = data.get(node, 0) + s.count("1") - 1
    for v in K23.nodes:
        assert data[v] == K23_WALK.k(v) * d
    assert data[D] == data[B] == data[C] == 2 * d
    assert check_lemma_properties(sim).ok


def test_empty_queues_send_nothing():
    sim = simulate(K23, SILENT, {}, cycle=K23_WALK, **NOISY)
    assert sim.result.quiescent and sim.result.deliveries == 0


def test_both_orientations_rejected():
    with pytest.raises(SimError):
        RobbinsSim(0, OccurrenceState([1, 2], [2, 3]), None, WireCodec(4))


@pytest.mark.parametrize("mode", [UNARY, BINARY])
def test_broadcast_and_unicast_over_robbins_cycle(mode):
    sim = simulate(K23, EVERYONE, {}, cycle=K23_WALK, mode=mode, **NOISY)
    assert sim.result.quiescent
    for v in K23.nodes:
        got = sim.processes[v].got
        assert sorted(e.source for e in got if e.dest == -1) == [u for u in K23.nodes if u != v]
    report = check_lemma_properties(sim)
    assert report.ok, report.violations
    assert report.epochs == 2 * K23.n


@pytest.mark.parametrize("mode", [UNARY, BINARY])
def test_per_message_pulse_budget(mode):
    sim = simulate(K23, builtin_protocol("pairwise-sum"), {v: v + 1 for v in K23.nodes}, cycle=K23_WALK,
                   mode=mode, **NOISY)
    size = len(K23_WALK)
    for msg in pulse_metrics(sim)["per_message"]:
        body = msg["d"] if mode == UNARY else msg["frame_bits"]
        assert msg["pulses"] <= size * (body + 3)


def test_random_built_cycles_under_noise():
    rng = random.Random(21)
    for trial in range(6):
        g = random_two_edge_connected(rng.randint(4, 7), rng)
        cycle = build_robbins(g).cycle
        spec = builtin_protocol(rng.choice(["flood-max", "pairwise-sum"]))
        inputs = {v: rng.randint(0, 31) for v in g.nodes}
        for mode in (UNARY, BINARY) if trial < 2 else (BINARY,):
            sim = simulate(g, spec, inputs, cycle=cycle, mode=mode,
                           scheduler=SchedulerPolicy.random_delay(trial), adversary=AdversaryPolicy.randomize(trial))
            report = check_lemma_properties(sim)
            assert report.ok, report.violations
            assert verify_tau(g, spec, inputs, sim.tau, sim.outputs).valid


def test_degenerates_to_simple_cycle_sim():
    for n in range(3, 7):
        g = ring(n)
        spec = builtin_protocol("pairwise-sum")
        runs = [simulate(g, spec, {v: v for v in g.nodes}, cycle=CycleRep.from_global(g.ring_order()),
                         simulator=kind, **NOISY) for kind in ("cycle", "robbins")]
        assert runs[0].result.trace() == runs[1].result.trace()
        assert runs[0].outputs == runs[1].outputs
