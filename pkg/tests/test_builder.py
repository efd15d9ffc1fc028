import random

import pytest

from fdnet import AdversaryPolicy, BridgeError, CycleRep, Graph, SchedulerPolicy, build_robbins, check_build
from fdnet.builder import REPLY, MessageCodec
from fdnet.graph import shortest_directed_path, validate_cycle

from conftest import random_two_edge_connected, ring

K23_SQUARE = Graph(range(5), [(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 2)], root=0)


def test_triangle():
    res = build_robbins(ring(3), adversary=AdversaryPolicy.randomize(1))
    assert res.cycle.global_ == (0, 1, 2)
    assert res.log.cycles == [(0, 1, 2)]
    assert not check_build(ring(3), res)


def test_square_plus_ear_instance():
    res = build_robbins(K23_SQUARE, SchedulerPolicy.random_delay(2), AdversaryPolicy.randomize(2))
    assert res.log.cycles[0] == (0, 1, 2, 3)
    it = res.iterations[1]
    assert (it.root, it.closed_at, it.path) == (0, 2, [2, 3, 0])
    assert res.cycle.global_ == (0, 1, 2, 3, 0, 4, 2, 3)
    assert len(res.cycle) == 8
    assert not check_build(K23_SQUARE, res)


def test_k23_graph():
    a, b, c, d, e = range(5)
    g = Graph(range(5), [(e, b), (a, b), (d, e), (d, a), (b, c), (c, d)], root=d)
    res = build_robbins(g, SchedulerPolicy.lifo(), AdversaryPolicy.randomize(4))
    assert validate_cycle(g, res.cycle).robbins
    assert res.cycle.root == d
    assert not check_build(g, res)


def test_first_cycle_leaves_unreached_nodes_idle():
    res = build_robbins(K23_SQUARE)
    assert 4 not in res.iterations[0].visited


def test_single_cycle_graph_needs_one_iteration():
    g = ring(6)
    res = build_robbins(g, SchedulerPolicy.random_delay(5), AdversaryPolicy.randomize(5))
    assert len(res.iterations) == 1 and len(res.cycle) == 6


def test_closed_ear_has_empty_path():
    # a second triangle hanging off the root closes back at the root
    g = Graph(range(5), [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)], root=0)
    res = build_robbins(g, SchedulerPolicy.random_delay(1), AdversaryPolicy.randomize(1))
    it = res.iterations[1]
    assert it.closed_at == 0 and it.path == []
    assert validate_cycle(g, res.cycle).robbins


def test_bridge_is_refused():
    with pytest.raises(BridgeError):
        build_robbins(Graph([0, 1, 2, 3], [(0, 1), (1, 2), (2, 0), (2, 3)], root=0))


def test_next_root_is_lowest_reporter():
    rng = random.Random(8)
    for _ in range(15):
        g = random_two_edge_connected(rng.randint(4, 9), rng)
        res = build_robbins(g)
        for before, it in zip(res.log.cycles, res.iterations[1:]):
            cyc = CycleRep.from_global(before)
            used = cyc.undirected_edges()
            reporters = [v for v in set(before) if any(tuple(sorted((v, u))) not in used for u in g.neighbors(v))]
            assert it.root == min(reporters)


def test_ear_length_arithmetic():
    rng = random.Random(9)
    for _ in range(15):
        g = random_two_edge_connected(rng.randint(4, 9), rng)
        res = build_robbins(g)
        for it in res.iterations[1:]:
            before, after = it.cycle_before, it.cycle_after
            path = shortest_directed_path(list(before), it.closed_at, it.root)
            assert it.path == path
            ear_edges = len(after) - len(before) - max(len(path) - 1, 0)
            assert ear_edges >= 1
            assert after[:len(before)] == before


@pytest.mark.parametrize("seed", range(12))
def test_random_graphs_under_every_scheduler(seed):
    rng = random.Random(seed)
    g = random_two_edge_connected(rng.randint(4, 8), rng)
    for policy in (SchedulerPolicy.fifo(), SchedulerPolicy.lifo(), SchedulerPolicy.random_delay(seed)):
        res = build_robbins(g, policy, AdversaryPolicy.randomize(seed))
        assert res.cycle is not None, (res.halt, res.fault)
        assert not check_build(g, res)
        assert not res.log.violations


def test_construction_is_content_oblivious():
    rng = random.Random(31)
    g = random_two_edge_connected(6, rng)
    traces = {tuple(build_robbins(g, SchedulerPolicy.random_delay(3), AdversaryPolicy.randomize(s),
                                  record=True).run.trace()) for s in range(4)}
    assert len(traces) == 1


def test_message_codec_round_trip():
    mc = MessageCodec(3)
    for kind in range(9):
        for ids in ([], [5], [0, 7, 3]):
            flags = (False, True) if kind == REPLY else (None,)
            for flag in flags:
                assert mc.decode(mc.encode(kind, ids, flag)) == (kind, ids, flag)


def test_unary_mode_builds_small_cycles():
    # unary messages cost 2^|M| pulses, so only tiny instances fit the budget
    res = build_robbins(ring(3), mode="unary", adversary=AdversaryPolicy.randomize(0))
    assert res.cycle.global_ == (0, 1, 2)
