"""Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned."""

import random
import re
import subprocess
import sys
import time
from collections import Counter

import pytest

from fdnet import (
    AdversaryPolicy, CycleRep, SchedulerPolicy, build_robbins, builtin_protocol, check_build, simulate,
    validate_cycle, verify_tau,
)
from fdnet.codec import deframe, frame
from fdnet.cycle_sim import BINARY, UNARY
from fdnet.protocol import Process, ProtocolSpec
from fdnet.verifier import XOR, bridge_demo, check_lemma_properties, extract_epochs, pulse_metrics

from conftest import random_two_edge_connected, ring

RUNS_PER_CLASS = 200
TIME_LIMIT_S = 120.0
BUILD_BUDGET = 10**7


def report(n, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    return ok


def _run(g, cycle, simulator, i, rng):
    spec = builtin_protocol("flood-max" if i % 2 else "pairwise-sum")
    inputs = {v: rng.randint(0, 63) for v in g.nodes}
    scheduler = SchedulerPolicy.random_delay(i) if i % 4 < 2 else SchedulerPolicy.lifo()
    sim = simulate(g, spec, inputs, cycle=cycle, simulator=simulator, scheduler=scheduler,
                   adversary=AdversaryPolicy.randomize(1000 + i))
    verdict = verify_tau(g, spec, inputs, sim.tau, sim.outputs)
    lemma = check_lemma_properties(sim)
    return sim, verdict, lemma


@pytest.fixture(scope="module")
def campaign():
    """200 noisy runs on simple cycles and 200 on built Robbins cycles."""
    t0 = time.perf_counter()
    rng = random.Random(2024)
    runs = {"cycle": [], "robbins": []}
    for i in range(RUNS_PER_CLASS):
        g = ring(3 + i % 6)
        runs["cycle"].append(_run(g, None, "cycle", i, rng))
    # one built cycle serves five runs; graphs cover n = 4..10
    graphs = []
    for j in range(RUNS_PER_CLASS // 5):
        g = random_two_edge_connected(4 + j % 7, rng)
        graphs.append((g, build_robbins(g, SchedulerPolicy.random_delay(j), AdversaryPolicy.randomize(j)).cycle))
    for i in range(RUNS_PER_CLASS):
        g, cycle = graphs[i // 5]
        runs["robbins"].append(_run(g, cycle, "robbins", i, rng))
    runs["elapsed"] = time.perf_counter() - t0
    return runs


def test_criterion_1_simulation_correctness(campaign):
    counts = {}
    for kind in ("cycle", "robbins"):
        sims = campaign[kind]
        counts[kind] = sum(1 for sim, v, _ in sims if v.valid and sim.result.quiescent)
    elapsed = campaign["elapsed"]
    ok = all(c == RUNS_PER_CLASS for c in counts.values()) and elapsed < TIME_LIMIT_S
    assert report(1, ok, f"verify_tau valid in {counts['cycle']}/{RUNS_PER_CLASS} simple-cycle and "
                         f"{counts['robbins']}/{RUNS_PER_CLASS} Robbins runs; {elapsed:.1f}s < {TIME_LIMIT_S:.0f}s")


def test_criterion_2_lemma_properties(campaign):
    violations = [v for kind in ("cycle", "robbins") for _, _, lemma in campaign[kind] for v in lemma.violations]
    epochs = sum(lemma.epochs for kind in ("cycle", "robbins") for _, _, lemma in campaign[kind])
    ok = not violations
    assert report(2, ok, f"{len(violations)} progress/single-holder/consistency violations over {epochs} epochs"
                         + (f"; first: {violations[0]}" if violations else ""))


def test_criterion_3_codec_properties():
    rng = random.Random(3)
    bad = 0
    for _ in range(1000):
        m = "".join(rng.choice("01") for _ in range(rng.randint(0, 64)))
        L = rng.choice([2, 3, 4])
        z = frame(m, L)
        unique = z.find("0" * L) == len(z) - L
        bound = len(z) <= 2 + L + (1 + 1 / (L - 1)) * len(m)
        if not (unique and deframe(z, L) == m and bound):
            bad += 1
    assert report(3, bad == 0, f"{bad} violations of unique terminator / round trip / expansion bound in 1000 frames")


class Send(Process):
    def init(self):
        if self.node != self.root:
            return []
        return [self.send(self.neighbors[0], self.params["payload"])]


def test_criterion_4_overhead_bounds(campaign):
    over = []
    checked = 0
    for kind in ("cycle", "robbins"):
        for sim, _, _ in campaign[kind]:
            size = len(sim.cycle)
            for msg in pulse_metrics(sim)["per_message"]:
                checked += 1
                if msg["pulses"] > size * (msg["frame_bits"] + 3):
                    over.append((kind, msg))
    # unary: one more payload bit doubles the DATA pulse count (d -> 2d or 2d + 1)
    rng = random.Random(4)
    n = 4
    g = ring(n)
    growth_ok = True
    ratios = []
    prev = None
    payload = ""
    for bits in range(1, 9):
        payload += rng.choice("01")
        sim = simulate(g, ProtocolSpec("send", Send, (("payload", payload),)), {}, mode=UNARY,
                       scheduler=SchedulerPolicy.random_delay(bits), adversary=AdversaryPolicy.randomize(bits))
        data = pulse_metrics(sim)["per_message"][0]["data_pulses"]
        if data % n:
            growth_ok = False
        d = data // n
        if prev is not None:
            ratios.append(d / prev)
            growth_ok &= d in (2 * prev, 2 * prev + 1)
        prev = d
    ok = not over and growth_ok
    assert report(4, ok, f"binary pulses <= |C|*(|frame|+3) for {checked - len(over)}/{checked} messages; "
                         f"unary DATA ratios per payload bit {min(ratios):.3f}..{max(ratios):.3f} (2 + rounding)")


def test_criterion_5_robbins_construction():
    rng = random.Random(5)
    bad = []
    max_ratio = 0.0
    max_pulses = 0
    for j in range(50):
        n = rng.randint(3, 10)
        g = random_two_edge_connected(n, rng)
        res = build_robbins(g, SchedulerPolicy.random_delay(j) if j % 2 else SchedulerPolicy.lifo(),
                            AdversaryPolicy.randomize(j), budget=BUILD_BUDGET)
        if res.cycle is None:
            bad.append((j, res.halt))
            continue
        rep = validate_cycle(g, res.cycle)
        problems = check_build(g, res)
        if not (rep.robbins and rep.covers_nodes and rep.covers_edges) or problems:
            bad.append((j, rep.failures + problems))
        if len(res.cycle) > n ** 3:
            bad.append((j, f"|C|={len(res.cycle)} > n^3"))
        max_ratio = max(max_ratio, len(res.cycle) / n ** 3)
        max_pulses = max(max_pulses, res.pulses)
    ok = not bad and max_pulses <= BUILD_BUDGET
    assert report(5, ok, f"{50 - len(bad)}/50 builds cover all nodes and edges with one orientation; "
                         f"max |C|/n^3 = {max_ratio:.3f}; max pulses {max_pulses} <= {BUILD_BUDGET}")


def test_criterion_6_degeneration_equivalence():
    diverged = []
    counts_differ = []
    cases = 0
    for n in range(3, 9):
        g = ring(n)
        for seed in range(4):
            spec = builtin_protocol("flood-max" if seed % 2 else "pairwise-sum")
            inputs = {v: (7 * v + seed) % 13 for v in g.nodes}
            cycle = CycleRep.from_global(g.ring_order())
            for mode in (BINARY, UNARY):
                traces = []
                for kind in ("cycle", "robbins"):
                    sim = simulate(g, spec, inputs, cycle=cycle, simulator=kind, mode=mode,
                                   scheduler=SchedulerPolicy.random_delay(seed), adversary=AdversaryPolicy.randomize(seed))
                    traces.append(sim.result.trace())
                if mode == BINARY:
                    cases += 1
                    if traces[0] != traces[1]:
                        diverged.append((n, seed))
                elif Counter(e for e, _ in traces[0]) != Counter(e for e, _ in traces[1]):
                    counts_differ.append((n, seed))
    ok = not diverged and not counts_differ
    assert report(6, ok, f"identical (edge, send_seq) traces in {cases - len(diverged)}/{cases} binary-mode cases; "
                         f"unary per-edge pulse counts equal in {cases - len(counts_differ)}/{cases}")


def _scenarios():
    rng = random.Random(7)
    for i in range(20):
        g = ring(3 + i % 6)
        yield "simple-cycle", g, None, i
        h = random_two_edge_connected(4 + i % 4, rng)
        yield "robbins", h, build_robbins(h).cycle, i
        yield "builder", random_two_edge_connected(4 + i % 4, rng), None, i


def test_criterion_7_content_obliviousness():
    divergences = []
    per_kind = Counter()
    for kind, g, cycle, i in _scenarios():
        traces = set()
        for seed in range(5):
            adversary = AdversaryPolicy.randomize(seed)
            scheduler = SchedulerPolicy.random_delay(i)
            if kind == "builder":
                trace = build_robbins(g, scheduler, adversary, record=True).run.trace()
            else:
                simulator = "cycle" if kind == "simple-cycle" else "robbins"
                spec = builtin_protocol("flood-max")
                trace = simulate(g, spec, {v: (v * 5 + i) % 11 for v in g.nodes}, cycle=cycle, simulator=simulator,
                                 scheduler=scheduler, adversary=adversary).result.trace()
            traces.add(tuple(trace))
        per_kind[kind] += 1
        if len(traces) != 1:
            divergences.append((kind, i))
    ok = not divergences
    assert report(7, ok, f"{len(divergences)} divergences across 5 adversary seeds; scenarios per automaton "
                         f"{dict(per_kind)}")


def test_criterion_8_bridge_demonstration():
    outcome = bridge_demo(XOR, "xor-count", AdversaryPolicy.ones())
    proc = subprocess.run([sys.executable, "-m", "fdnet", "demo-bridge", "--candidate", "xor-count"],
                          capture_output=True, text=True)
    verdicts = [r["verdict"] for r in outcome.runs]
    ok = outcome.refuted and any(v != "correct" for v in verdicts) and proc.returncode == 1
    assert report(8, ok, f"xor-count under all-ones adversary: {verdicts}; demo-bridge exit status {proc.returncode}")


class OneEach(Process):
    def init(self):
        return [self.send(self.neighbors[0], "1")]


def test_criterion_9_no_starvation():
    bad = []
    worst = 0
    for n in range(3, 9):
        g = ring(n)
        for seed in range(5):
            sim = simulate(g, ProtocolSpec("one-each", OneEach), {}, scheduler=SchedulerPolicy.random_delay(seed),
                           adversary=AdversaryPolicy.randomize(seed))
            held = {ep.holder: ep.k for ep in extract_epochs(sim.recorder)}
            for w in sim.recorder.waiting:
                enqueue_epoch = w.completed + 1
                if w.node not in held:
                    bad.append((n, seed, w.node, None))
                    continue
                wait = held[w.node] - enqueue_epoch
                worst = max(worst, wait)
                if wait > n - 1:
                    bad.append((n, seed, w.node, held[w.node]))
            if sorted(held) != list(g.nodes):
                bad.append((n, seed, "holders", sorted(held)))
    ok = not bad
    assert report(9, ok, f"{len(bad)} starvation violations for n = 3..8; worst wait {worst} epochs after the "
                         f"enqueue epoch (bound n-1)")
