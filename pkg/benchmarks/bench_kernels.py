"""Compares the compiled and pure-Python engine kernels on the same runs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

from fdnet import AdversaryPolicy, Graph, SchedulerPolicy, build_robbins, builtin_protocol
from fdnet._kernels import backends
from fdnet.codec import WireCodec
from fdnet.cycle_sim import ring_automata
from fdnet.engine import run
from fdnet.robbins_sim import cycle_automata
from fdnet.runner import spawn
from fdnet.trace import Recorder


def ring(n):
    return Graph(range(n), [(i, (i + 1) % n) for i in range(n)], root=0)


def wheel(n):
    edges = [(i, (i + 1) % (n - 1)) for i in range(n - 1)] + [(i, n - 1) for i in range(0, n - 1, 2)]
    return Graph(range(n), edges, root=0)


def workloads():
    spec = builtin_protocol("flood-max")
    g = ring(8)
    yield "ring8 binary", g, lambda: ring_automata(g.ring_order(), spawn(g, spec, {v: v for v in g.nodes}),
                                                   WireCodec(8), "binary", 2, Recorder())
    yield "ring5 unary", ring(5), lambda: ring_automata(
        list(range(5)), spawn(ring(5), spec, {v: 3 * v for v in range(5)}), WireCodec(5), "unary", 2, Recorder())
    w = wheel(9)
    cycle = build_robbins(w).cycle
    yield "wheel9 robbins", w, lambda: cycle_automata(cycle, spawn(w, spec, {v: v for v in w.nodes}),
                                                      WireCodec(9), "binary", 2, Recorder())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernels = backends()
    print(f"{'workload':16} {'backend':8} {'pulses':>8} {'best s':>8} {'Mpulse/s':>9}")
    for name, g, make in workloads():
        traces = {}
        for label, mod in kernels.items():
            best = float("inf")
            for _ in range(args.repeat):
                autos = make()
                t0 = time.perf_counter()
                res = run(g, autos, SchedulerPolicy.random_delay(1), AdversaryPolicy.randomize(2), kernels=mod)
                best = min(best, time.perf_counter() - t0)
            traces[label] = res.trace()
            print(f"{name:16} {label:8} {res.deliveries:>8} {best:>8.3f} {res.deliveries / best / 1e6:>9.3f}")
        if len({tuple(t) for t in traces.values()}) != 1:
            raise SystemExit(f"{name}: backends disagree")


if __name__ == "__main__":
    main()
