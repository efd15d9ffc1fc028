"""Running a protocol over the noisy network, through a simulator or directly."""

from __future__ import annotations

from dataclasses import dataclass

from .codec import WireCodec
from .cycle_sim import BINARY, UNARY, ring_automata
from .engine import DEFAULT_BUDGET, AdversaryPolicy, Automaton, RunResult, SchedulerPolicy, run
from .graph import CycleRep, Graph, GraphError, require_two_edge_connected, validate_cycle
from .protocol import BROADCAST, RECEIVE, SEND, Envelope, Process, ProtocolSpec, Transcript
from .robbins_sim import cycle_automata
from .trace import Recorder


@dataclass
class Simulation:
    graph: Graph
    protocol: ProtocolSpec
    inputs: dict
    simulator: str  # "cycle", "robbins" or "direct"
    mode: str
    run_limit: int
    cycle: CycleRep
    result: RunResult
    recorder: Recorder
    processes: dict

    @property
    def tau(self) -> Transcript:
        return self.recorder.tau

    @property
    def outputs(self) -> dict:
        return {v: p.result() for v, p in sorted(self.processes.items())}

    @property
    def automata(self) -> dict:
        return self.result.automata


def spawn(g: Graph, protocol: ProtocolSpec, inputs: dict) -> dict:
    return {v: protocol.make(v, g.neighbors(v), g.root, inputs.get(v)) for v in g.nodes}


def simulate(
    g: Graph,
    protocol: ProtocolSpec,
    inputs: dict,
    cycle: CycleRep | None = None,
    mode: str = BINARY,
    run_limit: int = 2,
    scheduler: SchedulerPolicy | None = None,
    adversary: AdversaryPolicy | None = None,
    budget: int = DEFAULT_BUDGET,
    simulator: str = "auto",
    record: bool = True,
    enforce_oblivious: bool = False,
) -> Simulation:
    """Simulate ``protocol`` on ``g`` over fully-defective channels.

    ``simulator`` is ``"cycle"`` (simple cycles only), ``"robbins"``, or
    ``"auto"``: the simple-cycle simulator when ``g`` is a cycle and no
    cycle is given, else the Robbins simulator (building a Robbins cycle
    first if none is given).
    """
    require_two_edge_connected(g)
    if simulator == "auto":
        simulator = "cycle" if cycle is None and g.is_simple_cycle() else "robbins"
    if simulator == "cycle":
        order = list(cycle.global_) if cycle is not None else g.ring_order()
        cycle = CycleRep.from_global(order)
    elif cycle is None:
        from .builder import build_robbins

        built = build_robbins(g)
        if built.cycle is None:
            raise GraphError(f"Robbins cycle construction failed: {built.halt} {built.fault}")
        cycle = built.cycle
    report = validate_cycle(g, cycle)
    if not (report.consistent and report.edges_exist and report.single_orientation and report.covers_nodes):
        raise GraphError(f"cycle unusable for simulation: {report.failures}")

    codec = WireCodec(max(g.nodes) + 1)
    rec = Recorder()
    processes = spawn(g, protocol, inputs)
    if simulator == "cycle":
        autos = ring_automata(list(cycle.global_), processes, codec, mode, run_limit, rec)
    else:
        autos = cycle_automata(cycle, processes, codec, mode, run_limit, rec)
    res = run(g, autos, scheduler, adversary, budget, record=record, clock=rec.clock,
              enforce_oblivious=enforce_oblivious)
    return Simulation(g, protocol, dict(inputs), simulator, mode, run_limit, cycle, res, rec, processes)


class DirectNode(Automaton):
    """Runs a process straight on the network: envelope payload travels as
    pulse content (prefixed by a 1 so it is never empty)."""

    def __init__(self, process: Process, tau: Transcript):
        self.process = process
        self.tau = tau

    def _emit(self, envs):
        out = []
        for env in envs or ():
            if env.dest == BROADCAST:
                raise GraphError("direct runs cannot broadcast")
            self.tau.record(SEND, self.process.node, env.dest, env.payload)
            out.append((env.dest, "1" + env.payload))
        return out

    def start(self):
        return self._emit(self.process.init())

    def receive(self, sender, payload):
        env = Envelope(payload[1:], sender, self.process.node)
        self.tau.record(RECEIVE, self.process.node, sender, env.payload)
        return self._emit(self.process.on_deliver(env))


def run_direct(g: Graph, protocol: ProtocolSpec, inputs: dict, scheduler: SchedulerPolicy | None = None,
               adversary: AdversaryPolicy | None = None, budget: int = DEFAULT_BUDGET):
    """Run ``protocol`` without a simulator. With the identity adversary this
    is the noiseless reference execution."""
    tau = Transcript()
    processes = spawn(g, protocol, inputs)
    autos = {v: DirectNode(p, tau) for v, p in processes.items()}
    res = run(g, autos, scheduler, adversary, budget)
    return tau, processes, res


__all__ = ["Simulation", "simulate", "run_direct", "spawn", "UNARY", "BINARY"]
