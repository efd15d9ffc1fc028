"""Checks that a noisy run really simulated the protocol.

``verify_tau`` replays the derived transcript as a noiseless schedule.
The epoch helpers check the token/epoch invariants from the recorder.
``bridge_demo`` pits naive two-party protocols against an adversary that
rewrites every payload to ``"1"``.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field

from .codec import frame_bound
from .cycle_sim import UNARY
from .engine import AdversaryPolicy, Automaton, SchedulerPolicy, run
from .graph import Graph
from .protocol import BROADCAST, RECEIVE, SEND, Envelope, ProtocolSpec, Transcript
from .trace import Recorder


@dataclass
class Verdict:
    valid: bool
    index: int | None = None
    reason: str = ""
    replay_outputs: dict = field(default_factory=dict)
    quiescent: bool = True

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "index": self.index,
            "reason": self.reason,
            "replay_outputs": {str(k): v for k, v in sorted(self.replay_outputs.items())},
            "quiescent": self.quiescent,
        }


def derive_tau(sim) -> Transcript:
    """The transcript recorded by a simulator run (SEND at enqueue,
    RECEIVE at delivery)."""
    rec = sim.recorder if hasattr(sim, "recorder") else sim
    return rec.tau


def verify_tau(g: Graph, protocol: ProtocolSpec, inputs: dict, tau: Transcript,
               outputs: dict | None = None, require_quiescence: bool = True) -> Verdict:
    procs = {v: protocol.make(v, g.neighbors(v), g.root, inputs.get(v)) for v in g.nodes}
    pending = {v: deque(p.init()) for v, p in procs.items()}
    in_flight: Counter = Counter()

    def fail(i, why):
        return Verdict(False, i, why, {v: p.result() for v, p in procs.items()})

    for ev in tau:
        i = ev.index
        if ev.node not in procs:
            return fail(i, f"unknown node {ev.node}")
        if ev.kind == SEND:
            if not pending[ev.node]:
                return fail(i, f"node {ev.node} sends but its protocol has nothing to send")
            env = pending[ev.node].popleft()
            if (env.dest, env.payload) != (ev.peer, ev.payload):
                return fail(i, f"node {ev.node} sends {ev.payload!r} to {ev.peer}, protocol says {env.payload!r} to {env.dest}")
            if env.dest == BROADCAST:
                for r in g.nodes:
                    if r != ev.node:
                        in_flight[(ev.node, r, ev.payload, True)] += 1
            else:
                if not g.has_edge(ev.node, env.dest):
                    return fail(i, f"{ev.node} -> {env.dest} is not a link")
                in_flight[(ev.node, env.dest, ev.payload, False)] += 1
        elif ev.kind == RECEIVE:
            for bcast in (False, True):
                key = (ev.peer, ev.node, ev.payload, bcast)
                if in_flight[key] > 0:
                    in_flight[key] -= 1
                    break
            else:
                return fail(i, f"node {ev.node} receives {ev.payload!r} from {ev.peer} that is not in flight")
            dest = BROADCAST if bcast else ev.node
            pending[ev.node].extend(procs[ev.node].on_deliver(Envelope(ev.payload, ev.peer, dest)))
        else:
            return fail(i, f"unknown event kind {ev.kind!r}")

    end = len(tau)
    leftover = sorted(v for v, q in pending.items() if q)
    if leftover:
        return fail(end, f"protocol emissions never sent at nodes {leftover}")
    flying = sum(in_flight.values())
    replay = {v: p.result() for v, p in procs.items()}
    if require_quiescence and flying:
        return Verdict(False, end, f"{flying} messages still in flight", replay, False)
    if outputs is not None:
        for v in sorted(procs):
            if replay[v] != outputs.get(v):
                return Verdict(False, end, f"output of {v}: run {outputs.get(v)!r}, replay {replay[v]!r}", replay)
    return Verdict(True, None, "", replay, flying == 0)


def fifo_violations(tau: Transcript) -> list[int]:
    """Indices of RECEIVEs that overtake an earlier SEND on the same ordered pair."""
    queues = defaultdict(deque)
    bad = []
    for ev in tau:
        if ev.kind == SEND and ev.peer != BROADCAST:
            queues[(ev.node, ev.peer)].append(ev.payload)
        elif ev.kind == SEND:
            continue
        else:
            q = queues.get((ev.peer, ev.node))
            if q and q[0] == ev.payload:
                q.popleft()
            elif q and ev.payload in q:
                bad.append(ev.index)
                q.remove(ev.payload)
    return bad


# --- epochs ----------------------------------------------------------------


@dataclass
class EpochTrace:
    k: int
    holder: int
    occurrence: int
    start: int  # s_k
    end: int  # t_k
    envelope: Envelope
    encoded: object
    strings: dict  # (node, occurrence) -> direction string of this epoch
    token_waits: dict  # (node, occurrence) -> number of TOKEN pulses (0 or 1)

    @property
    def pulses(self) -> int:
        return sum(len(s) for s in self.strings.values())


def extract_epochs(rec: Recorder) -> list[EpochTrace]:
    ends = defaultdict(dict)
    for e in rec.epoch_ends:
        ends[e.node][e.epoch] = e
    out = []
    for k, dq in enumerate(rec.dequeues, start=1):
        holder_end = ends[dq.node].get(k)
        strings = {}
        waits = {}
        for node, occs in rec.occurrences.items():
            prev_mark = ends[node].get(k - 1)
            cur_mark = ends[node].get(k)
            for occ in occs:
                full = rec.directions[(node, occ)]
                lo = prev_mark.marks.get(occ, 0) if prev_mark else 0
                hi = cur_mark.marks[occ] if cur_mark else len(full)
                s = "".join(full[lo:hi])
                strings[(node, occ)] = s
                waits[(node, occ)] = 1 if s.startswith("10") and _body(rec, dq.encoded) != s[1:] else 0
        out.append(EpochTrace(k, dq.node, dq.occurrence, dq.t, holder_end.t if holder_end else -1,
                              dq.envelope, dq.encoded, strings, waits))
    return out


def _body(rec, encoded):
    return "1" * encoded + "0" if rec.mode == UNARY else encoded


@dataclass
class LemmaReport:
    epochs: int
    messages: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_lemma_properties(sim, epochs: list[EpochTrace] | None = None) -> LemmaReport:
    """Progress, single token holder and global consistency of the
    per-epoch direction strings."""
    rec: Recorder = sim.recorder
    epochs = extract_epochs(rec) if epochs is None else epochs
    messages = len(rec.tau.sends())
    report = LemmaReport(len(epochs), messages)
    v = report.violations

    # progress
    if sim.result.quiescent:
        if len(epochs) != messages:
            v.append(f"progress: {len(epochs)} epochs for {messages} messages")
        counts = Counter(e.node for e in rec.epoch_ends)
        for node in rec.occurrences:
            if counts[node] != len(epochs):
                v.append(f"progress: node {node} completed {counts[node]} of {len(epochs)} epochs")
        for node, auto in sim.automata.items():
            if getattr(auto, "inbox", None):
                v.append(f"node {node} ends with unconsumed pulses {auto.inbox}")
    else:
        v.append(f"run did not reach quiescence: {sim.result.halt}")

    # single token holder
    holding = {rec.initial_holder[0]} if rec.initial_holder else set()
    for h in rec.holders:
        if h.holding:
            if holding:
                v.append(f"token: node {h.node} takes the token at {h.t} while {sorted(holding)} hold it")
            holding.add(h.node)
        else:
            if h.node not in holding:
                v.append(f"token: node {h.node} releases a token it does not hold at {h.t}")
            holding.discard(h.node)
    last_t = 0
    for ep in epochs:
        if not last_t < ep.start < ep.end:
            v.append(f"epoch {ep.k}: ordering t_(k-1)={last_t}, s_k={ep.start}, t_k={ep.end}")
        last_t = ep.end

    # global consistency
    for ep in epochs:
        body = re.escape(_body(rec, ep.encoded))
        pattern = re.compile(f"10?{body}")
        for key, s in ep.strings.items():
            if not pattern.fullmatch(s):
                v.append(f"epoch {ep.k}: occurrence {key} sent {s!r}")
    return report


def starvation_violations(sim, bound: int | None = None) -> list[str]:
    """A node asking for the token after completing ``e`` epochs must hold
    it by epoch ``e + bound`` (default: cycle length, i.e. at most
    ``bound - 1`` other epochs in between)."""
    rec = sim.recorder
    bound = len(sim.cycle) if bound is None else bound
    held = defaultdict(list)
    for k, dq in enumerate(rec.dequeues, start=1):
        held[dq.node].append(k)
    bad = []
    for w in rec.waiting:
        later = [k for k in held[w.node] if k > w.completed]
        if not later:
            bad.append(f"node {w.node} waited after epoch {w.completed} and never held the token")
        elif later[0] - w.completed > bound:
            bad.append(f"node {w.node} waited after epoch {w.completed}, held at epoch {later[0]}")
    return bad


def pulse_metrics(sim) -> dict:
    rec = sim.recorder
    epochs = extract_epochs(rec)
    per_message = []
    for ep in epochs:
        wire_len = len(_wire_bits(sim, ep.envelope))
        entry = {
            "epoch": ep.k,
            "holder": ep.holder,
            "wire_bits": wire_len,
            "pulses": ep.pulses,
        }
        if rec.mode == UNARY:
            entry["d"] = ep.encoded
            # every direction string is 1 0? 1^d 0: one request pulse, then d data pulses
            entry["data_pulses"] = sum(max(st.count("1") - 1, 0) for st in ep.strings.values())
        else:
            entry["frame_bits"] = len(ep.encoded)
            entry["budget"] = len(ep.strings) * (len(ep.encoded) + 3)
            entry["frame_bound"] = frame_bound(wire_len, rec.run_limit)
        per_message.append(entry)
    total = sim.result.deliveries if sim.result else 0
    return {"total_pulses": total, "messages": len(epochs), "per_message": per_message}


def _wire_bits(sim, env):
    from .codec import WireCodec

    return WireCodec(max(sim.graph.nodes) + 1).encode(env)


# --- bridge demonstration --------------------------------------------------


class XorContent(Automaton):
    """Sends its bit as the payload; outputs own XOR the first payload bit received."""

    def __init__(self, x: int):
        self.x = x
        self.output = None

    def start(self):
        return [(self.peer, str(self.x))]

    def receive(self, sender, payload):
        if self.output is None:
            self.output = self.x ^ int(payload[0])
        return []


class XorCount(Automaton):
    """Sends ``x + 1`` pulses (so the peer always hears something); on the
    first pulse received outputs own input XOR the parity of the pulses
    beyond the first seen so far."""

    def __init__(self, x: int):
        self.x = x
        self.output = None
        self.count = 0

    def start(self):
        return [(self.peer, "1")] * (self.x + 1)

    def receive(self, sender, payload):
        self.count += 1
        if self.output is None:
            self.output = (self.x + self.count - 1) % 2
        return []


class Silent(Automaton):
    """Never outputs: echoes every pulse forever."""

    def __init__(self, x: int):
        self.x = x
        self.output = None

    def start(self):
        return [(self.peer, "1")]

    def receive(self, sender, payload):
        return [(sender, "1")]


CANDIDATES = {"xor-count": XorCount, "xor-content": XorContent, "silent": Silent}


@dataclass
class BridgeOutcome:
    function: dict
    candidate: str
    runs: list
    refuted: bool

    def to_dict(self) -> dict:
        return {"candidate": self.candidate, "refuted": self.refuted, "runs": self.runs,
                "function": {f"{x},{y}": v for (x, y), v in sorted(self.function.items())}}


def _paired_inputs(table: dict):
    xs = sorted({x for x, _ in table})
    ys = sorted({y for _, y in table})
    for y in ys:
        for x in xs:
            for x2 in xs:
                if x < x2 and (x, y) in table and (x2, y) in table and table[(x, y)] != table[(x2, y)]:
                    return [(x, y), (x2, y)]
    for x in xs:
        for y in ys:
            for y2 in ys:
                if y < y2 and (x, y) in table and (x, y2) in table and table[(x, y)] != table[(x, y2)]:
                    return [(x, y), (x, y2)]
    return None


XOR = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0}


def bridge_demo(table: dict | None = None, candidate: str = "xor-count",
                adversary: AdversaryPolicy | None = None, budget: int = 10_000,
                scheduler: SchedulerPolicy | None = None) -> BridgeOutcome:
    """Run ``candidate`` on a single edge for a pair of inputs on which the
    function differs; the candidate is refuted if some run ends with a
    wrong output or no output."""
    table = dict(XOR if table is None else table)
    if len(set(table.values())) < 2:
        raise ValueError("function is constant; nothing to demonstrate")
    pair = _paired_inputs(table)
    if pair is None:
        raise ValueError("no pair of inputs differing in one party separates the function")
    factory = CANDIDATES[candidate]
    adversary = adversary or AdversaryPolicy.ones()
    g = Graph([0, 1], [(0, 1)], root=0)
    runs = []
    for x, y in pair:
        alice, bob = factory(x), factory(y)
        alice.peer, bob.peer = 1, 0
        res = run(g, {0: alice, 1: bob}, scheduler, adversary, budget, record=False)
        want = table[(x, y)]
        outs = [alice.output, bob.output]
        if any(o is None for o in outs):
            verdict = "no-output"
        elif any(o != want for o in outs):
            verdict = "wrong-output"
        else:
            verdict = "correct"
        runs.append({"inputs": [x, y], "expected": want, "outputs": outs, "halt": res.halt, "verdict": verdict})
    refuted = any(r["verdict"] != "correct" for r in runs)
    return BridgeOutcome(table, candidate, runs, refuted)
