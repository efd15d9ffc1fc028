"""Content-oblivious construction of a Robbins cycle.

The construction grows a cycle ear by ear:

1. A single DFS token (one pulse at a time) leaves the root and explores
   unmarked edges. Revisited nodes bounce it back; a node that exhausts its
   edges sends it back to its parent and forgets everything. When the token
   returns to the root, the nodes still holding ``prev``/``next`` form a
   simple cycle ``C0``.
2. On a cycle, nodes talk through the Robbins simulator. A second DFS from
   the current root over unexplored edges closes an ear ``E`` at some node
   ``z``. The ear plus the shortest cycle-path ``P`` from ``z`` back to the
   root is a simple cycle; walking it once (``learn-id``) spells the new
   cycle ``C ++ E ++ P``, which the root then announces.
3. After every cycle change the root polls for nodes with unexplored edges
   and hands over to the lowest such id, or announces completion.

Pulses on edges of the current cycle go to the simulator; pulses on other
edges are DFS traffic (or, once armed, traffic of the ear's simulator).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .codec import WireCodec
from .engine import (
    DEFAULT_BUDGET, AdversaryPolicy, Automaton, RunResult, SchedulerPolicy, run,
)
from .graph import (
    BridgeError, CycleRep, Graph, find_bridges, shortest_directed_path, validate_cycle,
)
from .protocol import BROADCAST, Envelope
from .cycle_sim import BINARY, PULSE, SimError
from .robbins_sim import OccurrenceState, RobbinsSim

# builder states
INIT, DFS, DFS_ROOT, LEARN, ON_CYCLE, FINISHED = "init", "dfs", "dfs-root", "learn", "on-cycle", "finished"

# message kinds
EAR_CLOSED, READY, LEARN_IDS, DONE, NEW_CYCLE, CHECK_EDGES, REPLY, NEW_ROOT, COMPLETED = range(9)
KIND_BITS = 4


class BuildError(SimError):
    pass


class MessageCodec:
    def __init__(self, width: int):
        if width < 1:
            raise BuildError("id universe too small for the builder messages")
        self.width = width

    def encode(self, kind: int, ids=(), flag: bool | None = None) -> str:
        bits = format(kind, "b").zfill(KIND_BITS)
        if flag is not None:
            bits += "1" if flag else "0"
        return bits + "".join(format(v, "b").zfill(self.width) for v in ids)

    def decode(self, bits: str):
        kind = int(bits[:KIND_BITS], 2)
        rest = bits[KIND_BITS:]
        flag = None
        if kind == REPLY:
            flag, rest = rest[0] == "1", rest[1:]
        w = self.width
        if len(rest) % w:
            raise BuildError(f"ragged id list in message {bits!r}")
        ids = [int(rest[i:i + w], 2) for i in range(0, len(rest), w)]
        return kind, ids, flag


@dataclass
class Iteration:
    root: int
    dfs_pulses: int = 0
    arm_pulses: int = 0
    closed_at: int | None = None
    path: list = field(default_factory=list)
    cycle_before: tuple = ()
    cycle_after: tuple = ()
    visited: set = field(default_factory=set)
    reset: set = field(default_factory=set)


class BuildLog:
    """Observation-only record of the construction (shared by all nodes)."""

    def __init__(self):
        self.iterations: list[Iteration] = []
        self.violations: list[str] = []
        self.cycles: list[tuple] = []
        self.finals: dict = {}

    @property
    def current(self) -> Iteration:
        return self.iterations[-1]

    def begin(self, root, cycle):
        self.iterations.append(Iteration(root, cycle_before=tuple(cycle)))

    def visit(self, node):
        it = self.current
        if node in it.reset:
            self.violations.append(f"iteration {len(self.iterations) - 1}: node {node} got the DFS token after resetting")
        it.visited.add(node)


class _App:
    """Routes one simulator's deliveries back to the owning builder node."""

    def __init__(self, owner, which):
        self.owner = owner
        self.which = which

    def start(self):
        return []

    def deliver(self, env):
        self.owner._message(env, self.which, own=False)
        return []

    def sent(self, env):
        self.owner._message(env, self.which, own=True)
        return []


class BuilderNode(Automaton):
    def __init__(self, node, neighbors, is_root, codec: WireCodec, log: BuildLog,
                 mode=BINARY, run_limit=2):
        self.node = node
        self.nbrs = tuple(sorted(neighbors))
        self.is_root = is_root
        self.codec = codec
        self.msgs = MessageCodec(codec.width)
        self.log = log
        self.mode = mode
        self.run_limit = run_limit
        self.out: list = []

        self.state = INIT
        self.marked: set = set()
        self.prev = None
        self.next = None
        self.closed = False  # DFS root: cycle C0 closed, awaiting the arming pulse

        self.cycle: tuple = ()
        self.cycle_nbrs: frozenset = frozenset()
        self.sim_c: RobbinsSim | None = None
        self.sim_e: RobbinsSim | None = None
        self.e_prev = None
        self.e_next = None
        self.e_buffer: list = []
        self._reset_ear()
        self.replies: dict | None = None
        self.learned: list = []
        self.final: tuple | None = None

    # -- engine interface
    def start(self):
        if self.is_root:
            self.log.begin(self.node, ())
            self.log.visit(self.node)
            u = self.nbrs[0]
            self.marked.add(u)
            self.next = u
            self.state = DFS_ROOT
            self._dfs_send(u)
        return self._flush()

    def receive(self, sender, payload):
        if self.sim_e is not None and sender in (self.e_prev, self.e_next):
            self.sim_e.feed(sender)
        elif self.sim_c is not None and sender in self.cycle_nbrs:
            self.sim_c.feed(sender)
        else:
            self._raw(sender)
        return self._flush()

    def _flush(self):
        out = self.out[:]
        self.out.clear()
        return out

    # -- raw pulses
    def _dfs_send(self, u):
        self.out.append((u, PULSE))
        self.log.current.dfs_pulses += 1

    def _arm_send(self, u):
        self.out.append((u, PULSE))
        self.log.current.arm_pulses += 1

    def _lowest_unmarked(self, exclude=None):
        for u in self.nbrs:
            if u not in self.marked and u != exclude:
                return u
        return None

    def _raw(self, w):
        s = self.state
        if s == INIT:
            self.log.visit(self.node)
            self.prev = w
            self.marked.add(w)
            u = self._lowest_unmarked(exclude=w)
            if u is None:
                raise BuildError(f"node {self.node} reached through its only edge: bridge")
            self.marked.add(u)
            self.next = u
            self.state = DFS
            self._dfs_send(u)
        elif s == DFS:
            if w == self.next:
                u = self._lowest_unmarked()
                if u is not None:
                    self.marked.add(u)
                    self.next = u
                    self._dfs_send(u)
                else:
                    self._dfs_send(self.prev)
                    self.state = INIT
                    self.prev = self.next = None
                    self.marked.clear()
                    self.log.current.reset.add(self.node)
            elif w != self.prev:
                self.marked.add(w)
                self._dfs_send(w)
            else:
                # second pulse along the closed path: arm and join learn-id
                self._arm_send(self.next)
                self._open_ear_sim(self.prev, self.next, holder=False)
                self.state = LEARN
        elif s == DFS_ROOT:
            if not self.closed:
                if w == self.next:
                    raise BuildError("DFS token cancelled back to the root")
                self.prev = w
                self.closed = True
                self._arm_send(self.next)
            elif w == self.prev:
                self._open_ear_sim(self.prev, self.next, holder=True)
                self.state = LEARN
                self._learn_start()
            else:
                raise BuildError(f"root got an unexpected pulse from {w}")
        elif s == ON_CYCLE:
            self._raw_on_cycle(w)
        else:
            raise BuildError(f"node {self.node} in state {s} got a stray pulse from {w}")

    def _raw_on_cycle(self, w):
        if w == self.ear_out:
            self.e_buffer.append(w)
        elif w == self.ear_in:
            if not self.armed:
                self.armed = True
                self._maybe_ready()
            else:
                self.e_buffer.append(w)
        elif self.ear_in is None:
            # the DFS token closed an ear here
            self.ear_in = w
            self.e_prev = w
            self.log.current.closed_at = self.node
            self._broadcast(self.sim_c, EAR_CLOSED, [self.node])
        else:
            raise BuildError(f"node {self.node} got a second ear closure from {w}")

    # -- simulators
    def _new_sim(self, occ, holder, positions, which):
        return RobbinsSim(self.node, occ, _App(self, which), self.codec, self.mode, self.run_limit,
                          token=holder, out=self.out, positions=positions)

    def _open_ear_sim(self, prev, nxt, holder):
        self.e_prev, self.e_next = prev, nxt
        self.sim_e = self._new_sim(OccurrenceState([prev], [nxt]), holder, None, "ear")
        self.sim_e.begin()
        pending, self.e_buffer = self.e_buffer, []
        for w in pending:
            self.sim_e.feed(w)

    def _close_ear_sim(self):
        sim = self.sim_e
        if sim is not None and (sim.inbox or sim.Q):
            raise BuildError(f"node {self.node} left the ear cycle with pulses pending")
        self.sim_e = None
        self.e_prev = self.e_next = None

    def _adopt(self, cycle, holder):
        """Switch to a new cycle; ``holder`` for the root, whose first
        occurrence starts with the token."""
        self.cycle = tuple(cycle)
        rep = CycleRep.from_global(self.cycle)
        view = rep.local[self.node]
        self.cycle_nbrs = frozenset(view.prev) | frozenset(view.next)
        self.sim_c = self._new_sim(OccurrenceState(list(view.prev), list(view.next)), holder,
                                   view.positions, "cycle")
        self.sim_c.begin()
        self.state = ON_CYCLE
        self.prev = self.next = None
        self.marked.clear()
        self.closed = False
        self._reset_ear()
        if holder:
            self.log.cycles.append(self.cycle)

    def _reset_ear(self):
        self.ear_out = None
        self.ear_in = None
        self.armed = False
        self.ear_known = False
        self.e_prev = self.e_next = None
        self.e_buffer = []

    def _broadcast(self, sim, kind, ids=(), flag=None):
        sim.enqueue(Envelope(self.msgs.encode(kind, ids, flag), self.node, BROADCAST))

    # -- learn-id: walk the ear cycle once collecting ids
    def _learn_start(self):
        self.sim_e.enqueue(Envelope(self.msgs.encode(LEARN_IDS, [self.node]), self.node, self.e_next))

    # -- protocol messages (delivered, or own broadcast completed)
    def _message(self, env, which, own):
        kind, ids, flag = self.msgs.decode(env.payload)
        if own and kind == LEARN_IDS:
            return
        handler = _HANDLERS[kind]
        handler(self, ids, flag, which, own)

    def _on_learn(self, ids, flag, which, own):
        if ids[0] != self.node:
            self.sim_e.enqueue(Envelope(self.msgs.encode(LEARN_IDS, ids + [self.node]), self.node, self.e_next))
            return
        self.learned = ids
        self._broadcast(self.sim_e, DONE, list(self.cycle) + ids)

    def _on_done(self, ids, flag, which, own):
        if own:
            self._close_ear_sim()
            if not self.cycle:
                self._adopt(ids, holder=True)
                self._start_poll()
            else:
                self._broadcast(self.sim_c, NEW_CYCLE, self.learned)
            return
        self._close_ear_sim()
        if self.sim_c is None:
            self._adopt(ids, holder=False)

    def _on_new_cycle(self, ids, flag, which, own):
        new = list(self.cycle) + ids
        if own:
            it = self.log.current
            it.cycle_after = tuple(new)
            self._adopt(new, holder=True)
            self._start_poll()
        else:
            self._adopt(new, holder=False)

    def _start_poll(self):
        self.replies = {}
        self._broadcast(self.sim_c, CHECK_EDGES)

    def _has_unexplored(self):
        return any(u not in self.cycle_nbrs for u in self.nbrs)

    def _on_check(self, ids, flag, which, own):
        self._broadcast(self.sim_c, REPLY, [self.node], self._has_unexplored())

    def _on_reply(self, ids, flag, which, own):
        if self.replies is None:
            return
        self.replies[ids[0]] = flag
        if len(self.replies) < len(set(self.cycle)):
            return
        candidates = sorted(v for v, has in self.replies.items() if has)
        self.replies = None
        if candidates:
            self._broadcast(self.sim_c, NEW_ROOT, [candidates[0]])
        else:
            self._broadcast(self.sim_c, COMPLETED)

    def _on_new_root(self, ids, flag, which, own):
        u = ids[0]
        i = self.cycle.index(u)
        self.cycle = self.cycle[i:] + self.cycle[:i]
        if u == self.node:
            self.log.begin(u, self.cycle)
            self.log.visit(u)
            target = next(v for v in self.nbrs if v not in self.cycle_nbrs)
            self.ear_out = target
            self.e_next = target
            self._dfs_send(target)

    def _on_completed(self, ids, flag, which, own):
        self.final = self.cycle
        self.log.finals[self.node] = self.cycle
        self.state = FINISHED

    def _on_ear_closed(self, ids, flag, which, own):
        z = ids[0]
        root = self.cycle[0]
        path = shortest_directed_path(self.cycle, z, root)
        for a, b in zip(path, path[1:]):
            if a == self.node:
                self.e_next = b
            if b == self.node:
                self.e_prev = a
        if self.node == root:
            self.log.current.path = path
        self.ear_known = True
        if self.node == root:
            self._arm_send(self.ear_out)
        if self.node == z:
            self._maybe_ready()

    def _maybe_ready(self):
        if self.ear_known and self.armed and self.ear_in is not None:
            self._broadcast(self.sim_c, READY)

    def _on_ready(self, ids, flag, which, own):
        if self.e_prev is None or self.e_next is None:
            return
        holder = self.node == self.cycle[0]
        self._open_ear_sim(self.e_prev, self.e_next, holder)
        if holder:
            self._learn_start()


_HANDLERS = {
    EAR_CLOSED: BuilderNode._on_ear_closed,
    READY: BuilderNode._on_ready,
    LEARN_IDS: BuilderNode._on_learn,
    DONE: BuilderNode._on_done,
    NEW_CYCLE: BuilderNode._on_new_cycle,
    CHECK_EDGES: BuilderNode._on_check,
    REPLY: BuilderNode._on_reply,
    NEW_ROOT: BuilderNode._on_new_root,
    COMPLETED: BuilderNode._on_completed,
}


@dataclass
class BuildResult:
    cycle: CycleRep | None
    pulses: int
    halt: str
    log: BuildLog
    fault: dict | None = None
    run: RunResult | None = None

    @property
    def iterations(self) -> list[Iteration]:
        return self.log.iterations

    def metrics(self) -> dict:
        return {
            "pulses": self.pulses,
            "halt": self.halt,
            "length": len(self.cycle) if self.cycle else None,
            "iterations": len(self.log.iterations),
            "dfs_pulses": [it.dfs_pulses for it in self.log.iterations],
            "arm_pulses": [it.arm_pulses for it in self.log.iterations],
            "cycle_lengths": [len(c) for c in self.log.cycles],
            "violations": list(self.log.violations),
        }


def build_robbins(g: Graph, scheduler: SchedulerPolicy | None = None,
                  adversary: AdversaryPolicy | None = None, budget: int = DEFAULT_BUDGET,
                  mode=BINARY, run_limit=2, enforce_oblivious=False, record=False) -> BuildResult:
    """Run the distributed construction on ``g`` under noise; returns the
    final cycle (rooted at the graph root's first occurrence)."""
    bridges = find_bridges(g)
    if bridges:
        raise BridgeError(bridges)
    codec = WireCodec(max(g.nodes) + 1)
    log = BuildLog()
    autos = {v: BuilderNode(v, g.neighbors(v), v == g.root, codec, log, mode, run_limit) for v in g.nodes}
    res = run(g, autos, scheduler, adversary, budget, record=record, enforce_oblivious=enforce_oblivious)
    cycle = None
    if res.quiescent:
        finals = {v: a.final for v, a in autos.items()}
        if any(f is None for f in finals.values()):
            stuck = sorted(v for v, f in finals.items() if f is None)
            res.fault = {"error": f"nodes never finished: {stuck}"}
            res.halt = "automaton-fault"
        elif len({CycleRep.from_global(f).rotated_to(g.root).global_ for f in finals.values()}) != 1:
            res.fault = {"error": "nodes disagree on the final cycle"}
            res.halt = "automaton-fault"
        else:
            cycle = CycleRep.from_global(finals[g.root]).rotated_to(g.root)
    return BuildResult(cycle, res.deliveries, res.halt, log, res.fault, res)


def check_build(g: Graph, result: BuildResult) -> list[str]:
    """Invariant checks over a finished construction; returns violations."""
    problems = list(result.log.violations)
    if result.cycle is None:
        return problems + [f"construction halted: {result.halt} {result.fault}"]
    report = validate_cycle(g, result.cycle)
    if not report.robbins:
        problems += report.failures
    prev_edges = set()
    for i, c in enumerate(result.log.cycles):
        rep = CycleRep.from_global(c)
        r = validate_cycle(g, rep)
        if not (r.consistent and r.edges_exist and r.single_orientation):
            problems.append(f"intermediate cycle {i} invalid: {r.failures}")
        edges = rep.undirected_edges()
        if i and not prev_edges < edges:
            problems.append(f"cycle {i} does not strictly extend cycle {i - 1}")
        prev_edges = edges
    if len(result.log.cycles) > len(g.edges):
        problems.append("more iterations than edges")
    limit = g.n ** 2
    for i, it in enumerate(result.log.iterations):
        if it.dfs_pulses > limit:
            problems.append(f"iteration {i}: {it.dfs_pulses} DFS pulses exceeds n^2 = {limit}")
    return problems
