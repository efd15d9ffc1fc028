"""Deterministic discrete-event simulator for fully-defective networks.

Every pulse in flight is rewritten by an adversary before delivery, but no
pulse is lost, duplicated or invented. A scheduler decides which in-flight
pulse is delivered next.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from . import _kernels
from ._pure import BUDGET, FAULT, FIFO, LIFO, QUIET, RANDOM
from .graph import Graph

DEFAULT_BUDGET = 10_000_000

HALT_QUIESCENCE = "quiescence"
HALT_BUDGET = "budget-exhausted"
HALT_FAULT = "automaton-fault"
_HALTS = {QUIET: HALT_QUIESCENCE, BUDGET: HALT_BUDGET, FAULT: HALT_FAULT}


class PulseEvent(NamedTuple):
    send_seq: int
    sender: int
    receiver: int
    sent_payload: str
    delivered_payload: str
    deliver_index: int
    send_index: int

    @property
    def edge(self) -> tuple[int, int]:
        return (self.sender, self.receiver)


class Automaton:
    """Event automaton run by the engine.

    ``start`` runs once before any delivery; ``receive`` runs once per
    delivered pulse. Both return ``(neighbour, payload)`` pairs to send.
    """

    def start(self) -> list:
        return []

    def receive(self, sender: int, payload: str) -> list:
        return []


class Clock:
    """Index of the delivery currently being handled (0 during start-up)."""

    __slots__ = ("t",)

    def __init__(self):
        self.t = 0


# --- policies --------------------------------------------------------------


@dataclass(frozen=True)
class SchedulerPolicy:
    kind: str = "fifo"
    seed: int = 0
    script: tuple = ()
    spread: float = 16.0

    KINDS = ("fifo", "random", "lifo", "replay")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown scheduler {self.kind!r}")

    @classmethod
    def fifo(cls):
        return cls("fifo")

    @classmethod
    def lifo(cls):
        return cls("lifo")

    @classmethod
    def random_delay(cls, seed: int, spread: float = 16.0):
        return cls("random", seed, spread=spread)

    @classmethod
    def replay(cls, script: Sequence[tuple[int, int]]):
        """Deliver the oldest pulse on each scripted link in turn; when the
        scripted link is idle or the script runs out, deliver the oldest pulse."""
        return cls("replay", script=tuple(tuple(x) for x in script))


@dataclass(frozen=True)
class AdversaryPolicy:
    kind: str = "identity"
    seed: int = 0
    bit: str = "1"

    KINDS = ("identity", "randomize", "constant", "flip-all")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown adversary {self.kind!r}")
        if self.kind == "constant" and (not self.bit or self.bit.strip("01")):
            raise ValueError("constant adversary needs a non-empty bitstring")

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def randomize(cls, seed: int):
        return cls("randomize", seed)

    @classmethod
    def ones(cls):
        return cls("constant", bit="1")

    @classmethod
    def flip_all(cls):
        return cls("flip-all")

    def rewriter(self) -> Callable[[str], str] | None:
        if self.kind == "identity":
            return None
        if self.kind == "constant":
            bit = self.bit
            return lambda payload: bit
        if self.kind == "flip-all":
            table = str.maketrans("01", "10")
            return lambda payload: payload.translate(table)
        rng = random.Random(self.seed)

        def scramble(payload: str) -> str:
            size = rng.randint(1, max(8, 2 * len(payload)))
            return format(rng.getrandbits(size), "b").zfill(size)

        return scramble


def scheduler_from_name(name: str, seed: int = 0) -> SchedulerPolicy:
    if name == "random":
        return SchedulerPolicy.random_delay(seed)
    return SchedulerPolicy(name, seed)


def adversary_from_name(name: str, seed: int = 0) -> AdversaryPolicy:
    if name == "ones":
        return AdversaryPolicy.ones()
    return AdversaryPolicy(name, seed)


# --- run -------------------------------------------------------------------


@dataclass
class RunResult:
    halt: str
    events: list | None
    automata: dict
    deliveries: int
    sends: int
    in_flight: int
    fault: dict | None = None

    @property
    def quiescent(self) -> bool:
        return self.halt == HALT_QUIESCENCE

    def trace(self) -> list[tuple[tuple[int, int], int]]:
        """Delivery-ordered ``(edge, send_seq)`` pairs."""
        return [((e.sender, e.receiver), e.send_seq) for e in self.events or ()]

    def export_lines(self) -> list[str]:
        """One JSON line per delivered pulse."""
        return [
            json.dumps(
                {
                    "send_seq": e.send_seq,
                    "edge": [e.sender, e.receiver],
                    "sent_len": len(e.sent_payload),
                    "delivered_len": len(e.delivered_payload),
                    "deliver": e.deliver_index,
                },
                sort_keys=True,
            )
            for e in self.events or ()
        ]


_ORDERS = {"fifo": FIFO, "lifo": LIFO, "random": RANDOM}


def run(
    g: Graph,
    automata: dict,
    scheduler: SchedulerPolicy | None = None,
    adversary: AdversaryPolicy | None = None,
    budget: int = DEFAULT_BUDGET,
    record: bool = True,
    clock: Clock | None = None,
    enforce_oblivious: bool = False,
    kernels=None,
) -> RunResult:
    """Start every automaton, then deliver pulses until none are in flight
    or ``budget`` deliveries have happened.

    With ``enforce_oblivious`` every delivered payload is randomized no
    matter which adversary was requested.
    """
    missing = set(g.nodes) - set(automata)
    if missing:
        raise ValueError(f"no automaton for nodes {sorted(missing)}")
    scheduler = scheduler or SchedulerPolicy.fifo()
    adversary = adversary or AdversaryPolicy.identity()
    if enforce_oblivious and adversary.kind != "randomize":
        adversary = AdversaryPolicy.randomize(adversary.seed)
    k = kernels or _kernels
    clock = clock or Clock()
    clock.t = 0
    adj = {v: frozenset(g.adj[v]) for v in g.nodes}
    rewrite = adversary.rewriter()
    rng = random.Random(scheduler.seed)
    events = [] if record else None
    heap: list = []
    order = _ORDERS.get(scheduler.kind, FIFO)
    seq = 0
    fault = None

    for v in g.nodes:
        try:
            out = automata[v].start()
        except Exception as exc:
            fault = {"node": v, "event": "start", "error": repr(exc)}
            return RunResult(HALT_FAULT, events, automata, 0, seq, len(heap), fault)
        if out:
            nseq = k.push_all(heap, out, adj[v], v, order, rng, scheduler.spread, seq, 0)
            if nseq < 0:
                fault = {"node": v, "event": "start", "error": f"bad emission {out!r}"}
                return RunResult(HALT_FAULT, events, automata, 0, seq, len(heap), fault)
            seq = nseq

    if scheduler.kind == "replay":
        code, seq, step, info = _drive_replay(heap, automata, adj, clock, scheduler.script, rewrite, budget, events, seq)
    else:
        code, seq, step, info = k.drive(heap, automata, adj, clock, order, rng, scheduler.spread, rewrite,
                                        budget, events, PulseEvent, seq, 0)
    if info is not None:
        node, sender, exc = info
        fault = {"node": node, "event": step, "sender": sender, "error": repr(exc)}
    return RunResult(_HALTS[code], events, automata, step, seq, len(heap), fault)


def _drive_replay(heap, automata, adj, clock, script, rewrite, budget, events, seq):
    # heap entries are (seq, seq, sender, receiver, payload, sent_at) in FIFO order
    pending = sorted(heap)
    heap.clear()
    step = 0
    cursor = 0
    while pending:
        if step >= budget:
            heap.extend(pending)
            return BUDGET, seq, step, None
        pick = 0
        if cursor < len(script):
            link = script[cursor]
            cursor += 1
            for i, entry in enumerate(pending):
                if (entry[2], entry[3]) == link:
                    pick = i
                    break
        _, sseq, sender, receiver, payload, sent_at = pending.pop(pick)
        step += 1
        delivered = payload if rewrite is None else rewrite(payload)
        clock.t = step
        if events is not None:
            events.append(PulseEvent(sseq, sender, receiver, payload, delivered, step, sent_at))
        try:
            out = automata[receiver].receive(sender, delivered)
        except Exception as exc:
            heap.extend(pending)
            return FAULT, seq, step, (receiver, sender, exc)
        for dest, p in out or ():
            if dest not in adj[receiver] or not p:
                heap.extend(pending)
                return FAULT, seq, step, (receiver, sender, ValueError(f"bad emission {out!r}"))
            seq += 1
            pending.append((seq, seq, receiver, dest, p, step))
    return QUIET, seq, step, None


class Scripted(Automaton):
    """Automaton from plain callables; handy for small experiments and tests."""

    def __init__(self, on_start=None, on_receive=None):
        self._on_start = on_start
        self._on_receive = on_receive

    def start(self):
        return list(self._on_start()) if self._on_start else []

    def receive(self, sender, payload):
        return list(self._on_receive(sender, payload)) if self._on_receive else []
