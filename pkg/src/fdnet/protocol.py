"""The simulated protocol interface, envelopes, transcripts and built-ins."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

BROADCAST = -1  # destination marker; never a valid node id

SEND = "SEND"
RECEIVE = "RECEIVE"


class Envelope(NamedTuple):
    payload: str
    source: int
    dest: int

    @property
    def is_broadcast(self) -> bool:
        return self.dest == BROADCAST


class ProtocolError(RuntimeError):
    pass


class Process:
    """One node's instance of a deterministic protocol.

    Subclasses implement ``init`` and ``on_deliver``; both return the
    envelopes to send, in order. ``decide`` writes the output register,
    which can be written only once.
    """

    def __init__(self, node: int, neighbors: Iterable[int], root: int, value=None, **params):
        self.node = node
        self.neighbors = tuple(sorted(neighbors))
        self.root = root
        self.value = value
        self.params = params
        self._output = None
        self._decided = False

    def init(self) -> list[Envelope]:
        return []

    def on_deliver(self, env: Envelope) -> list[Envelope]:
        return []

    def decide(self, value) -> None:
        if self._decided and value != self._output:
            raise ProtocolError(f"node {self.node} rewrote its output {self._output!r} -> {value!r}")
        self._output = value
        self._decided = True

    @property
    def output(self):
        return self._output

    @property
    def decided(self) -> bool:
        return self._decided

    def result(self):
        """Final answer reported for the run (the output register by default)."""
        return self._output

    def send(self, dest: int, payload: str) -> Envelope:
        return Envelope(payload, self.node, dest)


def int_bits(v: int) -> str:
    if v < 0:
        raise ProtocolError("built-in protocols carry non-negative integers")
    return format(v, "b")


def parse_input(v) -> int:
    """Inputs are integers or bitstrings; bitstrings are read in base 2."""
    if v is None:
        return 0
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, int):
        return v
    s = str(v)
    if s == "":
        return 0
    if s.strip("01"):
        raise ProtocolError(f"input {v!r} is neither an integer nor a bitstring")
    return int(s, 2)


class FloodMax(Process):
    """Floods the largest value seen; re-floods whenever it improves.

    The result is the largest value known when the run goes quiet.
    """

    def init(self):
        self.best = parse_input(self.value)
        return [self.send(v, int_bits(self.best)) for v in self.neighbors]

    def on_deliver(self, env):
        got = int(env.payload, 2) if env.payload else 0
        if got <= self.best:
            return []
        self.best = got
        return [self.send(v, env.payload) for v in self.neighbors]

    def result(self):
        return self.best


class PairwiseSum(Process):
    def init(self):
        self.own = parse_input(self.value)
        self.total = self.own
        self.heard = 0
        if not self.neighbors:
            self.decide(self.own)
        return [self.send(v, int_bits(self.own)) for v in self.neighbors]

    def on_deliver(self, env):
        self.total += int(env.payload, 2) if env.payload else 0
        self.heard += 1
        if self.heard == len(self.neighbors):
            self.decide(self.total)
        return []


class PingPong(Process):
    """The root and its lowest-ID neighbour exchange ``k + 1`` messages
    carrying a counter; both ends output ``k``."""

    def init(self):
        self.rounds = int(self.params.get("k", 0))
        if self.node != self.root or not self.neighbors:
            return []
        if self.rounds == 0:
            self.decide(0)
        return [self.send(self.neighbors[0], int_bits(0))]

    def on_deliver(self, env):
        c = int(env.payload, 2) if env.payload else 0
        if c >= self.rounds:
            self.decide(self.rounds)
            return []
        if c + 1 == self.rounds:
            self.decide(self.rounds)
        return [self.send(env.source, int_bits(c + 1))]


class CounterRing(Process):
    """A counter travels once around a ring; each node outputs its hop
    distance from the root and the root outputs the ring size. Off a ring,
    a node reached a second time absorbs the counter."""

    def init(self):
        if self.node != self.root or not self.neighbors:
            return []
        return [self.send(self.neighbors[0], int_bits(1))]

    def on_deliver(self, env):
        c = int(env.payload, 2) if env.payload else 0
        if self.decided:
            return []
        self.decide(c)
        if self.node == self.root:
            return []
        onward = [v for v in self.neighbors if v != env.source]
        target = onward[0] if onward else env.source
        return [self.send(target, int_bits(c + 1))]


@dataclass(frozen=True)
class ProtocolSpec:
    """A named protocol plus parameters; ``make`` spawns one node's instance."""

    name: str
    factory: Callable
    params: tuple = ()

    def make(self, node: int, neighbors, root: int, value=None) -> Process:
        return self.factory(node, neighbors, root, value, **dict(self.params))


BUILTINS = {
    "flood-max": FloodMax,
    "pairwise-sum": PairwiseSum,
    "ping-pong": PingPong,
    "counter-ring": CounterRing,
}


def builtin_protocol(name: str, **params) -> ProtocolSpec:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ProtocolError(f"unknown protocol {name!r}; known: {sorted(BUILTINS)}") from None
    return ProtocolSpec(name, factory, tuple(sorted(params.items())))


# --- transcripts -----------------------------------------------------------


class TranscriptEvent(NamedTuple):
    kind: str
    node: int
    peer: int
    payload: str
    index: int


class Transcript:
    def __init__(self, events: Iterable[TranscriptEvent] = ()):
        self.events = list(events)

    def record(self, kind: str, node: int, peer: int, payload: str) -> TranscriptEvent:
        ev = TranscriptEvent(kind, node, peer, payload, len(self.events))
        self.events.append(ev)
        return ev

    def project(self, v: int) -> "Transcript":
        return project(self, v)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def sends(self):
        return [e for e in self.events if e.kind == SEND]

    def receives(self):
        return [e for e in self.events if e.kind == RECEIVE]


def project(t: Transcript, v: int) -> Transcript:
    """Local transcript of ``v``; events keep their global index."""
    return Transcript(e for e in t.events if e.node == v)
