"""Instrumentation shared by the simulator automata of one run.

The recorder is observation only: automata report what they do, and
nothing they decide depends on it.
"""

from __future__ import annotations

from collections import defaultdict
from typing import NamedTuple

from .engine import Clock
from .protocol import BROADCAST, RECEIVE, SEND, Envelope, Transcript


class HolderChange(NamedTuple):
    t: int
    node: int
    occurrence: int
    holding: bool


class Dequeue(NamedTuple):
    t: int
    node: int
    occurrence: int
    envelope: Envelope
    encoded: object  # unary count d or binary frame z


class EpochEnd(NamedTuple):
    t: int
    node: int
    epoch: int
    holder: bool
    marks: dict  # occurrence -> length of its direction string so far


class Waiting(NamedTuple):
    node: int
    completed: int  # epochs completed when the node started asking for the token


class Recorder:
    def __init__(self, clock: Clock | None = None):
        self.clock = clock or Clock()
        self.tau = Transcript()
        self.directions: dict = defaultdict(list)
        self.occurrences: dict = defaultdict(set)
        self.holders: list[HolderChange] = []
        self.dequeues: list[Dequeue] = []
        self.epoch_ends: list[EpochEnd] = []
        self.waiting: list[Waiting] = []
        self.initial_holder = None
        self.mode = None
        self.run_limit = None

    # pulses
    def pulse(self, node: int, occurrence: int, clockwise: bool) -> None:
        self.directions[(node, occurrence)].append("1" if clockwise else "0")

    def register(self, node: int, occurrences, holder_occurrence=None) -> None:
        self.occurrences[node].update(occurrences)
        if holder_occurrence is not None:
            self.initial_holder = (node, holder_occurrence)

    # simulated protocol events
    def enqueue(self, node: int, env: Envelope) -> None:
        self.tau.record(SEND, node, env.dest, env.payload)

    def deliver(self, node: int, env: Envelope) -> None:
        self.tau.record(RECEIVE, node, env.source, env.payload)

    # token and epochs
    def holder(self, node: int, occurrence: int, holding: bool) -> None:
        self.holders.append(HolderChange(self.clock.t, node, occurrence, holding))

    def dequeue(self, node: int, occurrence: int, env: Envelope, encoded) -> None:
        self.dequeues.append(Dequeue(self.clock.t, node, occurrence, env, encoded))

    def epoch_end(self, node: int, epoch: int, holder: bool) -> None:
        marks = {occ: len(self.directions[(node, occ)]) for occ in self.occurrences[node]}
        self.epoch_ends.append(EpochEnd(self.clock.t, node, epoch, holder, marks))

    def wait(self, node: int, completed: int) -> None:
        self.waiting.append(Waiting(node, completed))

    def direction_string(self, node: int, occurrence: int) -> str:
        return "".join(self.directions[(node, occurrence)])


def delivers_to(env: Envelope, node: int) -> bool:
    if env.dest == BROADCAST:
        return env.source != node
    return env.dest == node
