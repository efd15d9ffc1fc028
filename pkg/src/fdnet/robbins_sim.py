"""Noise-resilient simulator over a Robbins cycle.

A node occurring ``k`` times on the cycle keeps per-occurrence ``prev`` and
``next`` arrays. The arrays are rotated on every TOKEN receipt so that the
token always lies in segment 0 (between the last and the first
occurrence). Data pulses are circulated one at a time through all
occurrences, so each node sees every pulse exactly ``k`` times.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .codec import FrameReader, WireCodec
from .cycle_sim import (
    AFTER_REQ, BINARY, H_BITS, H_DATA, H_END, IDLE, N_BITS, N_DATA, N_END, PULSE, UNARY,
    WAIT_REQ, PiApp, PulseSim, SimError,
)
from .graph import CycleRep
from .protocol import Process


@dataclass
class OccurrenceState:
    prev: list
    next: list

    @property
    def k(self) -> int:
        return len(self.prev)


def rotate_edges(s: OccurrenceState) -> OccurrenceState:
    """prev'[i] = prev[i-1], next'[i] = next[i-1] (indices mod k)."""
    return OccurrenceState(s.prev[-1:] + s.prev[:-1], s.next[-1:] + s.next[:-1])


class RobbinsSim(PulseSim):
    def __init__(self, node, occ: OccurrenceState, app, codec, mode=BINARY, run_limit=2,
                 token=False, recorder=None, out=None, positions=None):
        super().__init__(node, app, codec, mode, run_limit, token, recorder, out)
        self.k = occ.k
        if self.k < 1:
            raise SimError(f"node {node} has no occurrences")
        self.prev = list(occ.prev)
        self.next = list(occ.next)
        if set(self.prev) & set(self.next):
            raise SimError(f"node {node} uses an edge in both directions")
        self.prev_set = frozenset(self.prev)
        self.positions = list(positions) if positions is not None else list(range(self.k))
        self.rot = 0
        if recorder is not None:
            recorder.register(node, self.positions, self.positions[0] if token else None)

    @property
    def occ(self) -> OccurrenceState:
        return OccurrenceState(list(self.prev), list(self.next))

    def _label(self, i):
        # global position of current local occurrence i
        return self.positions[(i - self.rot) % self.k]

    def _to_next(self, i):
        self.out.append((self.next[i], PULSE))
        if self.rec is not None:
            self.rec.pulse(self.node, self._label(i), True)

    def _to_prev(self, i):
        self.out.append((self.prev[i], PULSE))
        if self.rec is not None:
            self.rec.pulse(self.node, self._label(i), False)

    def _rotate(self):
        s = rotate_edges(OccurrenceState(self.prev, self.next))
        self.prev, self.next = s.prev, s.next
        self.rot += 1

    # -- token phase
    def _request(self):
        for i in range(self.k):
            self._to_next(i)
        self.sent_req = True
        self.need = Counter(self.prev)
        self.state = WAIT_REQ

    def _accepts(self, w):
        s = self.state
        k = self.k
        if s == IDLE:
            return w in self.prev_set
        if s == WAIT_REQ:
            return self.need[w] > 0
        if s == AFTER_REQ:
            return w == self.next[k - 1] or w == self.prev[0]
        if s == H_DATA:
            return w == self.prev[(self.i + 1) % k]
        if s in (H_END, N_END):
            return w == self.next[self.j]
        if s == N_DATA:
            return w == self.prev[self.i] or (self.i == 0 and w == self.next[k - 1])
        if s == H_BITS:
            if self.bits[self.bit_pos] == "1":
                return w == self.prev[(self.i + 1) % k]
            return w == self.next[self.j]
        if s == N_BITS:
            if self.i != 0:
                return w == self.prev[self.i]
            if self.j != k - 1:
                return w == self.next[self.j]
            return w == self.prev[0] or w == self.next[k - 1]
        return False

    def _handle(self, w):
        s = self.state
        k = self.k
        if s == IDLE:
            self._request()
            self.need[w] -= 1
            self._check_requests()
        elif s == WAIT_REQ:
            self.need[w] -= 1
            self._check_requests()
        elif s == AFTER_REQ:
            if w == self.prev[0]:
                self._relay_start()
                self._handle(w)
                return
            self._rotate()
            if self.Q:
                self.token = True
                if self.rec is not None:
                    self.rec.holder(self.node, self._label(0), True)
                self._holder_start()
            else:
                self._to_prev(0)
        elif s == H_DATA:
            self.i += 1
            if self.i == k:
                self.i = 0
                self.sent += 1
                if self.sent == self.d:
                    self.j = k - 1
                    self._to_prev(0)
                    self.state = H_END
                    return
            self._to_next(self.i)
        elif s == H_END:
            self.j -= 1
            if self.j < 0:
                self._finish_epoch(True, self.current)
            else:
                self._to_prev((self.j + 1) % k)
        elif s == N_DATA:
            if w == self.prev[self.i]:
                self._to_next(self.i)
                self.count += 1
                self.i = (self.i + 1) % k
                return
            # END reaches occurrence k-1 first
            if self.count % k:
                raise SimError(f"node {self.node} counted {self.count} DATA pulses over {k} occurrences")
            self.d = self.count // k
            self._to_prev(k - 1)
            self.j = k - 2
            self.state = N_END
            if self.j < 0:
                self._finish_epoch(False, self._decode_unary(self.d))
        elif s == N_END:
            self._to_prev(self.j)
            self.j -= 1
            if self.j < 0:
                self._finish_epoch(False, self._decode_unary(self.d))
        elif s == H_BITS:
            if self.bits[self.bit_pos] == "1":
                self.i += 1
                if self.i < k:
                    self._to_next(self.i)
                    return
                self.i = 0
            else:
                self.j -= 1
                if self.j >= 0:
                    self._to_prev((self.j + 1) % k)
                    return
                self.j = k - 1
            self.bit_pos += 1
            if self.bit_pos == len(self.bits):
                self._finish_epoch(True, self.current)
            else:
                self._send_bit()
        elif s == N_BITS:
            if self.i == 0 and self.j == k - 1:
                clockwise = w == self.prev[0]
                if self.reader.push("1" if clockwise else "0"):
                    self.terminated = True
            else:
                clockwise = self.i != 0
            if clockwise:
                self._to_next(self.i)
                self.i = (self.i + 1) % k
            else:
                self._to_prev(self.j)
                self.j -= 1
                if self.j < 0:
                    self.j = k - 1
                    if self.terminated:
                        env = self.codec.deframe(self.reader.text, self.run_limit)
                        self._finish_epoch(False, env)

    def _check_requests(self):
        if any(v > 0 for v in self.need.values()):
            self.state = WAIT_REQ
            return
        if self.token:
            self.token = False
            if self.rec is not None:
                self.rec.holder(self.node, self._label(0), False)
            self._to_prev(0)
        self.state = AFTER_REQ

    # -- data phase
    def _holder_start(self):
        env, encoded = self._take()
        if self.rec is not None:
            self.rec.dequeue(self.node, self._label(0), env, encoded)
        self.i = 0
        self.j = self.k - 1
        if self.mode == UNARY:
            self.d = encoded
            self.sent = 0
            self.state = H_DATA
            self._to_next(0)
        else:
            self.bits = encoded
            self.bit_pos = 0
            self.state = H_BITS
            self._send_bit()

    def _send_bit(self):
        if self.bits[self.bit_pos] == "1":
            self._to_next(self.i)
        else:
            self._to_prev((self.j + 1) % self.k)

    def _relay_start(self):
        self.i = 0
        self.j = self.k - 1
        if self.mode == UNARY:
            self.count = 0
            self.state = N_DATA
        else:
            self.reader = FrameReader(self.run_limit)
            self.terminated = False
            self.state = N_BITS


def make_robbins_automaton(node, occ: OccurrenceState, initial_token, mode, pi: Process, codec: WireCodec,
                           run_limit=2, recorder=None, positions=None) -> RobbinsSim:
    return RobbinsSim(node, occ, PiApp(pi, recorder), codec, mode, run_limit, initial_token,
                      recorder, positions=positions)


def cycle_automata(cycle: CycleRep, processes: dict, codec: WireCodec, mode=BINARY, run_limit=2,
                   recorder=None):
    """One automaton per node on ``cycle``; the occurrence at ``global[0]``
    starts with the token."""
    autos = {}
    root = cycle.global_[0]
    for u, view in cycle.local.items():
        occ = OccurrenceState(list(view.prev), list(view.next))
        autos[u] = make_robbins_automaton(u, occ, u == root, mode, processes[u], codec, run_limit,
                                          recorder, positions=view.positions or None)
    if recorder is not None:
        recorder.mode, recorder.run_limit = mode, run_limit
    return autos
