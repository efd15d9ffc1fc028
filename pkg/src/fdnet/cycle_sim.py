"""Noise-resilient simulator over a simple directed cycle.

Each node talks only to ``prev`` and ``next``. A pulse's meaning comes from
the neighbour that delivered it (clockwise from ``prev``, counterclockwise
from ``next``) and the node's state; payload bits are never read.

Per epoch: a token phase (REQUEST flood clockwise, TOKEN travels
counterclockwise to the first node with a queued envelope) and a data phase
where the new holder broadcasts one envelope, in unary or in binary frames.
"""

from __future__ import annotations

from collections import deque

from .codec import FrameReader, WireCodec
from .engine import Automaton
from .protocol import Envelope, Process, ProtocolError
from .trace import Recorder, delivers_to

UNARY = "unary"
BINARY = "binary"
PULSE = "1"

# token phase
IDLE, WAIT_REQ, AFTER_REQ = 0, 1, 2
# data phase
H_DATA, H_END, N_DATA, H_BITS, N_BITS, N_END = 3, 4, 5, 6, 7, 8

STATE_NAMES = {
    IDLE: "idle", WAIT_REQ: "wait-request", AFTER_REQ: "await-token-or-data",
    H_DATA: "holder-data", H_END: "holder-end", N_DATA: "relay-data",
    H_BITS: "holder-bits", N_BITS: "relay-bits", N_END: "relay-end",
}


class SimError(ProtocolError):
    pass


class PiApp:
    """Adapter between a simulator automaton and one protocol process.

    Records the derived transcript: a SEND whenever the process hands an
    envelope to the simulator, a RECEIVE whenever one is delivered to it.
    """

    def __init__(self, process: Process, recorder: Recorder | None = None):
        self.process = process
        self.recorder = recorder

    def _emit(self, envs):
        envs = list(envs or ())
        node = self.process.node
        for env in envs:
            if env.source != node:
                raise SimError(f"node {node} emitted an envelope claiming source {env.source}")
            if self.recorder is not None:
                self.recorder.enqueue(node, env)
        return envs

    def start(self):
        return self._emit(self.process.init())

    def deliver(self, env: Envelope):
        if self.recorder is not None:
            self.recorder.deliver(self.process.node, env)
        return self._emit(self.process.on_deliver(env))

    def sent(self, env: Envelope):
        return []


class PulseSim(Automaton):
    """State shared by both simulator automata: the envelope queue, the
    inbox of pulses not yet consumed, and the epoch bookkeeping.

    Pulses are buffered in arrival order and consumed as soon as the
    current state accepts them, which turns every "wait until" of the
    algorithm into a guard.
    """

    def __init__(self, node, app, codec: WireCodec, mode=BINARY, run_limit=2,
                 token=False, recorder=None, out=None):
        if mode not in (UNARY, BINARY):
            raise SimError(f"unknown mode {mode!r}")
        if mode == BINARY and run_limit < 2:
            raise SimError("binary mode needs L >= 2")
        self.node = node
        self.app = app
        self.codec = codec
        self.mode = mode
        self.run_limit = run_limit
        self.token = token
        self.rec = recorder
        self.out = out if out is not None else []
        self.Q: deque = deque()
        self.inbox: list = []
        self.state = IDLE
        self.epoch = 0
        self.current = None  # envelope being broadcast by this holder

    # -- engine interface
    def start(self):
        self.Q.extend(self.app.start())
        self.begin()
        return self.flush()

    def receive(self, sender, payload):
        self.feed(sender)
        return self.flush()

    def flush(self):
        out = self.out[:]
        self.out.clear()
        return out

    # -- host interface
    def begin(self):
        self._token_phase()
        self._pump()

    def feed(self, sender):
        self.inbox.append(sender)
        self._pump()

    def enqueue(self, env: Envelope):
        self.Q.append(env)
        if self.state == IDLE and len(self.Q) == 1:
            self._token_phase()
            self._pump()

    @property
    def idle(self) -> bool:
        return self.state == IDLE and not self.Q

    def describe(self) -> str:
        return f"node {self.node} {STATE_NAMES[self.state]} epoch={self.epoch} inbox={self.inbox}"

    # -- internals
    def _pump(self):
        inbox = self.inbox
        while inbox:
            for i, w in enumerate(inbox):
                if self._accepts(w):
                    del inbox[i]
                    self._handle(w)
                    break
            else:
                return

    def _token_phase(self):
        self.state = IDLE
        self.sent_req = False
        if self.Q:
            if self.rec is not None:
                self.rec.wait(self.node, self.epoch)
            self._request()

    def _take(self):
        env = self.Q.popleft()
        self.current = env
        if self.mode == UNARY:
            encoded = self.codec.unary(env)
        else:
            encoded = self.codec.frame(env, self.run_limit)
        return env, encoded

    def _decode_unary(self, count):
        return self.codec.from_unary(count)

    def _finish_epoch(self, holder: bool, env: Envelope | None):
        self.epoch += 1
        if self.rec is not None:
            self.rec.epoch_end(self.node, self.epoch, holder)
        if holder:
            self.current = None
            self.Q.extend(self.app.sent(env))
        elif delivers_to(env, self.node):
            self.Q.extend(self.app.deliver(env))
        self._token_phase()

    # subclasses: _accepts, _handle, _request


class CycleSim(PulseSim):
    """Simulator automaton for one node of a simple cycle."""

    def __init__(self, node, prev, next, app, codec, mode=BINARY, run_limit=2,
                 token=False, recorder=None, out=None, position=0):
        super().__init__(node, app, codec, mode, run_limit, token, recorder, out)
        if prev == next:
            raise SimError("a simple cycle needs at least three nodes")
        self.prev = prev
        self.next = next
        self.position = position
        if recorder is not None:
            recorder.register(node, [position], position if token else None)

    def _cw(self):
        self.out.append((self.next, PULSE))
        if self.rec is not None:
            self.rec.pulse(self.node, self.position, True)

    def _ccw(self):
        self.out.append((self.prev, PULSE))
        if self.rec is not None:
            self.rec.pulse(self.node, self.position, False)

    def _request(self):
        self._cw()
        self.sent_req = True
        self.state = WAIT_REQ

    def _accepts(self, w):
        s = self.state
        if s in (IDLE, WAIT_REQ, H_DATA):
            return w == self.prev
        if s == H_END:
            return w == self.next
        if s == H_BITS:
            return w == (self.prev if self.bits[self.bit_pos] == "1" else self.next)
        return True  # AFTER_REQ, N_DATA, N_BITS take either direction

    def _handle(self, w):
        s = self.state
        cw = w == self.prev
        if s == IDLE:
            # REQUEST from upstream: forward it, then it also counts as ours
            self._request()
            self._requests_done()
        elif s == WAIT_REQ:
            self._requests_done()
        elif s == AFTER_REQ:
            if cw:
                self._relay_start()
                self._handle(w)
            elif self.Q:
                self.token = True
                if self.rec is not None:
                    self.rec.holder(self.node, self.position, True)
                self._holder_start()
            else:
                self._ccw()
        elif s == H_DATA:
            self.remaining -= 1
            if self.remaining == 0:
                self._ccw()
                self.state = H_END
        elif s == H_END:
            self._finish_epoch(True, self.current)
        elif s == N_DATA:
            if cw:
                self._cw()
                self.count += 1
            else:
                self._ccw()
                self._finish_epoch(False, self._decode_unary(self.count))
        elif s == H_BITS:
            self.bit_pos += 1
            if self.bit_pos == len(self.bits):
                self._finish_epoch(True, self.current)
            else:
                self._send_bit()
        elif s == N_BITS:
            if cw:
                self._cw()
            else:
                self._ccw()
            if self.reader.push("1" if cw else "0"):
                env = self.codec.deframe(self.reader.text, self.run_limit)
                self._finish_epoch(False, env)

    def _requests_done(self):
        if self.token:
            self.token = False
            if self.rec is not None:
                self.rec.holder(self.node, self.position, False)
            self._ccw()
        self.state = AFTER_REQ

    def _holder_start(self):
        env, encoded = self._take()
        if self.rec is not None:
            self.rec.dequeue(self.node, self.position, env, encoded)
        if self.mode == UNARY:
            self.remaining = encoded
            for _ in range(encoded):
                self._cw()
            self.state = H_DATA
        else:
            self.bits = encoded
            self.bit_pos = 0
            self.state = H_BITS
            self._send_bit()

    def _send_bit(self):
        if self.bits[self.bit_pos] == "1":
            self._cw()
        else:
            self._ccw()

    def _relay_start(self):
        if self.mode == UNARY:
            self.count = 0
            self.state = N_DATA
        else:
            self.reader = FrameReader(self.run_limit)
            self.state = N_BITS


def make_cycle_automaton(node, prev, next, initial_token, mode, pi: Process, codec: WireCodec,
                         run_limit=2, recorder=None, position=0) -> CycleSim:
    return CycleSim(node, prev, next, PiApp(pi, recorder), codec, mode, run_limit,
                    initial_token, recorder, position=position)


def ring_automata(order, processes: dict, codec: WireCodec, mode=BINARY, run_limit=2, recorder=None):
    """One automaton per node of the directed ring ``order``; ``order[0]``
    starts with the token."""
    size = len(order)
    if len(set(order)) != size:
        raise SimError("ring order repeats a node; use the Robbins simulator")
    autos = {}
    for i, u in enumerate(order):
        autos[u] = make_cycle_automaton(u, order[i - 1], order[(i + 1) % size], i == 0, mode,
                                        processes[u], codec, run_limit, recorder, position=i)
    if recorder is not None:
        recorder.mode, recorder.run_limit = mode, run_limit
    return autos
