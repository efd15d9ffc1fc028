"""Envelope serialization and the two pulse encodings.

Unary: an envelope becomes the integer ``d = int("1" + bits, 2)``; the
holder sends ``d`` clockwise pulses.

Binary: an envelope becomes the frame ``1 . pad(M) . 1 . 0^L``, sent one
pulse per bit (clockwise for 1, counterclockwise for 0). Padding inserts a
1 after every run of ``L-1`` zeros, so ``0^L`` can only appear as the
terminator.
"""

from __future__ import annotations

from ._kernels import pad_bits, unpad_bits
from .protocol import BROADCAST, Envelope


class CodecError(ValueError):
    pass


def id_width(n: int) -> int:
    """Bits per node id for an id universe of size ``n`` (ceil(log2 n))."""
    if n < 1:
        raise CodecError("universe must contain at least one node")
    return (n - 1).bit_length()


def _check_bits(s: str) -> None:
    if s.strip("01"):
        raise CodecError(f"not a bitstring: {s!r}")


class WireCodec:
    """Serializes envelopes for a fixed id universe ``0..n-1``.

    Layout: broadcast flag, destination (zeros for broadcast), source, payload.
    """

    def __init__(self, n: int):
        self.n = n
        self.width = id_width(n)

    def _id(self, v: int) -> str:
        if not 0 <= v < self.n:
            raise CodecError(f"node id {v} outside universe of size {self.n}")
        return format(v, "b").zfill(self.width) if self.width else ""

    def encode(self, env: Envelope) -> str:
        _check_bits(env.payload)
        if env.dest == BROADCAST:
            head = "1" + "0" * self.width
        else:
            head = "0" + self._id(env.dest)
        return head + self._id(env.source) + env.payload

    def decode(self, bits: str) -> Envelope:
        w = self.width
        if len(bits) < 1 + 2 * w:
            raise CodecError(f"wire envelope too short: {bits!r}")
        flag, dest_bits, src_bits = bits[0], bits[1:1 + w], bits[1 + w:1 + 2 * w]
        src = int(src_bits, 2) if w else 0
        if flag == "1":
            if dest_bits.strip("0"):
                raise CodecError("broadcast envelope with non-zero destination field")
            dest = BROADCAST
        else:
            dest = int(dest_bits, 2) if w else 0
        if src >= self.n or (dest != BROADCAST and dest >= self.n):
            raise CodecError("decoded id outside universe")
        return Envelope(bits[1 + 2 * w:], src, dest)

    def unary(self, env: Envelope) -> int:
        return unary_encode_bits(self.encode(env))

    def from_unary(self, d: int) -> Envelope:
        return self.decode(unary_decode_bits(d))

    def frame(self, env: Envelope, run_limit: int) -> str:
        return frame(self.encode(env), run_limit)

    def deframe(self, z: str, run_limit: int) -> Envelope:
        return self.decode(deframe(z, run_limit))


def unary_encode_bits(bits: str) -> int:
    _check_bits(bits)
    return int("1" + bits, 2)


def unary_decode_bits(d: int) -> str:
    if d < 1:
        raise CodecError("unary count must be positive")
    return format(d, "b")[1:]


def unary_encode(env: Envelope, n: int) -> int:
    return WireCodec(n).unary(env)


def unary_decode(d: int, n: int) -> Envelope:
    return WireCodec(n).from_unary(d)


def _check_limit(run_limit: int) -> None:
    if run_limit < 2:
        raise CodecError("run limit L must be at least 2")


def pad(bits: str, run_limit: int) -> str:
    _check_limit(run_limit)
    _check_bits(bits)
    return pad_bits(bits, run_limit)


def unpad(bits: str, run_limit: int) -> str:
    _check_limit(run_limit)
    out = unpad_bits(bits, run_limit)
    if out is None:
        raise CodecError(f"not a padded string for L={run_limit}: {bits!r}")
    return out


def frame(bits: str, run_limit: int = 2) -> str:
    return "1" + pad(bits, run_limit) + "1" + "0" * run_limit


def deframe(z: str, run_limit: int = 2) -> str:
    _check_limit(run_limit)
    tail = "1" + "0" * run_limit
    if len(z) < run_limit + 2 or z[0] != "1" or not z.endswith(tail):
        raise CodecError(f"malformed frame: {z!r}")
    body = z[1:-len(tail)]
    if "0" * run_limit in body:
        raise CodecError("frame body contains a terminator run")
    return unpad(body, run_limit)


def frame_bound(message_len: int, run_limit: int) -> float:
    """Upper bound on ``len(frame(M, L))`` for ``len(M) == message_len``."""
    return 2 + run_limit + (1 + 1 / (run_limit - 1)) * message_len


class FrameReader:
    """Accumulates received bits until the ``0^L`` terminator shows up."""

    def __init__(self, run_limit: int):
        _check_limit(run_limit)
        self.run_limit = run_limit
        self.bits: list[str] = []
        self.zeros = 0

    def push(self, bit: str) -> bool:
        """Record one bit; True once the terminator is complete."""
        self.bits.append(bit)
        self.zeros = self.zeros + 1 if bit == "0" else 0
        return self.zeros >= self.run_limit

    @property
    def text(self) -> str:
        return "".join(self.bits)
