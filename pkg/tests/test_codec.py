import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdnet._kernels import backends
from fdnet.codec import (
    CodecError, FrameReader, WireCodec, deframe, frame, frame_bound, id_width, pad, unary_decode,
    unary_decode_bits, unary_encode, unary_encode_bits, unpad,
)
from fdnet.protocol import BROADCAST, Envelope

bits = st.text(alphabet="01", max_size=64)
limits = st.sampled_from([2, 3, 4])


def pad_oracle(m, L):
    # left-to-right scan: a 1 after every L-1 consecutive zeros
    return re.sub("0" * (L - 1), "0" * (L - 1) + "1", m)


@st.composite
def envelopes(draw):
    n = draw(st.integers(1, 40))
    src = draw(st.integers(0, n - 1))
    dest = draw(st.one_of(st.just(BROADCAST), st.integers(0, n - 1)))
    return n, Envelope(draw(bits), src, dest)


def test_unary_examples():
    assert unary_encode_bits("") == 1
    assert unary_encode_bits("01") == 5
    assert unary_decode_bits(5) == "01"
    with pytest.raises(CodecError):
        unary_decode_bits(0)


def test_pad_examples():
    assert pad("1011", 3) == "1011"
    assert pad("0000", 3) == "001001"
    assert pad("00", 2) == "0101"
    with pytest.raises(CodecError):
        pad("0", 1)


def test_frame_examples():
    assert frame("1011", 3) == "110111000"
    assert frame("", 2) == "1100"
    assert deframe("1100", 2) == ""


@pytest.mark.parametrize("z", ["", "0100", "1101", "110", "1001100"])
def test_deframe_rejects_malformed(z):
    with pytest.raises(CodecError):
        deframe(z, 2)


def test_wire_layout():
    c = WireCodec(8)
    assert id_width(8) == 3 and id_width(5) == 3 and id_width(1) == 0
    assert c.encode(Envelope("11", 2, 5)) == "0" + "101" + "010" + "11"
    assert c.encode(Envelope("", 7, BROADCAST)) == "1" + "000" + "111"


def test_wire_rejects_out_of_range_ids():
    with pytest.raises(CodecError):
        WireCodec(4).encode(Envelope("1", 4, 0))


@settings(max_examples=300, deadline=None)
@given(bits, limits)
def test_pad_matches_scan_oracle(m, L):
    p = pad(m, L)
    assert p == pad_oracle(m, L)
    assert "0" * L not in p
    assert unpad(p, L) == m
    assert len(p) <= (1 + 1 / (L - 1)) * len(m)


@settings(max_examples=300, deadline=None)
@given(bits, limits)
def test_frame_terminator_unique_and_round_trip(m, L):
    z = frame(m, L)
    term = "0" * L
    assert z.endswith(term)
    assert z.find(term) == len(z) - L
    assert deframe(z, L) == m
    assert len(z) <= frame_bound(len(m), L)


@settings(max_examples=300, deadline=None)
@given(envelopes())
def test_envelope_codecs_are_bijective(case):
    n, env = case
    c = WireCodec(n)
    assert c.decode(c.encode(env)) == env
    assert unary_decode(unary_encode(env, n), n) == env
    assert c.deframe(c.frame(env, 3), 3) == env


@settings(max_examples=300, deadline=None)
@given(bits, limits)
def test_frame_reader_stops_exactly_at_terminator(m, L):
    z = frame(m, L)
    r = FrameReader(L)
    done = [r.push(b) for b in z]
    assert done[-1] and not any(done[:-1])
    assert r.text == z


@pytest.mark.parametrize("name", sorted(backends()))
def test_kernel_backends_agree(name):
    mod = backends()[name]
    rng = random.Random(4)
    for _ in range(500):
        m = "".join(rng.choice("01") for _ in range(rng.randint(0, 40)))
        L = rng.randint(2, 5)
        assert mod.pad_bits(m, L) == pad_oracle(m, L)
        assert mod.unpad_bits(mod.pad_bits(m, L), L) == m
    assert mod.unpad_bits("00", 2) is None
