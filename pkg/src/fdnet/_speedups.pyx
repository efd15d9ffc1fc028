# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the kernels in ``_pure.py``."""

from heapq import heappop, heappush

cdef enum:
    FIFO = 0
    LIFO = 1

cdef enum:
    QUIET = 0
    BUDGET = 1
    FAULT = 2


def pad_bits(str bits, int run_limit):
    cdef list out = []
    cdef int zeros = 0
    cdef Py_UCS4 ch
    for ch in bits:
        out.append(ch)
        if ch == u"0":
            zeros += 1
            if zeros == run_limit - 1:
                out.append(u"1")
                zeros = 0
        else:
            zeros = 0
    return "".join(out)


def unpad_bits(str bits, int run_limit):
    cdef list out = []
    cdef int zeros = 0
    cdef bint skip = False
    cdef Py_UCS4 ch
    for ch in bits:
        if skip:
            if ch != u"1":
                return None
            skip = False
            continue
        out.append(ch)
        if ch == u"0":
            zeros += 1
            if zeros == run_limit - 1:
                skip = True
                zeros = 0
        elif ch == u"1":
            zeros = 0
        else:
            return None
    if skip:
        return None
    return "".join(out)


cdef long long _push_all(list heap, object out, object nbrs, object sender, int order,
                         object rng, double spread, long long seq, long long step) except -2:
    cdef object prio
    for dest, payload in out:
        if dest not in nbrs or not payload:
            return -1
        seq += 1
        if order == FIFO:
            prio = seq
        elif order == LIFO:
            prio = -seq
        else:
            prio = step + rng.random() * spread
        heappush(heap, (prio, seq, sender, dest, payload, step))
    return seq


def push_all(list heap, out, nbrs, sender, int order, rng, double spread, long long seq, long long step):
    return _push_all(heap, out, nbrs, sender, order, rng, spread, seq, step)


def drive(list heap, dict automata, dict adj, clock, int order, rng, double spread, adversary,
          long long budget, events, event_type, long long seq, long long step):
    cdef long long nseq
    cdef object out, delivered, entry
    cdef bint record = events is not None
    cdef bint noisy = adversary is not None
    while heap:
        if step >= budget:
            return BUDGET, seq, step, None
        entry = heappop(heap)
        sseq, sender, receiver, payload, sent_at = entry[1], entry[2], entry[3], entry[4], entry[5]
        step += 1
        delivered = adversary(payload) if noisy else payload
        if not delivered:
            return FAULT, seq, step, (receiver, sender, ValueError("adversary produced an empty payload"))
        clock.t = step
        if record:
            events.append(event_type(sseq, sender, receiver, payload, delivered, step, sent_at))
        try:
            out = automata[receiver].receive(sender, delivered)
        except Exception as exc:
            return FAULT, seq, step, (receiver, sender, exc)
        if out:
            nseq = _push_all(heap, out, adj[receiver], receiver, order, rng, spread, seq, step)
            if nseq < 0:
                return FAULT, seq, step, (receiver, sender, ValueError(f"bad emission {out!r}"))
            seq = nseq
    return QUIET, seq, step, None
