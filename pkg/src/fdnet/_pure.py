"""Reference implementations of the hot kernels.

``_speedups.pyx`` mirrors these functions one for one; both must produce
identical results for identical inputs.
"""

from heapq import heappop, heappush

FIFO, LIFO, RANDOM = 0, 1, 2
QUIET, BUDGET, FAULT = 0, 1, 2


def pad_bits(bits, run_limit):
    out = []
    zeros = 0
    for ch in bits:
        out.append(ch)
        if ch == "0":
            zeros += 1
            if zeros == run_limit - 1:
                out.append("1")
                zeros = 0
        else:
            zeros = 0
    return "".join(out)


def unpad_bits(bits, run_limit):
    """Inverse of ``pad_bits``; None if ``bits`` could not have come from it."""
    out = []
    zeros = 0
    skip = False
    for ch in bits:
        if skip:
            if ch != "1":
                return None
            skip = False
            continue
        out.append(ch)
        if ch == "0":
            zeros += 1
            if zeros == run_limit - 1:
                skip = True
                zeros = 0
        elif ch == "1":
            zeros = 0
        else:
            return None
    if skip:
        return None
    return "".join(out)


def push_all(heap, out, nbrs, sender, order, rng, spread, seq, step):
    """Schedule one handler's emissions; returns the new send counter, or -1
    if an emission is not a pulse to a neighbour."""
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


def drive(heap, automata, adj, clock, order, rng, spread, adversary, budget, events, event_type, seq, step):
    """Delivery loop. Returns ``(halt, seq, step, fault)``."""
    while heap:
        if step >= budget:
            return BUDGET, seq, step, None
        _, sseq, sender, receiver, payload, sent_at = heappop(heap)
        step += 1
        delivered = payload if adversary is None else adversary(payload)
        if not delivered:
            return FAULT, seq, step, (receiver, sender, ValueError("adversary produced an empty payload"))
        clock.t = step
        if events is not None:
            events.append(event_type(sseq, sender, receiver, payload, delivered, step, sent_at))
        try:
            out = automata[receiver].receive(sender, delivered)
        except Exception as exc:  # reported as an automaton fault
            return FAULT, seq, step, (receiver, sender, exc)
        if out:
            nseq = push_all(heap, out, adj[receiver], receiver, order, rng, spread, seq, step)
            if nseq < 0:
                return FAULT, seq, step, (receiver, sender, ValueError(f"bad emission {out!r}"))
            seq = nseq
    return QUIET, seq, step, None
