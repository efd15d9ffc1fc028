"""Network topology, bridge detection and directed-cycle representations."""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class GraphError(ValueError):
    pass


class BridgeError(GraphError):
    """Raised when an operation needs a 2-edge-connected network."""

    def __init__(self, bridges):
        self.bridges = sorted(bridges)
        shown = ", ".join(f"{u}-{v}" for u, v in self.bridges)
        super().__init__(f"graph has bridges: {shown}")


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    nodes: tuple[int, ...]
    edges: frozenset
    root: int
    adj: dict = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, nodes: Iterable[int], edges: Iterable[Sequence[int]], root: int | None = None):
        nodes = tuple(sorted(set(int(v) for v in nodes)))
        if not nodes:
            raise GraphError("graph needs at least one node")
        if any(v < 0 for v in nodes):
            raise GraphError("node ids must be non-negative integers")
        node_set = set(nodes)
        canon = set()
        for e in edges:
            u, v = (int(x) for x in e)
            if u == v:
                raise GraphError(f"self-loop at {u}")
            if u not in node_set or v not in node_set:
                raise GraphError(f"edge {u}-{v} names an unknown node")
            key = _edge(u, v)
            if key in canon:
                raise GraphError(f"parallel edge {u}-{v}")
            canon.add(key)
        if root is None:
            root = nodes[0]
        if root not in node_set:
            raise GraphError(f"root {root} is not a node")
        adj = {v: [] for v in nodes}
        for u, v in canon:
            adj[u].append(v)
            adj[v].append(u)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", frozenset(canon))
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "adj", {v: tuple(sorted(ns)) for v, ns in adj.items()})

    @property
    def n(self) -> int:
        return len(self.nodes)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return _edge(u, v) in self.edges

    def is_connected(self) -> bool:
        return len(_reach(self.adj, self.nodes[0])) == self.n

    def is_simple_cycle(self) -> bool:
        return self.n >= 3 and self.is_connected() and all(len(ns) == 2 for ns in self.adj.values())

    def ring_order(self) -> list[int]:
        """Clockwise node order of a simple-cycle graph, starting at the root
        and stepping first to the root's lower-ID neighbour."""
        if not self.is_simple_cycle():
            raise GraphError("graph is not a simple cycle")
        order = [self.root]
        prev, cur = self.root, self.adj[self.root][0]
        while cur != self.root:
            order.append(cur)
            a, b = self.adj[cur]
            prev, cur = cur, (b if a == prev else a)
        return order

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [list(e) for e in sorted(self.edges)],
            "root": self.root,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Graph":
        return cls(doc["nodes"], doc["edges"], doc.get("root"))


def _reach(adj, start, skip=None) -> set:
    seen = {start}
    todo = [start]
    while todo:
        u = todo.pop()
        for v in adj[u]:
            if skip is not None and _edge(u, v) == skip:
                continue
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


def find_bridges(g: Graph) -> set:
    """Edges whose removal disconnects ``g`` (iterative low-link DFS)."""
    if not g.is_connected():
        raise GraphError("graph is disconnected")
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    bridges = set()
    timer = 0
    start = g.nodes[0]
    disc[start] = low[start] = timer
    # stack of (node, parent, neighbour iterator)
    stack = [(start, None, iter(g.adj[start]))]
    while stack:
        u, parent, it = stack[-1]
        advanced = False
        for v in it:
            if v == parent:
                continue
            if v in disc:
                low[u] = min(low[u], disc[v])
            else:
                timer += 1
                disc[v] = low[v] = timer
                stack.append((v, u, iter(g.adj[v])))
                advanced = True
                break
        if advanced:
            continue
        stack.pop()
        if parent is not None:
            low[parent] = min(low[parent], low[u])
            if low[u] > disc[parent]:
                bridges.add(_edge(parent, u))
    return bridges


def bridges_bruteforce(g: Graph) -> set:
    """Reference oracle: remove each edge and test connectivity."""
    if not g.is_connected():
        raise GraphError("graph is disconnected")
    start = g.nodes[0]
    return {e for e in g.edges if len(_reach(g.adj, start, skip=e)) != g.n}


def require_two_edge_connected(g: Graph) -> None:
    found = find_bridges(g)
    if found:
        raise BridgeError(found)


# --- cycle representations -------------------------------------------------


@dataclass(frozen=True)
class LocalView:
    """Occurrences of one node along a directed cycle."""

    prev: tuple[int, ...]
    next: tuple[int, ...]
    positions: tuple[int, ...] = ()

    @property
    def k(self) -> int:
        return len(self.prev)


def local_views(seq: Sequence[int]) -> dict[int, LocalView]:
    size = len(seq)
    acc: dict[int, tuple[list, list, list]] = {}
    for i, u in enumerate(seq):
        p, n, pos = acc.setdefault(u, ([], [], []))
        p.append(seq[i - 1])
        n.append(seq[(i + 1) % size])
        pos.append(i)
    return {u: LocalView(tuple(p), tuple(n), tuple(pos)) for u, (p, n, pos) in acc.items()}


@dataclass(frozen=True)
class CycleRep:
    """A directed, possibly non-simple cycle.

    ``global_`` is the clockwise sequence of node occurrences; ``local`` maps
    each node to its per-occurrence ``prev``/``next`` arrays, numbered in
    cycle order starting from ``global_[0]``.
    """

    global_: tuple[int, ...]
    local: dict = field(compare=False, hash=False)

    @classmethod
    def from_global(cls, seq: Iterable[int]) -> "CycleRep":
        seq = tuple(int(v) for v in seq)
        if not seq:
            raise GraphError("empty cycle")
        return cls(seq, local_views(seq))

    @classmethod
    def from_local(cls, local: dict, start: int) -> "CycleRep":
        seq = walk_local(local, start)
        return cls(seq, {u: LocalView(tuple(v.prev), tuple(v.next), ()) for u, v in local.items()}).normalized()

    def normalized(self) -> "CycleRep":
        return CycleRep.from_global(self.global_)

    @property
    def root(self) -> int:
        return self.global_[0]

    def __len__(self) -> int:
        return len(self.global_)

    def k(self, u: int) -> int:
        return self.local[u].k

    def directed_edges(self) -> set:
        s = self.global_
        return {(s[i], s[(i + 1) % len(s)]) for i in range(len(s))}

    def undirected_edges(self) -> set:
        return {_edge(u, v) for u, v in self.directed_edges()}

    def rotated_to(self, u: int) -> "CycleRep":
        """Same cycle, renumbered so that the first occurrence of ``u`` leads."""
        i = self.global_.index(u)
        return CycleRep.from_global(self.global_[i:] + self.global_[:i])

    def to_dict(self) -> dict:
        return {
            "global": list(self.global_),
            "local": {
                str(u): {"k": v.k, "prev": list(v.prev), "next": list(v.next)}
                for u, v in sorted(self.local.items())
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CycleRep":
        seq = tuple(int(v) for v in doc["global"])
        if "local" not in doc:
            return cls.from_global(seq)
        derived = local_views(seq)
        local = {}
        for key, view in doc["local"].items():
            u = int(key)
            pos = derived[u].positions if u in derived else ()
            local[u] = LocalView(tuple(view["prev"]), tuple(view["next"]), pos)
        return cls(seq, local)


def walk_local(local: dict, start: int) -> tuple[int, ...]:
    """Rebuild the global sequence by following ``next`` pointers from the
    first occurrence of ``start``; each node's occurrences are consumed in
    index order."""
    used = Counter()
    seq = []
    cur = start
    limit = sum(v.k for v in local.values())
    while True:
        if cur not in local:
            raise GraphError(f"next pointer names {cur}, which has no occurrences")
        idx = used[cur]
        if cur == start and idx == local[start].k:
            break
        if idx >= local[cur].k:
            raise GraphError(f"node {cur} visited more often than its {local[cur].k} occurrences")
        seq.append(cur)
        used[cur] += 1
        if len(seq) > limit:
            raise GraphError("local representation does not close into one cycle")
        cur = local[cur].next[idx]
    return tuple(seq)


@dataclass
class CycleReport:
    length: int
    consistent: bool
    edges_exist: bool
    single_orientation: bool
    covers_nodes: bool
    covers_edges: bool
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def robbins(self) -> bool:
        """Spanning, edge-covering and single-oriented."""
        return (self.consistent and self.edges_exist and self.single_orientation
                and self.covers_nodes and self.covers_edges)

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "consistent": self.consistent,
            "edges_exist": self.edges_exist,
            "single_orientation": self.single_orientation,
            "covers_nodes": self.covers_nodes,
            "covers_edges": self.covers_edges,
            "failures": list(self.failures),
        }


def validate_cycle(g: Graph, c: CycleRep) -> CycleReport:
    seq = c.global_
    failures = []

    derived = local_views(seq)
    consistent = set(derived) == set(c.local) and all(
        derived[u].prev == c.local[u].prev and derived[u].next == c.local[u].next for u in derived
    )
    if consistent:
        try:
            consistent = walk_local(c.local, seq[0]) == seq
        except GraphError:
            consistent = False
    if not consistent:
        failures.append("local and global representations disagree")

    steps = c.directed_edges()
    bad = sorted((u, v) for u, v in steps if u == v or not g.has_edge(u, v))
    if bad:
        failures.append(f"steps not in graph: {bad}")

    both = sorted((u, v) for u, v in steps if u < v and (v, u) in steps)
    if both:
        failures.append(f"edges used in both directions: {both}")

    missing_nodes = sorted(set(g.nodes) - set(seq))
    if missing_nodes:
        failures.append(f"nodes not covered: {missing_nodes}")
    missing_edges = sorted(g.edges - c.undirected_edges())
    if missing_edges:
        failures.append(f"edges not covered: {missing_edges}")

    return CycleReport(
        length=len(seq),
        consistent=consistent,
        edges_exist=not bad,
        single_orientation=not both,
        covers_nodes=not missing_nodes,
        covers_edges=not missing_edges,
        failures=failures,
    )


def shortest_directed_path(c: CycleRep | Sequence[int], src: int, dst: int) -> list[int]:
    """Shortest route from ``src`` to ``dst`` over the cycle's directed edges.

    Ties go to the lexicographically smallest ID sequence. Returns ``[]``
    when ``src == dst``.
    """
    seq = c.global_ if isinstance(c, CycleRep) else tuple(c)
    if src not in seq or dst not in seq:
        raise GraphError("endpoints must occur on the cycle")
    if src == dst:
        return []
    succ: dict[int, set] = {}
    pred: dict[int, set] = {}
    for i, u in enumerate(seq):
        v = seq[(i + 1) % len(seq)]
        succ.setdefault(u, set()).add(v)
        pred.setdefault(v, set()).add(u)
    # distances to dst, then greedy smallest successor keeps the path shortest
    dist = {dst: 0}
    frontier = deque([dst])
    while frontier:
        v = frontier.popleft()
        for u in pred.get(v, ()):
            if u not in dist:
                dist[u] = dist[v] + 1
                frontier.append(u)
    if src not in dist:
        raise GraphError(f"no directed path from {src} to {dst}")
    path = [src]
    cur = src
    while cur != dst:
        cur = min(v for v in succ[cur] if dist.get(v) == dist[cur] - 1)
        path.append(cur)
    return path
