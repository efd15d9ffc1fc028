import random

import pytest

from fdnet import Graph, find_bridges


def ring(n, root=0):
    return Graph(range(n), [(i, (i + 1) % n) for i in range(n)], root=root)


def random_two_edge_connected(n, rng: random.Random, chords=None) -> Graph:
    """Random graph grown by ears: a start cycle, then paths through new
    nodes between existing ones, then a few chords."""
    order = list(range(n))
    rng.shuffle(order)
    first = rng.randint(3, n) if n > 3 else 3
    edges = {tuple(sorted((order[i], order[(i + 1) % first]))) for i in range(first)}
    placed = order[:first]
    rest = order[first:]
    while rest:
        size = rng.randint(1, len(rest))
        ear, rest = rest[:size], rest[size:]
        a = rng.choice(placed)
        b = rng.choice([v for v in placed if v != a] if size == 1 else placed)
        path = [a] + ear + [b]
        for u, v in zip(path, path[1:]):
            edges.add(tuple(sorted((u, v))))
        placed += ear
    chords = rng.randint(0, n // 2) if chords is None else chords
    for _ in range(chords):
        u, v = rng.sample(range(n), 2)
        edges.add(tuple(sorted((u, v))))
    g = Graph(range(n), edges, root=0)
    assert g.is_connected() and not find_bridges(g)
    return g


@pytest.fixture
def triangle():
    return Graph([0, 1, 2], [(0, 1), (1, 2), (0, 2)], root=0)
