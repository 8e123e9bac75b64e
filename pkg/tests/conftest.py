import math
import random

import pytest

from oltsp.spaces import Euclid2D, Flower, General, Line, Ring, Tree


def random_tree(rng: random.Random, max_leaves: int = 4, max_edges: int = 6) -> Tree:
    edges = []
    nodes = [0]
    leaves = set()
    for _ in range(rng.randint(1, max_edges)):
        if len(leaves) >= max_leaves:
            parent = rng.choice(sorted(leaves))
        else:
            parent = rng.choice(nodes)
        child = len(nodes)
        edges.append((parent, child, round(rng.uniform(0.2, 2.0), 6)))
        leaves.discard(parent)
        leaves.add(child)
        nodes.append(child)
    return Tree(edges)


def random_flower(rng: random.Random, max_petals: int = 2) -> Flower:
    petals = tuple(round(rng.uniform(0.5, 1.5), 6) for _ in range(rng.randint(1, max_petals)))
    stem = round(rng.uniform(0.0, 1.0), 6) if rng.random() < 0.7 else 0.0
    return Flower(petals, stem)


def random_general(rng: random.Random, sites: int) -> General:
    pts = [(0.0, 0.0)] + [
        (round(rng.uniform(-1, 1), 6), round(rng.uniform(-1, 1), 6)) for _ in range(sites - 1)
    ]
    mat = [[math.hypot(a[0] - b[0], a[1] - b[1]) for b in pts] for a in pts]
    return General(mat)


def random_point(space, rng: random.Random):
    if isinstance(space, Line):
        return round(rng.uniform(-2, 2), 6)
    if isinstance(space, Euclid2D):
        return (round(rng.uniform(-1, 1), 6), round(rng.uniform(-1, 1), 6))
    if isinstance(space, Ring):
        return round(rng.uniform(0, space.circumference), 6)
    if isinstance(space, Tree):
        ei = rng.randrange(len(space.edges))
        return space.canon((ei, round(rng.uniform(0, space.edges[ei][2]), 6)))
    if isinstance(space, Flower):
        comps = list(range(len(space.petals))) + (["stem"] if space.stem > 0 else [])
        c = rng.choice(comps)
        ln = space.stem if c == "stem" else space.petals[c]
        return space.canon((c, round(rng.uniform(0, ln), 6)))
    if isinstance(space, General):
        return rng.randrange(space.n)
    raise TypeError(space)


def random_space(kind: str, rng: random.Random, n_hint: int = 6):
    if kind == "line":
        return Line()
    if kind == "euclid2d":
        return Euclid2D()
    if kind == "ring":
        return Ring(round(rng.uniform(0.5, 2.0), 6))
    if kind == "tree":
        return random_tree(rng)
    if kind == "flower":
        return random_flower(rng)
    if kind == "general":
        return random_general(rng, n_hint + 3)
    raise ValueError(kind)
