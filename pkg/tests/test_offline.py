import itertools
import math
import random

import pytest

from oltsp.core import Instance, Request
from oltsp.offline import (
    CLOSED,
    FREE,
    PathQuery,
    SizeCapExceeded,
    eval_serving_order,
    flower_tsp,
    held_karp,
    opt_bruteforce,
    ring_tsp,
    shortest_serving_path_length,
    solve_classical,
    tree_tsp,
)
from oltsp.spaces import Euclid2D, Flower, Line, Ring, Tree

from conftest import random_flower, random_point, random_tree

TOL = 1e-9


def _route_cost(space, start, pts, order, end):
    total = 0.0
    prev = start
    for i in order:
        total += space.distance(prev, pts[i])
        prev = pts[i]
    if end == CLOSED:
        total += space.distance(prev, start)
    elif end != FREE:
        total += space.distance(prev, end)
    return total


def _brute_path(space, start, pts, end):
    best = math.inf
    for order in itertools.permutations(range(len(pts))):
        best = min(best, _route_cost(space, start, pts, order, end))
    return best


def _rand_query(rng, kind):
    if kind == "tree":
        sp = random_tree(rng)
    elif kind == "ring":
        sp = Ring(round(rng.uniform(0.5, 2.0), 6))
    elif kind == "flower":
        sp = random_flower(rng)
    else:
        sp = Euclid2D()
    n = rng.randint(0, 6)
    pts = [random_point(sp, rng) for _ in range(n)]
    start = random_point(sp, rng) if rng.random() < 0.5 else sp.origin()
    end = rng.choice([CLOSED, FREE, "pt"])
    if end == "pt":
        end = random_point(sp, rng)
    return PathQuery(sp, start, pts, end)


def test_held_karp_trivial():
    q = PathQuery(Euclid2D(), (0.0, 0.0), [], CLOSED)
    res = held_karp(q)
    assert res.length == 0.0 and res.order == []


def test_held_karp_line_tour():
    q = PathQuery(Line(), 0.0, [1.0, 2.0, -1.0], CLOSED)
    assert held_karp(q).length == pytest.approx(6.0)


def test_held_karp_matches_brute_force():
    rng = random.Random(42)
    for _ in range(20):
        sp = Euclid2D()
        n = rng.randint(1, 6)
        pts = [random_point(sp, rng) for _ in range(n)]
        for end in (CLOSED, FREE, random_point(sp, rng)):
            q = PathQuery(sp, (0.0, 0.0), pts, end)
            res = held_karp(q)
            assert res.length == pytest.approx(_brute_path(sp, q.start, pts, end), abs=TOL)
            assert _route_cost(sp, q.start, pts, res.order, end) == pytest.approx(res.length, abs=TOL)


def test_held_karp_lex_smallest_among_optima():
    # four corners of a square: several optimal tours exist
    pts = [(1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    q = PathQuery(Euclid2D(), (0.0, 0.0), pts, CLOSED)
    res = held_karp(q)
    best = res.length
    orders = [
        o for o in itertools.permutations(range(3))
        if _route_cost(q.space, q.start, pts, o, CLOSED) <= best + TOL
    ]
    assert res.order == list(min(orders))


def test_held_karp_cap():
    pts = [(float(i), 0.0) for i in range(30)]
    with pytest.raises(SizeCapExceeded):
        held_karp(PathQuery(Euclid2D(), (0.0, 0.0), pts, CLOSED))


def test_tree_tsp_examples():
    q = PathQuery(Line(), 0.0, [-1.0, 1.0], CLOSED)
    assert tree_tsp(q).length == pytest.approx(4.0)
    q = PathQuery(Line(), 0.0, [-1.0, 1.0], 1.0)
    assert tree_tsp(q).length == pytest.approx(3.0)
    # fixed end beyond the span: 2*2.5 - 1.5
    q = PathQuery(Line(), 0.0, [-1.0, 1.5], 1.5)
    assert tree_tsp(q).length == pytest.approx(3.5)


@pytest.mark.parametrize("kind,solver", [("tree", tree_tsp), ("ring", ring_tsp), ("flower", flower_tsp)])
def test_structured_solvers_match_held_karp(kind, solver):
    rng = random.Random({'tree': 1, 'ring': 2, 'flower': 3}[kind])
    for trial in range(120):
        q = _rand_query(rng, kind)
        res = solver(q)
        ref = held_karp(q)
        assert res.length == pytest.approx(ref.length, abs=1e-9), (trial, q.space, q.start, q.required, q.end)
        assert _route_cost(q.space, q.start, q.required, res.order, q.end) == pytest.approx(
            res.length, abs=1e-9
        )
        assert sorted(res.order) == list(range(len(q.required)))


def test_ring_tsp_examples():
    dense = [k / 10 for k in range(10)]
    q = PathQuery(Ring(1.0), 0.0, dense, CLOSED)
    assert ring_tsp(q).length == pytest.approx(1.0)
    q = PathQuery(Ring(1.0), 0.0, [0.1, 0.9], CLOSED)
    assert ring_tsp(q).length == pytest.approx(0.4)


def test_flower_tsp_examples():
    # single petal fully covered: closed cost is one loop
    pts = [(0, k / 10) for k in range(1, 10)]
    q = PathQuery(Flower((1.0,), 0.0), ("stem", 0.0), pts, CLOSED)
    assert flower_tsp(q).length == pytest.approx(1.0)
    # only stem requests behave like a line
    q = PathQuery(Flower((1.0,), 2.0), ("stem", 0.0), [("stem", 1.5), ("stem", 0.5)], CLOSED)
    assert flower_tsp(q).length == pytest.approx(3.0)


def _resimulate(instance, order):
    """Independent step-by-step re-simulation of eager serving."""
    t, pos = 0.0, instance.origin
    for i in order:
        r = instance.requests[i]
        t += instance.space.distance(pos, r.location)
        pos = r.location
        if t < r.release:
            t = r.release
    if instance.variant == "closed":
        t += instance.space.distance(pos, instance.origin)
    return t


def test_eval_serving_order():
    inst = Instance(Line(), [Request(0, 1.0, 1.0), Request(1, 0.0, 2.0)], [1.0, 0.0], "closed")
    assert eval_serving_order(inst, [1, 0]) == pytest.approx(4.0)
    assert eval_serving_order(inst, [0, 1]) == pytest.approx(2.0)


def test_eval_matches_resimulation():
    rng = random.Random(77)
    for _ in range(60):
        sp = random_tree(rng)
        n = rng.randint(1, 6)
        reqs = [Request(i, random_point(sp, rng), rng.uniform(0, 5)) for i in range(n)]
        inst = Instance(sp, reqs, [r.location for r in reqs], rng.choice(["open", "closed"]))
        order = list(range(n))
        rng.shuffle(order)
        assert eval_serving_order(inst, order) == pytest.approx(_resimulate(inst, order), abs=TOL)


def test_eval_zero_releases_equals_route_length():
    rng = random.Random(5)
    sp = Ring(1.0)
    locs = [random_point(sp, rng) for _ in range(5)]
    inst = Instance(sp, [Request(i, x, 0.0) for i, x in enumerate(locs)], locs, "closed")
    order = [3, 1, 4, 0, 2]
    assert eval_serving_order(inst, order) == pytest.approx(
        _route_cost(sp, inst.origin, locs, order, CLOSED)
    )


def test_opt_bruteforce_paper_instances():
    closed = Instance(Line(), [Request(0, 1.0, 1.0), Request(1, 0.0, 2.0)], [1.0, 0.0], "closed")
    assert opt_bruteforce(closed).length == pytest.approx(2.0)
    open_i = Instance(Line(), [Request(0, 1.5, 1.5)], [1.5], "open")
    assert opt_bruteforce(open_i).length == pytest.approx(1.5)
    single = Instance(Line(), [Request(0, 0.7, 1.3)], [0.7], "closed")
    assert opt_bruteforce(single).length == pytest.approx(max(1.3, 0.7) + 0.7)


def test_opt_bruteforce_matches_exhaustive_eval():
    rng = random.Random(11)
    for _ in range(25):
        sp = random_flower(rng)
        n = rng.randint(1, 5)
        reqs = [Request(i, random_point(sp, rng), rng.uniform(0, 3)) for i in range(n)]
        inst = Instance(sp, reqs, [r.location for r in reqs], rng.choice(["open", "closed"]))
        res = opt_bruteforce(inst)
        expect = min(
            eval_serving_order(inst, order) for order in itertools.permutations(range(n))
        )
        assert res.length == pytest.approx(expect, abs=TOL)
        assert eval_serving_order(inst, res.order) == pytest.approx(res.length, abs=TOL)


def test_opt_bruteforce_lower_bounds():
    rng = random.Random(23)
    for _ in range(40):
        sp = Ring(1.0)
        n = rng.randint(1, 5)
        reqs = [Request(i, random_point(sp, rng), rng.uniform(0, 3)) for i in range(n)]
        variant = rng.choice(["open", "closed"])
        inst = Instance(sp, reqs, [r.location for r in reqs], variant)
        val = opt_bruteforce(inst).length
        if variant == "closed":
            lb = max(r.release + sp.distance(r.location, inst.origin) for r in reqs)
        else:
            lb = max(r.release for r in reqs)
        assert val >= lb - TOL
        assert val >= shortest_serving_path_length(inst) - TOL


def test_opt_bruteforce_cap():
    sp = Line()
    reqs = [Request(i, float(i), 0.0) for i in range(10)]
    with pytest.raises(SizeCapExceeded):
        opt_bruteforce(Instance(sp, reqs, [r.location for r in reqs], "open"))


def test_shortest_serving_path_examples():
    closed = Instance(Line(), [Request(0, 1.0, 9.0), Request(1, -1.0, 9.0)], [1.0, -1.0], "closed")
    assert shortest_serving_path_length(closed) == pytest.approx(4.0)
    open_i = Instance(Line(), [Request(0, 1.0, 9.0), Request(1, -1.0, 9.0)], [1.0, -1.0], "open")
    assert shortest_serving_path_length(open_i) == pytest.approx(3.0)


def test_shortest_serving_path_matches_held_karp():
    rng = random.Random(71)
    for _ in range(30):
        sp = random_flower(rng)
        n = rng.randint(1, 6)
        reqs = [Request(i, random_point(sp, rng), 0.0) for i in range(n)]
        variant = rng.choice(["open", "closed"])
        inst = Instance(sp, reqs, [r.location for r in reqs], variant)
        q = PathQuery(sp, inst.origin, inst.locations(), CLOSED if variant == "closed" else FREE)
        assert shortest_serving_path_length(inst) == pytest.approx(held_karp(q).length, abs=TOL)
