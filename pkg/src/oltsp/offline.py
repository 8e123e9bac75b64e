"""Exact classical TSP-path solvers (release times ignored) and the
release-time-aware brute-force optimum.

``held_karp`` is the bitmask DP reference for any metric; the tree, ring
and flower solvers are the fast structured equivalents.  All of them take
a :class:`PathQuery` (start anywhere, required point set, end fixed /
free / closed) and return an :class:`OptResult` whose serving order
reproduces the optimal length.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .spaces import Flower, Line, Ring, Space, Tree, trim_tree

FREE = "free"
CLOSED = "closed"

HELD_KARP_CAP = 24
BRUTE_FORCE_CAP = 9

_TOL = 1e-12


class SizeCapExceeded(ValueError):
    pass


@dataclass
class PathQuery:
    space: Space
    start: Any
    required: list
    end: Any = CLOSED  # a Point, FREE, or CLOSED


@dataclass
class OptResult:
    length: float
    order: list[int]  # indices into the query's required list


def _build_matrix(space: Space, points: list) -> list[list[float]]:
    n = len(points)
    D = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = space.distance(points[i], points[j])
            D[i][j] = D[j][i] = d
    return D


# ---------------------------------------------------------------------------
# Bitmask DP on an arbitrary matrix
# ---------------------------------------------------------------------------

def exact_path(D, start: int, targets: tuple[int, ...], end) -> tuple[float, list[int]]:
    """Optimal walk start -> targets -> end on matrix ``D``.

    ``end`` is a matrix index or FREE.  Returns the cost and the
    lexicographically smallest optimal visiting order of ``targets``.
    """
    m = len(targets)
    if m == 0:
        return (0.0 if end == FREE else D[start][end]), []
    if m > HELD_KARP_CAP:
        raise SizeCapExceeded(f"{m} targets exceeds bitmask cap {HELD_KARP_CAP}")
    full = (1 << m) - 1
    memo: dict[tuple[int, int], float] = {}

    def best(mask: int, last: int) -> float:
        if mask == full:
            return 0.0 if end == FREE else D[last][end]
        key = (mask, last)
        val = memo.get(key)
        if val is None:
            val = math.inf
            for j in range(m):
                if not mask & (1 << j):
                    val = min(val, D[last][targets[j]] + best(mask | (1 << j), targets[j]))
            memo[key] = val
        return val

    order = []
    mask, last = 0, start
    while mask != full:
        want = best(mask, last)
        for j in range(m):
            if mask & (1 << j):
                continue
            cand = D[last][targets[j]] + best(mask | (1 << j), targets[j])
            if cand <= want + _TOL:
                order.append(j)
                mask |= 1 << j
                last = targets[j]
                break
    return best(0, start), order


def held_karp(query: PathQuery) -> OptResult:
    pts = [query.start] + list(query.required)
    end = query.end
    if end == CLOSED:
        end_idx = 0
    elif end == FREE:
        end_idx = FREE
    else:
        pts.append(end)
        end_idx = len(pts) - 1
    D = _build_matrix(query.space, pts)
    cost, order = exact_path(D, 0, tuple(range(1, len(query.required) + 1)), end_idx)
    return OptResult(cost, order)


# ---------------------------------------------------------------------------
# Segment (line interval) cover
# ---------------------------------------------------------------------------

def segment_cover(s: float, req: list[tuple[float, Any]], end) -> tuple[float, list]:
    """Optimal covering walk on a line from ``s`` over ``req`` positions.

    ``end`` is a coordinate, FREE, or CLOSED (return to ``s``).  Returns
    (length, keys in serving order).
    """
    if not req and end == FREE:
        return 0.0, []
    if not req and end == CLOSED:
        return 0.0, []
    ext = [p for p, _ in req] + [s]
    if end not in (FREE, CLOSED):
        ext.append(end)
    m, M = min(ext), max(ext)

    def left_first():
        lo = sorted((p, k) for p, k in req if p <= s)[::-1]
        hi = sorted((p, k) for p, k in req if p > s)
        return [k for _, k in lo] + [k for _, k in hi]

    def right_first():
        hi = sorted((p, k) for p, k in req if p >= s)
        lo = sorted((p, k) for p, k in req if p < s)[::-1]
        return [k for _, k in hi] + [k for _, k in lo]

    if end == CLOSED:
        return 2 * (M - m), left_first()
    if end == FREE:
        a = (s - m) + (M - m)   # sweep left, end right
        b = (M - s) + (M - m)   # sweep right, end left
        return (a, left_first()) if a <= b else (b, right_first())
    a = (s - m) + (M - m) + (M - end)
    b = (M - s) + (M - m) + (end - m)
    return (a, left_first()) if a <= b else (b, right_first())


# ---------------------------------------------------------------------------
# Ring cover
# ---------------------------------------------------------------------------

def ring_cover(C: float, s: float, req: list[tuple[float, Any]], end) -> tuple[float, list]:
    """Optimal covering walk on a circle of circumference ``C``."""
    s = s % C
    req = [(p % C, k) for p, k in req]
    fixed = end not in (FREE, CLOSED)
    e = end % C if fixed else None

    relevant = sorted({p for p, _ in req} | {s} | ({e} if fixed else set()))
    candidates: list[tuple[float, list]] = []

    # cut the circle inside each gap between consecutive relevant positions
    for i in range(len(relevant)):
        nxt = relevant[(i + 1) % len(relevant)]
        gap = (nxt - relevant[i]) % C
        if len(relevant) > 1 and gap <= _TOL:
            continue
        cut = (relevant[i] + gap / 2.0) % C if len(relevant) > 1 else (relevant[0] + C / 2) % C

        def unroll(p):
            return (p - cut) % C

        seg_end = CLOSED if end == CLOSED else (FREE if end == FREE else unroll(e))
        cost, order = segment_cover(unroll(s), [(unroll(p), k) for p, k in req], seg_end)
        candidates.append((cost, order))

    # wrap: a full loop (plus the hop to a fixed end)
    loop_order = [k for _, k in sorted(req, key=lambda r: ((r[0] - s) % C, str(r[1])))]
    if end == CLOSED or end == FREE:
        candidates.append((C, loop_order))
    else:
        arc = abs(s - e)
        candidates.append((C + min(arc, C - arc), loop_order))

    candidates.sort(key=lambda c: c[0])
    return candidates[0]


# ---------------------------------------------------------------------------
# Tree index: combinatorial view of points placed on a tree
# ---------------------------------------------------------------------------

class TreeIndex:
    """Nodes of a (small, finite) tree hosting identified items.

    Provides metric ancestry tests, maximal-item computations and exact
    covering walks; the workhorse behind the tree/ring/flower solvers
    and the structured domination oracles.
    """

    def __init__(self, tree: Tree, node_of_item: dict[Any, int]):
        self.tree = tree
        self.node_of = dict(node_of_item)
        n = tree.n_nodes
        self.n = n
        self.par = [-1] * n
        self.plen = [0.0] * n
        for u, v, ln in tree.edges:
            self.par[v] = u
            self.plen[v] = ln
        self.dist = [[0.0] * n for _ in range(n)]
        for a in range(n):
            for b in range(a + 1, n):
                d = tree.node_dist(a, b)
                self.dist[a][b] = d
                self.dist[b][a] = d
        self.items_at: dict[int, list] = {}
        for item, v in self.node_of.items():
            self.items_at.setdefault(v, []).append(item)
        for v in self.items_at:
            self.items_at[v].sort(key=str)

    def on_path(self, x: int, a: int, b: int) -> bool:
        return abs(self.dist[a][b] - (self.dist[a][x] + self.dist[x][b])) <= 1e-9

    def maximal_nodes(self, nodes, root: int = 0) -> list[int]:
        """Members with no other member strictly farther along their root path."""
        nodes = sorted(set(nodes))
        out = []
        for v in nodes:
            if any(w != v and self.on_path(v, w, root) for w in nodes):
                continue
            out.append(v)
        return out

    def span(self, nodes) -> tuple[float, set[int]]:
        """Weight and edge set (as child nodes) of the Steiner span of ``nodes``."""
        nodes = set(nodes)
        edges = set()
        W = 0.0
        for v in range(1, self.n):
            inside = any(self._below(k, v) for k in nodes)
            outside = any(not self._below(k, v) for k in nodes)
            if inside and outside:
                edges.add(v)
                W += self.plen[v]
        return W, edges

    def _below(self, k: int, v: int) -> bool:
        # v lies on the root path of k (v ancestor-or-equal of k)
        return self.on_path(v, k, 0)

    def path_cover(self, s: int, req_nodes, end) -> tuple[float, list[int]]:
        """Optimal covering walk from node ``s`` over ``req_nodes``.

        ``end`` is a node, FREE, or CLOSED.  Returns (length, node visit
        order including every span node, first-visit order).
        """
        req_nodes = set(req_nodes)
        K = req_nodes | {s}
        if end not in (FREE, CLOSED):
            K.add(end)
        W, edges = self.span(K)
        span_nodes = {s} | K
        for v in edges:
            span_nodes.add(v)
            span_nodes.add(self.par[v])
        if end == CLOSED:
            cost = 2 * W
            e = s
        elif end == FREE:
            e = max(span_nodes, key=lambda v: (self.dist[s][v], -v))
            cost = 2 * W - self.dist[s][e]
        else:
            e = end
            cost = 2 * W - self.dist[s][e]

        adj: dict[int, list[int]] = {v: [] for v in span_nodes}
        for v in edges:
            adj[v].append(self.par[v])
            adj[self.par[v]].append(v)

        order: list[int] = []

        def walk(x: int, prev: int, target) -> None:
            order.append(x)
            nbrs = [y for y in adj[x] if y != prev]
            last = None
            if target is not None and target != x:
                for y in nbrs:
                    if self.on_path(y, x, target):
                        last = y
                        break
            for y in sorted(nbrs):
                if y != last:
                    walk(y, x, None)
            if last is not None:
                walk(last, x, target)

        walk(s, -1, None if end == CLOSED else e)
        return cost, order


def tree_index_for(space: Space, items: dict[Any, Any]) -> TreeIndex:
    """Index item -> location over a tree-shaped space (Line or Tree)."""
    keys = list(items)
    if isinstance(space, Line):
        tree, mapped = _line_tree([items[k] for k in keys])
    elif isinstance(space, Tree):
        tree, mapped = trim_tree(space, [items[k] for k in keys])
    else:
        raise TypeError(f"not a tree-shaped space: {space}")
    node_of = {}
    for k, p in zip(keys, mapped):
        node_of[k] = _node_index(tree, p)
    return TreeIndex(tree, node_of)


def _node_index(tree: Tree, p) -> int:
    p = tree.canon(p)
    if p[0] == -1:
        return 0
    ei, off = p
    u, v, ln = tree.edges[ei]
    if off >= ln:
        return v
    raise ValueError(f"point {p} is not a node of the tree")


def _line_tree(coords: list[float]) -> tuple[Tree, list]:
    edges = []
    node_at = {0.0: 0}
    for side in (-1, 1):
        vals = sorted({c for c in coords if (c < 0 if side < 0 else c > 0)}, key=abs)
        prev, prev_node = 0.0, 0
        for c in vals:
            node = len(node_at)
            edges.append((prev_node, node, abs(c) - abs(prev)))
            node_at[c] = node
            prev, prev_node = c, node
    tree = Tree(edges)
    mapped = [tree.node_point(node_at.get(c, node_at[0.0] if c == 0 else node_at[c])) for c in coords]
    return tree, mapped


def split_ring_index(C: float, items: dict[Any, float]) -> TreeIndex:
    """Index ring positions on the tree obtained by splitting at the antipode."""
    half = C / 2.0

    def coord(p):
        p = p % C
        return p if p <= half else p - C  # cw side positive, ccw side negative

    coords = {k: coord(p) for k, p in items.items()}
    tree, mapped = _line_tree(list(coords.values()))
    node_of = {}
    for (k, c), p in zip(coords.items(), mapped):
        node_of[k] = _node_index(tree, p)
    return TreeIndex(tree, node_of)


# ---------------------------------------------------------------------------
# Flower cover
# ---------------------------------------------------------------------------

def flower_cover(flower: Flower, s, req: list[tuple[Any, Any]], end) -> tuple[float, list]:
    """Optimal covering walk on a flower from point ``s`` over request points.

    Components (petals, stem) only communicate through the receptacle, so
    the walk decomposes into per-component covers stitched at the origin;
    when start and end share a component its requests are split between
    the first and last excursions by exhaustive bipartition.
    """
    s = flower.canon(s)
    origin = flower.origin()
    fixed = end not in (FREE, CLOSED)
    e = flower.canon(end) if fixed else (s if end == CLOSED else None)

    def comp(p):
        return None if p == origin else p[0]

    def off(p):
        return 0.0 if p == origin else p[1]

    sc = comp(s)
    ec = comp(e) if e is not None else None

    groups: dict[Any, list[tuple[float, Any]]] = {}
    for p, k in req:
        p = flower.canon(p)
        c = comp(p)
        if c is None:
            # requests at the receptacle: attach to the start component if
            # any, so they are served when the walk first touches the origin
            c = sc if sc is not None else ec
        if c is None:
            c = "stem"
        groups.setdefault(c, []).append((off(p) if comp(p) == c else 0.0, k))

    comps = sorted(
        set(groups) | ({sc} if sc is not None else set()) | ({ec} if ec is not None else set()),
        key=str,
    )

    def comp_cover(c, a_off, items, b) -> tuple[float, list]:
        # b: an offset within c, FREE, or CLOSED
        if c == "stem":
            return segment_cover(a_off, items, b)
        return ring_cover(flower.petals[c], a_off, items, b)

    if not comps:
        return (0.0 if not fixed else flower.distance(s, e)), []
    if len(comps) == 1:
        c = comps[0]
        if (sc is None or sc == c) and (not fixed or ec is None or ec == c):
            b = CLOSED if end == CLOSED and sc == c else (FREE if end == FREE else (off(e) if ec == c else 0.0))
            if end == CLOSED and sc is None:
                b = 0.0
            cost, order = comp_cover(c, off(s) if sc == c else 0.0, groups.get(c, []), b)
            extra = 0.0
            if sc is not None and sc != c:  # start elsewhere: walk to the origin first
                extra += flower.to_origin(s)
            if fixed and ec is not None and ec != c:
                extra += flower.to_origin(e)
            return cost + extra, order

    def middles(exclude):
        cost, order = 0.0, []
        for c in comps:
            if c in exclude or c not in groups:
                continue
            cc, oo = comp_cover(c, 0.0, groups[c], CLOSED)
            cost += cc
            order += oo
        return cost, order

    best: tuple[float, list] | None = None

    def consider(cost, order):
        nonlocal best
        if best is None or cost < best[0] - _TOL:
            best = (cost, order)

    def evaluate(final_comp, final_mode):
        """Walk = start-comp cover to O, middle comps closed, final comp."""
        if final_comp is None or final_comp == sc:
            if sc is None:
                mc, mo = middles(set())
                consider(mc, mo)
                return
            items = groups.get(sc, [])
            mc, mo = middles({sc})
            if final_comp is None:
                hc, ho = comp_cover(sc, off(s), items, 0.0)
                consider(hc + mc, ho + mo)
                return
            for mask in range(1 << len(items)):
                A = [items[i] for i in range(len(items)) if mask & (1 << i)]
                B = [items[i] for i in range(len(items)) if not mask & (1 << i)]
                ac, ao = comp_cover(sc, off(s), A, 0.0)
                bc, bo = comp_cover(sc, 0.0, B, final_mode)
                consider(ac + mc + bc, ao + mo + bo)
        else:
            hc, ho = (0.0, []) if sc is None else comp_cover(sc, off(s), groups.get(sc, []), 0.0)
            mc, mo = middles({sc, final_comp})
            tc, to = comp_cover(final_comp, 0.0, groups.get(final_comp, []), final_mode)
            consider(hc + mc + tc, ho + mo + to)

    if end == FREE:
        evaluate(None, None)  # end at the origin
        for c in comps:
            evaluate(c, FREE)
    elif end == CLOSED:
        if sc is None:
            evaluate(None, None)
        else:
            evaluate(sc, off(s))
    else:
        if ec is None:
            evaluate(None, None)
        else:
            evaluate(ec, off(e))

    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Public query solvers
# ---------------------------------------------------------------------------

def tree_tsp(query: PathQuery) -> OptResult:
    space = query.space
    items = {("s",): query.start}
    for i, p in enumerate(query.required):
        items[i] = p
    fixed = query.end not in (FREE, CLOSED)
    if fixed:
        items[("e",)] = query.end
    idx = tree_index_for(space, items)
    s = idx.node_of[("s",)]
    req_nodes = {idx.node_of[i] for i in range(len(query.required))}
    end = idx.node_of[("e",)] if fixed else (s if query.end == CLOSED else FREE)
    if query.end == CLOSED:
        cost, order = idx.path_cover(s, req_nodes, CLOSED)
    else:
        cost, order = idx.path_cover(s, req_nodes, end if fixed else FREE)
    serve = _emit(idx, order, range(len(query.required)))
    return OptResult(cost, serve)


def ring_tsp(query: PathQuery) -> OptResult:
    space = query.space
    req = [(space.norm(p), i) for i, p in enumerate(query.required)]
    end = query.end
    if end not in (FREE, CLOSED):
        end = space.norm(end)
    cost, order = ring_cover(space.circumference, space.norm(query.start), req, end)
    return OptResult(cost, order)


def flower_tsp(query: PathQuery) -> OptResult:
    req = [(p, i) for i, p in enumerate(query.required)]
    cost, order = flower_cover(query.space, query.start, req, query.end)
    return OptResult(cost, order)


def solve_classical(query: PathQuery) -> OptResult:
    space = query.space
    if isinstance(space, (Line, Tree)):
        return tree_tsp(query)
    if isinstance(space, Ring):
        return ring_tsp(query)
    if isinstance(space, Flower):
        return flower_tsp(query)
    return held_karp(query)


def _emit(idx: TreeIndex, node_order: list[int], wanted) -> list:
    wanted = set(wanted)
    out = []
    for v in node_order:
        for item in idx.items_at.get(v, []):
            if item in wanted:
                out.append(item)
                wanted.discard(item)
    return out


# ---------------------------------------------------------------------------
# Release-time-aware evaluation and brute force
# ---------------------------------------------------------------------------

def eval_serving_order(instance, order) -> float:
    """Completion time of eagerly following ``order``, waiting at requests."""
    space = instance.space
    t = 0.0
    pos = instance.origin
    for i in order:
        req = instance.requests[i]
        t = max(t + space.distance(pos, req.location), req.release)
        pos = req.location
    if instance.variant == "closed":
        t += space.distance(pos, instance.origin)
    return t


_PERM_CACHE: dict[int, np.ndarray] = {}


def _perms(n: int) -> np.ndarray:
    if n not in _PERM_CACHE:
        _PERM_CACHE[n] = np.array(list(itertools.permutations(range(n))), dtype=np.int8)
    return _PERM_CACHE[n]


def opt_bruteforce(instance, cap: int = BRUTE_FORCE_CAP) -> OptResult:
    """Exact optimum over all serving orders (with release times)."""
    n = len(instance.requests)
    if n > cap:
        raise SizeCapExceeded(f"{n} requests exceeds factorial cap {cap}")
    if n == 0:
        return OptResult(0.0, [])
    space = instance.space
    pts = [instance.origin] + [r.location for r in instance.requests]
    D = np.array(_build_matrix(space, pts))
    rel = np.array([r.release for r in instance.requests])
    P = _perms(n)
    t = np.zeros(len(P))
    prev = np.zeros(len(P), dtype=np.int64)
    for k in range(n):
        cur = P[:, k].astype(np.int64) + 1
        t = np.maximum(t + D[prev, cur], rel[cur - 1])
        prev = cur
    if instance.variant == "closed":
        t = t + D[prev, 0]
    best = int(np.argmin(t))  # permutations enumerate in lex order: first min is lex-smallest
    return OptResult(float(t[best]), [int(x) for x in P[best]])


def shortest_serving_path_length(instance) -> float:
    """F: classical TSP value over the true locations, from the origin."""
    if not instance.requests:
        return 0.0
    q = PathQuery(
        instance.space,
        instance.origin,
        [r.location for r in instance.requests],
        CLOSED if instance.variant == "closed" else FREE,
    )
    return solve_classical(q).length
