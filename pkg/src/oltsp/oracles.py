"""Domination oracles: monotonically growing permutation sets queried at
release events.

Every batch construction follows the same template: pick the first
unreleased request q of a hypothetical order, serve a structured set of
released requests on an optimal route to q, then clean up the remainder
with an exact classical solver.  The general oracle enumerates released
subsets directly (single-exponential); the tree, ring and flower oracles
enumerate leaves, crescents/loops, and petal states instead (FPT or
polynomial).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .offline import (
    CLOSED,
    FREE,
    TreeIndex,
    exact_path,
    flower_cover,
    ring_cover,
    split_ring_index,
    tree_index_for,
)
from .spaces import Flower, General, Line, Ring, Space, Tree, Euclid2D

TOL = 1e-9


class OracleEntry:
    """A permutation with its route length and arrival prefix distances,
    evaluated over the predicted locations."""

    __slots__ = ("perm", "length", "reach")

    def __init__(self, perm: tuple, D, closed: bool):
        self.perm = perm
        reach = []
        total = 0.0
        prev = 0  # matrix row 0 is the origin
        for i in perm:
            total += D[prev][i + 1]
            reach.append(total)
            prev = i + 1
        if closed and perm:
            total += D[prev][0]
        self.reach = reach
        self.length = total

    def alpha_released(self, released) -> float:
        if self.length <= TOL:
            return 1.0
        for k, i in enumerate(self.perm):
            if i not in released:
                return self.reach[k] / self.length
        return 1.0


@dataclass
class BatchRecord:
    time: float
    batch_size: int
    new_perms: int


class OutOfOrderEvent(ValueError):
    pass


class DominationOracle:
    """Base class holding the cumulative permutation set S(t)."""

    def __init__(self, space: Space, predictions: list, variant: str):
        self.space = space
        self.predictions = list(predictions)
        self.variant = variant
        self.n = len(predictions)
        self.origin = space.origin()
        pts = [self.origin] + self.predictions
        self.D = [[space.distance(a, b) for b in pts] for a in pts]
        self.entries: dict[tuple, OracleEntry] = {}
        self.batches: list[BatchRecord] = []
        self.batch_log: list[tuple[float, tuple]] = []
        self._last_time: float | None = None
        self._last_released: frozenset = frozenset()
        self._cleanup_cache: dict = {}

    # -- protocol ----------------------------------------------------------

    def step(self, t: float, released: Iterable[int]) -> list[tuple]:
        released = frozenset(released)
        if self._last_time is not None and t < self._last_time - 1e-9:
            raise OutOfOrderEvent(f"event at {t} precedes {self._last_time}")
        if not released >= self._last_released:
            raise OutOfOrderEvent("released set shrank")
        if self._last_time is not None and released == self._last_released and self.batches:
            return []  # idempotent repeat query
        self._last_time = t
        self._last_released = released
        batch = self._dedup(self._batch(released))
        new = []
        closed = self.variant == "closed"
        for perm in batch:
            if perm not in self.entries:
                self.entries[perm] = OracleEntry(perm, self.D, closed)
                new.append(perm)
        self.batches.append(BatchRecord(t, len(batch), len(new)))
        self.batch_log.append((t, tuple(batch)))
        return new

    def dump_batches(self) -> str:
        lines = []
        for t, perms in self.batch_log:
            body = " ".join("(" + ",".join(map(str, p)) + ")" for p in perms)
            lines.append(f"batch t={t:.9g}: {body}")
        return "\n".join(lines)

    def _batch(self, released: frozenset) -> list[tuple]:
        raise NotImplementedError

    @staticmethod
    def _dedup(perms: Iterable[tuple]) -> list[tuple]:
        seen = set()
        out = []
        for p in perms:
            if p not in seen:
                seen.add(p)
                out.append(p)
        return out

    # -- shared pieces -------------------------------------------------------

    def _all_ids(self):
        return range(self.n)

    def _cleanup_general(self, start_idx: int, rest: frozenset) -> list[int]:
        """Canonical optimal path start -> rest -> origin/free, as ids."""
        key = (start_idx, rest)
        hit = self._cleanup_cache.get(key)
        if hit is None:
            end = 0 if self.variant == "closed" else FREE
            targets = tuple(i + 1 for i in sorted(rest))
            _, order = exact_path(self.D, start_idx, targets, end)
            hit = [sorted(rest)[j] for j in order]
            self._cleanup_cache[key] = hit
        return hit


# ---------------------------------------------------------------------------
# General metric oracle
# ---------------------------------------------------------------------------

class GeneralOracle(DominationOracle):
    """One dominator per (released subset R', unreleased pivot u)."""

    def __init__(self, space, predictions, variant):
        super().__init__(space, predictions, variant)
        self._head_cache: dict = {}

    def _head(self, sub: frozenset, u: int) -> list[int]:
        key = (sub, u)
        hit = self._head_cache.get(key)
        if hit is None:
            targets = tuple(i + 1 for i in sorted(sub))
            _, order = exact_path(self.D, 0, targets, u + 1)
            hit = [sorted(sub)[j] for j in order]
            self._head_cache[key] = hit
        return hit

    def _batch(self, released: frozenset) -> list[tuple]:
        ids = set(self._all_ids())
        unrel = sorted(ids - released)
        if not unrel:
            return [tuple(self._cleanup_general(0, frozenset(ids)))]
        rel = sorted(released)
        out = []
        for u in unrel:
            for mask in range(1 << len(rel)):
                sub = frozenset(rel[j] for j in range(len(rel)) if mask >> j & 1)
                head = self._head(sub, u)
                rest = frozenset(ids - sub - {u})
                tail = self._cleanup_general(u + 1, rest)
                out.append(tuple(head + [u] + tail))
        return out


def tree_scan(tree: Tree, q, leaves) -> tuple[float, list]:
    """Optimal root-start walk visiting the chosen leaves and ending at q.

    Requires q to sit on some root-to-leaf path of the chosen set; the
    returned visit order lists the points of the walk in serving order.
    """
    leaves = list(leaves)
    d = tree.distance
    root = tree.origin()
    on_some_path = any(
        abs(d(root, leaf) - (d(root, q) + d(q, leaf))) <= 1e-9 for leaf in leaves
    ) or any(d(q, leaf) <= 1e-9 for leaf in leaves)
    if not on_some_path:
        raise ValueError("scan endpoint is not on a path to any chosen leaf")
    from .offline import PathQuery, tree_tsp

    res = tree_tsp(PathQuery(tree, root, leaves, q))
    return res.length, [leaves[j] for j in res.order]


# ---------------------------------------------------------------------------
# Tree-style batches over a TreeIndex (shared by tree, ring and flower)
# ---------------------------------------------------------------------------

def _emit(idx: TreeIndex, node_order, pool) -> list[int]:
    pool = set(pool)
    out = []
    for v in node_order:
        for item in idx.items_at.get(v, []):
            if item in pool:
                out.append(item)
                pool.discard(item)
    return out


def _subsets(items: list) -> Iterable[tuple]:
    for mask in range(1 << len(items)):
        yield tuple(items[j] for j in range(len(items)) if mask >> j & 1)


def _pivots(idx: TreeIndex, ids: Iterable[int], root: int) -> list[tuple[int, int]]:
    """(node, smallest id) for each maximal node hosting one of ``ids``."""
    by_node: dict[int, int] = {}
    for i in sorted(ids):
        v = idx.node_of[i]
        by_node.setdefault(v, i)
    return [(v, by_node[v]) for v in idx.maximal_nodes(by_node, root)]


def closed_tree_batch(idx: TreeIndex, released: frozenset, ids: set,
                      cleanup) -> list[tuple]:
    """Scan-to-pivot dominators on a tree, cleaning up back to the origin.

    ``cleanup(q_id, rest_ids)`` must return the remainder serving order.
    """
    rel = released & ids
    unrel = ids - released
    if not unrel:
        _, order = idx.path_cover(0, {idx.node_of[i] for i in ids}, CLOSED)
        return [tuple(_emit(idx, order, ids))]
    rel_leaves = idx.maximal_nodes({idx.node_of[i] for i in rel}, 0)
    out = []
    for qnode, qid in _pivots(idx, unrel, 0):
        for chosen in _subsets(rel_leaves):
            _, order = idx.path_cover(0, set(chosen) | {qnode}, qnode)
            prefix = _emit(idx, order, rel)
            rest = ids - set(prefix) - {qid}
            out.append(tuple(prefix + [qid] + cleanup(qid, frozenset(rest))))
    return out


def open_tree_batch(idx: TreeIndex, released: frozenset, ids: set,
                    cleanup_to) -> list[tuple]:
    """Rerooted scan dominators for the open variant.

    ``cleanup_to(q_id, rest_ids, qf_id)`` serves the remainder ending at
    the designated final request, which is pinned last.
    """
    rel = released & ids
    unrel = ids - released
    if not unrel:
        _, order = idx.path_cover(0, {idx.node_of[i] for i in ids}, FREE)
        return [tuple(_emit(idx, order, ids))]
    out = []
    rel_nodes = {idx.node_of[i] for i in rel}
    for qf in sorted(ids):
        fnode = idx.node_of[qf]
        rel_leaves = idx.maximal_nodes(rel_nodes, fnode)
        for qnode, qid in _pivots(idx, unrel - {qf}, fnode):
            for chosen in _subsets(rel_leaves):
                _, order = idx.path_cover(0, set(chosen) | {qnode}, qnode)
                prefix = _emit(idx, order, rel - {qf})
                rest = ids - set(prefix) - {qid} - {qf}
                tail = cleanup_to(qid, frozenset(rest), qf)
                out.append(tuple(prefix + [qid] + tail + [qf]))
        if unrel == {qf}:
            # the final request is the only unreleased one
            for chosen in _subsets(rel_leaves):
                _, order = idx.path_cover(0, set(chosen) | {fnode}, fnode)
                prefix = _emit(idx, order, rel)
                rest = ids - set(prefix) - {qf}
                tail = cleanup_to(qf, frozenset(rest), qf)
                out.append(tuple(prefix + tail + [qf]))
    return out


class TreeOracle(DominationOracle):
    def __init__(self, space, predictions, variant):
        super().__init__(space, predictions, variant)
        self.idx = tree_index_for(space, {i: p for i, p in enumerate(self.predictions)})
        self._tail_cache: dict = {}

    def _cleanup(self, qid: int, rest: frozenset) -> list[int]:
        key = (qid, rest)
        hit = self._tail_cache.get(key)
        if hit is None:
            if rest:
                _, order = self.idx.path_cover(
                    self.idx.node_of[qid], {self.idx.node_of[i] for i in rest}, 0
                )
                hit = _emit(self.idx, order, rest)
            else:
                hit = []
            self._tail_cache[key] = hit
        return hit

    def _cleanup_to(self, qid: int, rest: frozenset, qf: int) -> list[int]:
        key = (qid, rest, qf)
        hit = self._tail_cache.get(key)
        if hit is None:
            nodes = {self.idx.node_of[i] for i in rest}
            if rest:
                _, order = self.idx.path_cover(
                    self.idx.node_of[qid], nodes | {self.idx.node_of[qf]}, self.idx.node_of[qf]
                )
                hit = _emit(self.idx, order, rest)
            else:
                hit = []
            self._tail_cache[key] = hit
        return hit

    def _batch(self, released: frozenset) -> list[tuple]:
        ids = set(self._all_ids())
        if self.variant == "closed":
            return closed_tree_batch(self.idx, released, ids, self._cleanup)
        return open_tree_batch(self.idx, released, ids, self._cleanup_to)


# ---------------------------------------------------------------------------
# Ring oracle
# ---------------------------------------------------------------------------

class RingOracle(DominationOracle):
    def __init__(self, space: Ring, predictions, variant):
        super().__init__(space, predictions, variant)
        self.C = space.circumference
        self.pos = [space.norm(p) for p in self.predictions]
        self.idx = split_ring_index(self.C, {i: p for i, p in enumerate(self.pos)})
        self._tail_cache: dict = {}

    # remainder solvers in the true ring metric
    def _ring_cleanup(self, qid: int, rest: frozenset, end) -> list[int]:
        key = (qid, rest, end)
        hit = self._tail_cache.get(key)
        if hit is None:
            items = [(self.pos[i], i) for i in sorted(rest)]
            _, order = ring_cover(self.C, self.pos[qid], items, end)
            hit = list(order)
            self._tail_cache[key] = hit
        return hit

    def _closed_cleanup(self, qid, rest):
        return self._ring_cleanup(qid, rest, 0.0)

    def _pinned(self, qid, rest, qf):
        key = ("pin", qid, rest, qf)
        hit = self._tail_cache.get(key)
        if hit is None:
            items = [(self.pos[i], i) for i in sorted(rest)]
            _, order = ring_cover(self.C, self.pos[qid], items, self.pos[qf])
            hit = list(order)
            self._tail_cache[key] = hit
        return hit

    def _crescents(self, released: frozenset, ids: set) -> list[tuple]:
        rel = sorted(released & ids)
        unrel = sorted(ids - released)
        out = []
        for q in unrel:
            pq = self.pos[q]
            left = [i for i in rel if self.pos[i] <= pq + 1e-12]
            right = [i for i in rel if self.pos[i] >= pq - 1e-12]
            lc = sorted(left, key=lambda i: (self.pos[i], i))
            rc = sorted(right, key=lambda i: (-self.pos[i], i))
            fm_dir = 1 if pq <= self.C / 2 + 1e-12 else -1
            fm = sorted(rel, key=lambda i: (fm_dir * self.pos[i], i))
            for prefix, pool in ((lc, left), (rc, right), (fm, rel)):
                rest = frozenset(ids - set(prefix) - {q})
                if self.variant == "closed":
                    tail = self._closed_cleanup(q, rest)
                else:
                    tail = self._ring_cleanup(q, rest, FREE)
                out.append(tuple(prefix + [q] + tail))
        return out

    def _loops(self, released: frozenset, ids: set) -> list[tuple]:
        rel = sorted(released & ids)
        unrel = sorted(ids - released)
        out = []
        for q in unrel:
            for d in (1, -1):
                prefix = sorted(rel, key=lambda i: (d * self.pos[i], i))
                rest = frozenset(ids - set(prefix) - {q})
                tail = self._ring_cleanup(q, rest, FREE)
                out.append(tuple(prefix + [q] + tail))
        return out

    def _line_extents(self, released: frozenset, ids: set) -> list[tuple]:
        """Open-variant dominators for orders that never cross the antipode:
        guess the farthest visited request on each arm, sweep both arms,
        finish at q, then clean up freely.  One dominator per
        (q, left extent, right extent) choice."""
        rel = set(released & ids)
        unrel = sorted(ids - released)
        half = self.C / 2
        out = []

        def depth(i, side):
            return self.pos[i] if side == 1 else self.C - self.pos[i]

        def on_side(i, side):
            return (self.pos[i] <= half + 1e-12) if side == 1 else (self.pos[i] > half + 1e-12)

        for q in unrel:
            qside = 1 if self.pos[q] <= half + 1e-12 else -1
            qd = depth(q, qside)
            same = sorted((i for i in rel if on_side(i, qside)), key=lambda i: (depth(i, qside), i))
            other = sorted((i for i in rel if not on_side(i, qside)), key=lambda i: (depth(i, -qside), i))
            same_extents = [qd] + [depth(i, qside) for i in same if depth(i, qside) > qd + 1e-12]
            other_extents = [None] + [depth(i, -qside) for i in other]
            for es in same_extents:
                s_part = [i for i in same if depth(i, qside) <= es + 1e-12]
                for eo in other_extents:
                    o_part = [] if eo is None else [i for i in other if depth(i, -qside) <= eo + 1e-12]
                    rest = frozenset(ids - set(s_part) - set(o_part) - {q})
                    tail = self._ring_cleanup(q, rest, FREE)
                    out.append(tuple(o_part + s_part + [q] + tail))
                    if o_part:
                        out.append(tuple(s_part + o_part + [q] + tail))
        return out

    def _out_and_back(self, released: frozenset, ids: set) -> list[tuple]:
        """Open-variant dominators that turn around at q1, loop out the other
        arc through the antipode, descend to q2, and finish at q."""
        rel = set(released & ids)
        unrel = sorted(ids - released)
        half = self.C / 2
        out = []
        for side in (1, -1):
            # "other" arc where q1/q2 live; depth = distance from origin
            def depth(i):
                return self.pos[i] if side == 1 else self.C - self.pos[i]

            def on_other(i):
                return (self.pos[i] <= half + 1e-12) if side == 1 else (self.pos[i] > half + 1e-12)

            other_rel = sorted((i for i in rel if on_other(i)), key=depth)
            outbound = sorted(
                (i for i in rel if not on_other(i)),
                key=lambda i: (self.C - self.pos[i]) if side == 1 else self.pos[i],
            )
            for q in unrel:
                q1_opts = [None] + other_rel
                q2_opts = [i for i in other_rel] + ([q] if on_other(q) else [])
                for q1 in q1_opts:
                    d1 = depth(q1) if q1 is not None else 0.0
                    for q2 in q2_opts:
                        if depth(q2) <= d1 + 1e-12:
                            continue
                        a_part = sorted(
                            (i for i in other_rel if depth(i) <= d1 + 1e-12),
                            key=lambda i: (-depth(i), i),
                        )
                        c_part = sorted(
                            (i for i in other_rel if depth(i) >= depth(q2) - 1e-12),
                            key=lambda i: (-depth(i), i),
                        )
                        prefix = a_part + outbound + c_part
                        if q in prefix:
                            continue
                        prefix = prefix + [q]
                        rest = frozenset(ids - set(prefix))
                        tail = self._ring_cleanup(q, rest, FREE)
                        out.append(tuple(prefix + tail))
        return out

    def _batch(self, released: frozenset) -> list[tuple]:
        ids = set(self._all_ids())
        unrel = ids - released
        if not unrel:
            items = [(self.pos[i], i) for i in sorted(ids)]
            end = 0.0 if self.variant == "closed" else FREE
            _, order = ring_cover(self.C, 0.0, items, end)
            return [tuple(order)]
        if self.variant == "closed":
            out = closed_tree_batch(self.idx, released, ids, self._closed_cleanup)
            out += self._crescents(released, ids)
            return out
        out = open_tree_batch(self.idx, released, ids, self._pinned)
        # orders that never cross the antipode need not be sensible for
        # their own final request, so cover all extent choices directly
        out += self._line_extents(released, ids)
        out += self._loops(released, ids)
        out += self._crescents(released, ids)
        out += self._out_and_back(released, ids)
        return out


# ---------------------------------------------------------------------------
# Flower oracle
# ---------------------------------------------------------------------------

class FlowerOracle(DominationOracle):
    def __init__(self, space: Flower, predictions, variant):
        super().__init__(space, predictions, variant)
        self.flower = space
        self.loc = [space.canon(p) for p in self.predictions]
        self.comp = [p[0] for p in self.loc]
        self.off = [p[1] for p in self.loc]
        self.petal_ids: dict[int, list[int]] = {}
        self.tree_ids: list[int] = []
        for i, c in enumerate(self.comp):
            if c == "stem":
                self.tree_ids.append(i)
            else:
                self.petal_ids.setdefault(c, []).append(i)
        self._snip_cache: dict[frozenset, TreeIndex] = {}
        self._tail_cache: dict = {}

    def _snip_index(self, kept: frozenset) -> TreeIndex:
        idx = self._snip_cache.get(kept)
        if idx is None:
            from .spaces import snip_flower

            ids = [i for i in range(self.n) if self.comp[i] == "stem" or self.comp[i] not in kept]
            tree, _, mapped = snip_flower(self.flower, kept, [self.loc[i] for i in ids])
            idx = tree_index_for(tree, dict(zip(ids, mapped)))
            self._snip_cache[kept] = idx
        return idx

    def _cleanup(self, qid: int, rest: frozenset, end_key) -> list[int]:
        key = (qid, rest, end_key)
        hit = self._tail_cache.get(key)
        if hit is None:
            items = [(self.loc[i], i) for i in sorted(rest)]
            end = self.flower.origin() if end_key == "O" else (FREE if end_key == "F" else self.loc[end_key])
            _, order = flower_cover(self.flower, self.loc[qid], items, end)
            hit = list(order)
            self._tail_cache[key] = hit
        return hit

    def _loop_order(self, petal: int, pool, direction: int) -> list[int]:
        return sorted(
            (i for i in self.petal_ids.get(petal, []) if i in pool),
            key=lambda i: (direction * self.off[i], i),
        )

    def _petal_dir_for(self, petal: int, qid: int) -> int:
        # loop direction matching the full-moon convention when q sits on it
        if self.comp[qid] == petal:
            return 1 if self.off[qid] <= self.flower.petals[petal] / 2 + 1e-12 else -1
        return 1

    def _batch(self, released: frozenset) -> list[tuple]:
        ids = set(self._all_ids())
        unrel = sorted(ids - released)
        if not unrel:
            items = [(self.loc[i], i) for i in sorted(ids)]
            end = self.flower.origin() if self.variant == "closed" else FREE
            _, order = flower_cover(self.flower, self.flower.origin(), items, end)
            return [tuple(order)]
        if self.variant == "closed":
            return self._structured(released, ids, finals=[None], none_end="O")
        finals: list[int | None] = [None] + sorted(ids)
        return self._structured(released, ids, finals=finals, none_end="F")

    def _structured(self, released: frozenset, ids: set, finals, none_end: str) -> list[tuple]:
        rel = released & ids
        out = []
        seen: set[tuple] = set()
        petals_with_rel = sorted(k for k, members in self.petal_ids.items() if any(i in rel for i in members))
        for qf in finals:
            pin = [] if qf is None else [qf]
            end_key = none_end if qf is None else qf
            root_of = None if qf is None else qf
            for q in sorted(ids - released):
                if qf is not None and q == qf and len(ids - released) > 1:
                    continue
                qc = self.comp[q]
                same_final_petal = (
                    qf is not None and qc != "stem" and self.comp[qf] == qc
                )
                for done in _subsets(petals_with_rel):
                    done = set(done)
                    # (approach kind, kept petal set, direction)
                    options: list[tuple]
                    if qc == "stem":
                        options = [("tree", frozenset(done), None)]
                    elif qc in done:
                        options = [("after_loop", frozenset(done), None)]
                    else:
                        options = [("tree", frozenset(done), None)]
                        kept_q = frozenset(done | {qc})
                        options += [("arc", kept_q, 1), ("arc", kept_q, -1)]
                        if same_final_petal:
                            options += [("late_loop", kept_q, 1), ("late_loop", kept_q, -1)]
                    for approach, kept, direction in options:
                        self._variants(
                            out, seen, ids, rel, q, qf, approach, kept, direction,
                            pin, end_key,
                        )
        return out

    def _variants(self, out, seen, ids, rel, q, qf, approach, kept, direction,
                  pin, end_key) -> None:
        qc = self.comp[q]
        done = sorted(k for k in kept if k != qc or approach in ("after_loop",))
        if approach in ("arc", "late_loop"):
            done = sorted(k for k in kept if k != qc)
        idx = self._snip_index(kept)
        tree_rel_nodes = {idx.node_of[i] for i in rel if i in idx.node_of}
        root_node = 0
        if qf is not None and qf in idx.node_of:
            root_node = idx.node_of[qf]
        if approach == "tree":
            # only the deepest unreleased request per branch can be the
            # first unreleased of a sensible order within the tree part
            unrel_nodes = {
                idx.node_of[i]
                for i in idx.node_of
                if isinstance(i, int) and i not in rel and (i != qf or i == q)
            }
            if idx.node_of[q] not in idx.maximal_nodes(unrel_nodes, root_node):
                return
        leaves = idx.maximal_nodes(tree_rel_nodes, root_node)
        loop_pool = rel if qf is None else rel - {qf}
        loop_prefix: list[int] = []
        for k in done:
            loop_prefix += self._loop_order(k, loop_pool, self._petal_dir_for(k, q))
        for chosen in _subsets(leaves):
            prefix = list(loop_prefix)
            if approach == "tree":
                qnode = idx.node_of[q]
                _, order = idx.path_cover(0, set(chosen) | {qnode}, qnode)
                prefix += [i for i in _emit(idx, order, rel) if i != qf]
            else:
                if chosen:
                    _, order = idx.path_cover(0, set(chosen), CLOSED)
                    prefix += [i for i in _emit(idx, order, rel) if i != qf]
                if approach == "arc":
                    qo = self.off[q]
                    arc_pool = [
                        i
                        for i in self.petal_ids.get(qc, [])
                        if i in rel and i != qf
                        and (
                            (direction == 1 and self.off[i] <= qo + 1e-12)
                            or (direction == -1 and self.off[i] >= qo - 1e-12)
                        )
                    ]
                    prefix += sorted(arc_pool, key=lambda i: (direction * self.off[i], i))
                elif approach == "late_loop":
                    pool = [i for i in self.petal_ids.get(qc, []) if i in rel and i != qf]
                    prefix += sorted(pool, key=lambda i: (direction * self.off[i], i))
            dedup_prefix = []
            used = set()
            for i in prefix:
                if i not in used:
                    used.add(i)
                    dedup_prefix.append(i)
            key = (tuple(dedup_prefix), q, qf)
            if key in seen:
                continue
            seen.add(key)
            rest = frozenset(ids - used - {q} - set(pin))
            tail = self._cleanup(q, rest, end_key)
            if pin and pin[0] == q:
                out.append(tuple(dedup_prefix + tail + pin))
            else:
                out.append(tuple(dedup_prefix + [q] + tail + pin))


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------

ORACLE_KINDS = {
    "general": GeneralOracle,
    "tree": TreeOracle,
    "ring": RingOracle,
    "flower": FlowerOracle,
}


def default_oracle_kind(space: Space) -> str:
    if isinstance(space, (Line, Tree)):
        return "tree"
    if isinstance(space, Ring):
        return "ring"
    if isinstance(space, Flower):
        return "flower"
    return "general"


_ORACLE_SPACES = {
    "tree": (Line, Tree),
    "ring": (Ring,),
    "flower": (Flower,),
    "general": (Line, Tree, Ring, Flower, Euclid2D, General),
}


def make_oracle(space: Space, predictions, variant: str, kind: str = "auto") -> DominationOracle:
    if kind == "auto":
        kind = default_oracle_kind(space)
    try:
        cls = ORACLE_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown oracle kind {kind!r}") from None
    if not isinstance(space, _ORACLE_SPACES[kind]):
        raise ValueError(f"oracle {kind!r} is not compatible with {type(space).__name__}")
    return cls(space, predictions, variant)
