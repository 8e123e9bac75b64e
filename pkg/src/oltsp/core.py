"""Instances, route statistics, prediction error, and the exact
event-driven simulation of a unit-speed server.

The simulator never steps time on a grid: the next event is always one
of a release, an arrival at the current target, a policy wake-up (for
example the strategic start time), or an adversary wake-up, all of which
are computed in closed form.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any, Iterable

from . import spaces
from .spaces import Space, canon_point

TOL = 1e-9

DEPART = "depart"
ARRIVE = "arrive"
WAIT_START = "wait_start"
WAIT_END = "wait_end"
SERVE = "serve"
RELEASE = "release"
BREAK_RULE = "break_rule_fired"
FINISH = "finish"


@dataclass(frozen=True)
class Request:
    id: int
    location: Any
    release: float


@dataclass
class Instance:
    space: Space
    requests: list[Request]
    predictions: list
    variant: str = "closed"  # "open" | "closed"

    def __post_init__(self):
        if len(self.predictions) != len(self.requests):
            raise ValueError("one prediction per request is required")
        if self.variant not in ("open", "closed"):
            raise ValueError(f"bad variant {self.variant!r}")

    @property
    def origin(self):
        return self.space.origin()

    @property
    def n(self) -> int:
        return len(self.requests)

    def locations(self) -> list:
        return [r.location for r in self.requests]

    def release_times(self) -> list[float]:
        return [r.release for r in self.requests]

    def with_predictions(self, predictions) -> "Instance":
        return Instance(self.space, self.requests, list(predictions), self.variant)

    def perfect(self) -> "Instance":
        return self.with_predictions(self.locations())

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "variant": self.variant,
            "requests": [
                {"x": spaces.point_to_json(self.space, r.location), "t": r.release}
                for r in self.requests
            ],
            "predictions": [spaces.point_to_json(self.space, p) for p in self.predictions],
        }

    @staticmethod
    def from_json(obj: dict) -> "Instance":
        space = spaces.space_from_json(obj["space"])
        reqs = [
            Request(i, spaces.point_from_json(space, r["x"]), float(r["t"]))
            for i, r in enumerate(obj["requests"])
        ]
        preds = [spaces.point_from_json(space, p) for p in obj["predictions"]]
        return Instance(space, reqs, preds, obj.get("variant", "closed"))


# ---------------------------------------------------------------------------
# Route statistics
# ---------------------------------------------------------------------------

def route_length(space: Space, origin, points: list, perm, variant: str) -> float:
    if not perm:
        return 0.0
    total = space.distance(origin, points[perm[0]])
    for a, b in zip(perm, perm[1:]):
        total += space.distance(points[a], points[b])
    if variant == "closed":
        total += space.distance(points[perm[-1]], origin)
    return total


class RouteStats:
    """Length and released-prefix fraction of one serving order.

    The released prefix of a route at time t runs from the origin up to
    and including the leg that reaches the first unreleased request; if
    every request is released (or the route has length zero) the
    fraction is 1.
    """

    __slots__ = ("perm", "length", "reach", "release_times")

    def __init__(self, space: Space, origin, points: list, perm, variant: str,
                 release_times=None):
        self.perm = tuple(perm)
        self.release_times = release_times
        reach = []
        total = 0.0
        prev = origin
        for i in self.perm:
            total += space.distance(prev, points[i])
            reach.append(total)
            prev = points[i]
        if variant == "closed" and self.perm:
            total += space.distance(prev, origin)
        self.reach = reach  # distance travelled when arriving at each stop
        self.length = total

    def alpha_released(self, released) -> float:
        if self.length <= TOL:
            return 1.0
        for k, i in enumerate(self.perm):
            if i not in released:
                return self.reach[k] / self.length
        return 1.0

    def alpha_at(self, t: float) -> float:
        released = {i for i, ti in enumerate(self.release_times) if ti <= t + 1e-12}
        return self.alpha_released(released)

    def beta_at(self, t: float) -> float:
        return min(self.alpha_at(t), 0.5)

    def unreleased_remainder(self, released) -> float:
        return (1.0 - self.alpha_released(released)) * self.length


def route_stats(instance: Instance, perm, use_predictions: bool = False) -> RouteStats:
    pts = instance.predictions if use_predictions else instance.locations()
    return RouteStats(
        instance.space, instance.origin, pts, perm, instance.variant,
        release_times=instance.release_times(),
    )


def released_fraction(instance: Instance, perm, t: float) -> float:
    return route_stats(instance, perm).alpha_at(t)


def prediction_error(instance: Instance) -> float:
    """Sum of true-to-predicted distances over the shortest serving path length."""
    from .offline import shortest_serving_path_length

    delta = sum(
        instance.space.distance(r.location, p)
        for r, p in zip(instance.requests, instance.predictions)
    )
    if delta <= TOL:
        return 0.0
    F = shortest_serving_path_length(instance)
    if F <= TOL:
        return 0.0
    return delta / F


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

@dataclass
class TrajEvent:
    time: float
    point: Any
    kind: str
    detail: Any = None


@dataclass
class RunResult:
    completion_time: float
    trajectory: list[TrajEvent]
    served_at: dict[int, float]

    def events(self, kind: str) -> list[TrajEvent]:
        return [e for e in self.trajectory if e.kind == kind]

    def to_csv(self) -> str:
        lines = ["time,location,event"]
        for e in self.trajectory:
            loc = str(e.point).replace(",", ";")
            lines.append(f"{e.time:.12g},{loc},{e.kind}")
        return "\n".join(lines) + "\n"


class SimulationStalled(RuntimeError):
    """The policy waits forever with no event left to wake it."""


class Simulation:
    """Single-server world: releases arrive, the policy moves the server."""

    def __init__(self, space: Space, n: int, predictions: list, variant: str,
                 releases: Iterable[tuple[float, int, Any]] = (),
                 adversary=None):
        self.space = space
        self.n = n
        self.predictions = list(predictions)
        self.variant = variant
        self.now = 0.0
        self.pos = space.origin()
        self.released: dict[int, Request] = {}
        self.served: dict[int, float] = {}
        self.trajectory: list[TrajEvent] = []
        self._queue: list[tuple[float, int, Any]] = []
        for t, i, loc in releases:
            heapq.heappush(self._queue, (t, i, loc))
        self._adversary = adversary
        self._leg = None  # (from_pos, depart_t, target, arrive_t)
        self._finished = False

    # -- policy-facing API -------------------------------------------------

    @property
    def current_leg(self):
        """(from, depart_time, target, arrival_time) of the active move."""
        return self._leg

    def all_released(self) -> bool:
        return len(self.released) == self.n

    def unserved_released(self) -> list[Request]:
        return [r for i, r in sorted(self.released.items()) if i not in self.served]

    def serve(self, rid: int) -> None:
        req = self.released.get(rid)
        if req is None:
            raise ValueError(f"request {rid} not released")
        if self.space.distance(self.pos, req.location) > TOL:
            raise ValueError(f"server not at request {rid}")
        if rid in self.served:
            return
        self.served[rid] = self.now
        self._log(SERVE, detail=rid)

    def note(self, kind: str, detail=None) -> None:
        self._log(kind, detail=detail)

    # -- internals ---------------------------------------------------------

    def _log(self, kind: str, detail=None) -> None:
        self.trajectory.append(TrajEvent(self.now, self.pos, kind, detail))

    def _fire_releases(self) -> bool:
        fired = False
        while self._queue and self._queue[0][0] <= self.now + 1e-12:
            t, i, loc = heapq.heappop(self._queue)
            if t < self.now - 1e-9:
                raise ValueError("release scheduled in the past")
            if i in self.released:
                raise ValueError(f"request {i} released twice")
            self.released[i] = Request(i, canon_point(self.space, loc), t)
            self._log(RELEASE, detail=i)
            fired = True
        return fired

    def emit_release(self, rid: int, loc, t: float) -> None:
        if t < self.now - 1e-9:
            raise ValueError("adversary released in the past")
        heapq.heappush(self._queue, (t, rid, loc))

    def run(self, policy) -> RunResult:
        self._fire_releases()
        adv_wake = self._adversary.step(self) if self._adversary else None
        waiting = False
        guard = 0
        while True:
            guard += 1
            if guard > 100000:
                raise SimulationStalled("no progress")
            act = policy.decide(self)
            kind = act[0]
            if kind == "finish":
                if waiting:
                    self._log(WAIT_END)
                self._finished = True
                self._log(FINISH)
                return RunResult(self.now, self.trajectory, dict(self.served))
            candidates = []
            if kind == "move":
                target = act[1]
                if not self.space.contains(target):
                    raise spaces.SpaceError(f"target {target!r} outside the space")
                target = canon_point(self.space, target)
                d = self.space.distance(self.pos, target)
                if waiting:
                    self._log(WAIT_END)
                    waiting = False
                if self._leg is None or self._leg[2] != target:
                    self._leg = (self.pos, self.now, target, self.now + d)
                    self._log(DEPART)
                candidates.append(self._leg[3])
            elif kind == "wait":
                self._leg = None
                if not waiting:
                    self._log(WAIT_START)
                    waiting = True
                if act[1] is not None:
                    candidates.append(act[1])
            else:
                raise ValueError(f"unknown action {act!r}")
            if self._queue:
                candidates.append(self._queue[0][0])
            if adv_wake is not None:
                candidates.append(adv_wake)
            candidates = [c for c in candidates if c is not None]
            if not candidates:
                raise SimulationStalled("policy waits forever and nothing is pending")
            t_next = min(candidates)
            t_next = max(t_next, self.now)
            # advance the server
            if self._leg is not None and t_next > self.now:
                frm, t0, target, t_arr = self._leg
                self.pos = self.space.move_along(frm, target, min(t_next, t_arr) - t0)
            self.now = t_next
            if self._leg is not None and t_next >= self._leg[3] - 1e-12:
                self.pos = self._leg[2]
                self._log(ARRIVE)
                self._leg = None
            self._fire_releases()
            if self._adversary is not None:
                adv_wake = self._adversary.step(self)


def simulate(instance: Instance, policy) -> RunResult:
    sim = Simulation(
        instance.space,
        instance.n,
        instance.predictions,
        instance.variant,
        releases=[(r.release, r.id, r.location) for r in instance.requests],
    )
    return sim.run(policy)


def run_adaptive(space: Space, adversary, policy_factory) -> tuple[RunResult, Instance]:
    """Play a policy against a release-time adversary; returns the run and
    the instance the adversary ended up realizing."""
    sim = Simulation(space, adversary.n, adversary.predictions, adversary.variant,
                     adversary=adversary)
    policy = policy_factory(space, adversary.n, adversary.predictions, adversary.variant)
    result = sim.run(policy)
    reqs = [sim.released[i] for i in sorted(sim.released)]
    if len(reqs) != adversary.n:
        raise RuntimeError("adversary did not release every request")
    inst = Instance(space, reqs, adversary.predictions, adversary.variant)
    return result, inst


class FollowOrderPolicy:
    """Serve the true locations in a fixed order, waiting at each request."""

    def __init__(self, instance: Instance, order):
        self.locations = instance.locations()
        self.order = list(order)
        self.variant = instance.variant
        self.origin = instance.origin
        self.i = 0

    def decide(self, sim: Simulation):
        while self.i < len(self.order):
            rid = self.order[self.i]
            loc = canon_point(sim.space, self.locations[rid])
            if sim.space.distance(sim.pos, loc) > TOL:
                return ("move", loc)
            if rid not in sim.released:
                return ("wait", None)
            sim.serve(rid)
            self.i += 1
        if self.variant == "closed" and sim.space.distance(sim.pos, self.origin) > TOL:
            return ("move", self.origin)
        return ("finish",)
