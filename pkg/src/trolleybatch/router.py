"""Exact routing of one trolley once its orders are fixed."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import CutLoopError, RoutingCapacityError, SolverError, TrolleyBatchError
from .instance import Batching, Instance, Product
from .milp import BINARY, INTEGER, BackendConfig, MilpModel, require_solution, solve
from .warehouse import ORIGIN, Location, WarehouseLayout

logger = logging.getLogger(__name__)

NO_REVERSAL = "no_reversal"
REVERSAL = "reversal"
MODES = (NO_REVERSAL, REVERSAL)
DEFAULT_GTSP_CAP = 14


@dataclass(frozen=True)
class PickTask:
    layout: WarehouseLayout
    products: tuple

    @classmethod
    def for_orders(cls, instance: Instance, order_ids) -> "PickTask":
        seen = {}
        for oid in order_ids:
            for p in instance.order_products(instance.order_by_id(oid)):
                seen[p.id] = p
        return cls(instance.layout, tuple(seen.values()))


@dataclass
class Route:
    walk: list
    distance: float
    mode: str

    def to_dict(self, trolley=None) -> dict:
        out = {"distance": self.distance, "mode": self.mode, "walk": [_describe(p) for p in self.walk]}
        if trolley is not None:
            out = {"trolley": trolley, **out}
        return out

    def covers(self, layout: WarehouseLayout, products) -> bool:
        """Whether the walk picks every product under its mode's rules."""
        if self.mode == NO_REVERSAL:
            traversed = set()
            for p, q in zip(self.walk, self.walk[1:]):
                if isinstance(p, int) and isinstance(q, int) and p and q:
                    (a1, c1), (a2, c2) = layout.vertex_position(p), layout.vertex_position(q)
                    if a1 == a2 and abs(c1 - c2) == 1:
                        traversed.add((a1, min(c1, c2)))
            return all(p.subaisles & traversed for p in products)
        on_walk = set()
        for pt in self.walk:
            on_walk.add(layout.normalize_point(pt))
        return all(
            any(layout.normalize_point(loc) in on_walk for loc in p.locations) for p in products
        )


def _describe(p):
    if isinstance(p, Location):
        return {"aisle": p.aisle, "block": p.block, "offset": p.offset}
    return int(p)


def _undescribe(d):
    if isinstance(d, dict):
        return Location(d["aisle"], d["block"], float(d["offset"]))
    return int(d)


def route_from_dict(d: dict) -> Route:
    return Route([_undescribe(p) for p in d["walk"]], float(d["distance"]), d["mode"])


# -- Euler tour ---------------------------------------------------------------


def euler_tour(multigraph, start=ORIGIN) -> list[int]:
    """Lexicographically smallest Eulerian circuit from ``start``.

    ``multigraph`` maps ``(u, v, ...)`` keys to multiplicities.  Greedy
    smallest-neighbour choice, skipping bridges while an alternative exists
    (Fleury), gives the smallest vertex sequence.
    """
    adj = {}
    for key, count in multigraph.items():
        u, v = key[0], key[1]
        if count <= 0:
            continue
        adj.setdefault(u, Counter())[v] += count
        adj.setdefault(v, Counter())[u] += count
    if not adj:
        return [start]
    if start not in adj or any(sum(c.values()) % 2 for c in adj.values()):
        raise ValueError("multigraph has no Euler circuit from the start vertex")

    def reachable(src, dst):
        stack, seen = [src], {src}
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            for y, c in adj[x].items():
                if c > 0 and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    walk = [start]
    cur = start
    remaining = sum(multigraph.values())
    while remaining:
        options = sorted(w for w, c in adj[cur].items() if c > 0)
        if not options:
            raise ValueError("multigraph has no Euler circuit from the start vertex")
        chosen = options[-1]
        for w in options:
            adj[cur][w] -= 1
            adj[w][cur] -= 1
            ok = len(options) == 1 or sum(adj[cur].values()) == 0 or reachable(w, cur)
            adj[cur][w] += 1
            adj[w][cur] += 1
            if ok:
                chosen = w
                break
        adj[cur][chosen] -= 1
        adj[chosen][cur] -= 1
        walk.append(chosen)
        cur = chosen
        remaining -= 1
    if cur != start:
        raise ValueError("multigraph has no Euler circuit from the start vertex")
    return walk


# -- no reversal: required-edge postman ILP ------------------------------------


def _components(edges, n):
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    touched = set()
    for u, v in edges:
        parent[find(u)] = find(v)
        touched.update((u, v))
    groups = {}
    for v in touched:
        groups.setdefault(find(v), set()).add(v)
    return list(groups.values())


def route_no_reversal(
    task: PickTask, backend: BackendConfig, max_iterations: int = 1000
) -> Route:
    """Minimum closed walk traversing, end to end, one Q(p) subaisle per product."""
    layout = task.layout
    if not task.products:
        return Route([ORIGIN], 0.0, NO_REVERSAL)
    edges = layout.edges()
    required = sorted({s for p in task.products for s in p.subaisles})

    m = MilpModel("postman")
    cname = {}
    for e in edges:
        cname[e] = m.add_var(f"c_{e.kind}_{e.u}_{e.v}", 0, 2, INTEGER)
    aisle_var = {}
    for e in edges:
        if e.kind == "aisle":
            aisle_var[layout.vertex_position(e.u)] = cname[e]
    uname = {s: m.add_var(f"u_a{s.aisle}_b{s.block}", 0, 1, BINARY) for s in required}
    incident = {}
    for e in edges:
        incident.setdefault(e.u, []).append(e)
        incident.setdefault(e.v, []).append(e)
    for v, inc in incident.items():
        k = m.add_var(f"k_v{v}", 0, len(inc), INTEGER)
        m.add_constraint(f"even_v{v}", [(cname[e], 1) for e in inc] + [(k, -2)], "=", 0)
    for s in required:
        m.add_constraint(
            f"link_a{s.aisle}_b{s.block}", [(aisle_var[tuple(s)], 1), (uname[s], -1)], ">=", 0
        )
        m.add_constraint(
            f"origin_a{s.aisle}_b{s.block}",
            [(cname[e], 1) for e in incident[ORIGIN]] + [(uname[s], -2)],
            ">=",
            0,
        )
    for i, p in enumerate(task.products, 1):
        m.add_constraint(f"cover_p{i}", [(uname[s], 1) for s in sorted(p.subaisles)], ">=", 1)
    m.set_objective([(cname[e], e.length) for e in edges])

    seen_cuts = set()
    n_all = layout.num_vertices + 1
    for it in range(max_iterations):
        result = require_solution(solve(m, backend), "postman ILP")
        graph = {
            (e.u, e.v, e.kind): int(round(result.value(cname[e])))
            for e in edges
            if result.value(cname[e]) > 0.5
        }
        comps = _components([(u, v) for u, v, _ in graph], n_all)
        stray = [S for S in comps if ORIGIN not in S]
        if not stray:
            walk = euler_tour(graph)
            dist = float(sum(c * e.length for e in edges for c in [graph.get((e.u, e.v, e.kind), 0)]))
            logger.debug("postman converged after %d cut rounds", it)
            return Route(walk, dist, NO_REVERSAL)
        added = 0
        home = next((S for S in comps if ORIGIN in S), {ORIGIN})
        outside = set(range(n_all)) - home
        for S in stray + [outside]:
            cut = [e for e in edges if (e.u in S) != (e.v in S)]
            for s in required:
                north, south = layout.subaisle_vertices(s)
                if north in S and south in S:
                    key = (frozenset(S), s)
                    if key in seen_cuts:
                        continue
                    seen_cuts.add(key)
                    m.add_constraint(
                        f"cut{len(seen_cuts)}",
                        [(cname[e], 1) for e in cut] + [(uname[s], -2)],
                        ">=",
                        0,
                    )
                    added += 1
        if not added:
            raise CutLoopError("disconnected solution but no new connectivity cut found")
    raise CutLoopError(f"no connected route after {max_iterations} cut rounds")


# -- reversal: generalized TSP by dynamic programming --------------------------


def route_reversal(task: PickTask, cap: int = DEFAULT_GTSP_CAP) -> Route:
    """Minimum closed walk passing one candidate point of every product."""
    layout = task.layout
    n = len(task.products)
    if n == 0:
        return Route([ORIGIN], 0.0, REVERSAL)
    if n > cap:
        raise RoutingCapacityError(
            f"{n} products exceed the reversal DP cap of {cap}; "
            "route in no-reversal mode or split the trolley"
        )
    points, cluster = [ORIGIN], [-1]
    for c, p in enumerate(task.products):
        for loc in p.locations:
            points.append(layout.normalize_point(loc))
            cluster.append(c)
    N = len(points)
    D = np.array([[layout.shortest_distance(a, b) for b in points] for a in points])
    cluster = np.array(cluster)
    members = [np.nonzero(cluster == c)[0] for c in range(n)]

    full = (1 << n) - 1
    dp = np.full((1 << n, N), np.inf)
    parent = np.full((1 << n, N), -1, dtype=np.int64)
    for c in range(n):
        dp[1 << c, members[c]] = D[0, members[c]]
    for mask in range(1, full + 1):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        for c in range(n):
            if mask >> c & 1:
                continue
            cols = members[c]
            cand = row[:, None] + D[:, cols]
            best_from = np.argmin(cand, axis=0)
            vals = cand[best_from, np.arange(len(cols))]
            nxt = mask | 1 << c
            better = vals < dp[nxt, cols] - 1e-12
            dp[nxt, cols[better]] = vals[better]
            parent[nxt, cols[better]] = best_from[better]
    closing = dp[full] + D[:, 0]
    last = int(np.argmin(closing))
    total = float(closing[last])

    seq, mask, j = [], full, last
    while j > 0:
        seq.append(points[j])
        prev = int(parent[mask, j])
        mask &= ~(1 << int(cluster[j]))
        j = prev
    seq.reverse()

    walk = [ORIGIN]
    for p in seq + [ORIGIN]:
        leg = layout.shortest_path(walk[-1], p)
        walk.extend(leg[1:])
    return Route(walk, total, REVERSAL)


# -- per-trolley driver -------------------------------------------------------


def route_task(task: PickTask, mode: str, backend=None, cap=DEFAULT_GTSP_CAP) -> Route:
    if mode == NO_REVERSAL:
        if backend is None:
            raise SolverError("no-reversal routing needs a solver backend")
        return route_no_reversal(task, backend)
    if mode == REVERSAL:
        return route_reversal(task, cap)
    raise ValueError(f"mode must be one of {MODES}")


def route_batching(
    instance: Instance,
    batching: Batching,
    mode: str = NO_REVERSAL,
    backend: BackendConfig | None = None,
    cap: int = DEFAULT_GTSP_CAP,
):
    """Route every trolley independently; returns ``({t: Route}, total)``."""
    batching.validate(instance)
    routes = {}
    for t in range(1, instance.num_trolleys + 1):
        oids = batching.trolley_orders(t)
        task = PickTask.for_orders(instance, oids)
        try:
            routes[t] = route_task(task, mode, backend, cap)
        except TrolleyBatchError as exc:
            exc.args = (f"trolley {t}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
    return routes, float(sum(r.distance for r in routes.values()))
