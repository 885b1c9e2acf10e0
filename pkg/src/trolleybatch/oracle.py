"""Exhaustive ground truth for tiny instances.

Nothing here calls a solver.  The approximation objective of a fixed
batching is evaluated in closed form over every subset of subaisles; routes
are found by enumerating edge multiplicities (no reversal) or pick
sequences (reversal).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .approx_model import ModelConfig
from .errors import OracleLimitError
from .instance import Batching, Instance
from .warehouse import ORIGIN, WarehouseLayout

NO_REVERSAL = "no_reversal"
REVERSAL = "reversal"
MODES = (NO_REVERSAL, REVERSAL)


@dataclass(frozen=True)
class OracleLimits:
    max_orders: int = 6
    max_trolleys: int = 3
    max_aisle_edges: int = 16
    max_picks_per_trolley: int = 7
    max_vertical_edges: int = 13


def _check(instance: Instance, limits: OracleLimits):
    if len(instance.orders) > limits.max_orders:
        raise OracleLimitError(f"{len(instance.orders)} orders > {limits.max_orders}")
    if instance.num_trolleys > limits.max_trolleys:
        raise OracleLimitError(f"{instance.num_trolleys} trolleys > {limits.max_trolleys}")
    n_edges = instance.layout.num_aisles * instance.layout.num_blocks
    if n_edges > limits.max_aisle_edges:
        raise OracleLimitError(f"{n_edges} aisle edges > {limits.max_aisle_edges}")


def enumerate_batchings(instance: Instance, limits: OracleLimits = OracleLimits()):
    """Yield every capacity-feasible batching once per trolley relabelling.

    The canonical representative puts order 1 on trolley 1 and opens trolley
    ``k + 1`` only for the lowest-indexed order not on trolleys ``1..k``.
    """
    _check(instance, limits)
    orders = instance.orders
    T, B = instance.num_trolleys, instance.capacity

    def rec(i, labels, loads):
        if i == len(orders):
            yield Batching({o.id: t for o, t in zip(orders, labels)})
            return
        b = orders[i].baskets
        for t in range(1, min(len(loads) + 1, T) + 1):
            if t <= len(loads):
                if loads[t - 1] + b > B:
                    continue
                loads[t - 1] += b
                yield from rec(i + 1, labels + [t], loads)
                loads[t - 1] -= b
            else:
                yield from rec(i + 1, labels + [t], loads + [b])

    yield from rec(0, [], [])


# -- closed-form approximation ----------------------------------------------


class SubsetTable:
    """Per-subset terms of the approximation, shared across trolleys."""

    def __init__(self, layout: WarehouseLayout, config: ModelConfig):
        self.layout = layout
        self.edges = layout.subaisles()
        m = len(self.edges)
        WA, WB = layout.num_aisles, layout.num_blocks
        masks = np.arange(1 << m, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
        self.bits = bits
        lengths = np.array([layout.subaisle_length(s) for s in self.edges])
        aisle = np.array([s.aisle for s in self.edges])
        block = np.array([s.block for s in self.edges])
        d1 = np.array([layout.cross_distance(1, a) for a in range(1, WA + 1)])
        d0 = np.array([layout.origin_to_aisle(a) for a in range(1, WA + 1)])

        g1 = bits[:, block == 1][:, np.argsort(aisle[block == 1])]
        self.has_g1 = g1.any(axis=1)
        f1 = np.argmax(g1, axis=1)
        l1 = WA - 1 - np.argmax(g1[:, ::-1], axis=1)
        cost = bits @ lengths + d0[f1] + d0[l1] + d1[l1] - d1[f1]
        if config.multiblock_extension and WB >= 2:
            deep = np.zeros((len(masks), WA), dtype=bool)
            for k in np.nonzero(block >= 2)[0]:
                deep[:, aisle[k] - 1] |= bits[:, k]
            any_deep = deep.any(axis=1)
            f2 = np.argmax(deep, axis=1)
            l2 = WA - 1 - np.argmax(deep[:, ::-1], axis=1)
            extra = 2 * np.maximum(0, d1[f1] - d1[f2]) + 2 * np.maximum(0, d1[l2] - d1[l1])
            cost = cost + np.where(any_deep, extra, 0.0)
        if config.parity_terms:
            for b in range(1, WB + 1):
                odd = bits[:, block == b].sum(axis=1) % 2
                cost = cost + layout.min_block_subaisle(b) * odd
        self.cost = cost
        self.index = {s: k for k, s in enumerate(self.edges)}

    def trolley_value(self, products) -> float:
        ok = self.has_g1.copy()
        for p in products:
            cols = [self.index[s] for s in p.subaisles]
            ok &= self.bits[:, cols].any(axis=1)
        return float(self.cost[ok].min())


def eval_approx_objective(
    instance: Instance,
    batching: Batching,
    config: ModelConfig = ModelConfig(),
    limits: OracleLimits = OracleLimits(),
    table=None,
) -> float:
    """Approximation objective of ``batching``, minimised over subaisle subsets."""
    _check(instance, limits)
    table = table or SubsetTable(instance.layout, config)
    total = 0.0
    for t in range(1, instance.num_trolleys + 1):
        oids = batching.trolley_orders(t)
        if not oids:
            continue
        total += table.trolley_value(_trolley_products(instance, oids))
    return total


def approx_optimum(
    instance: Instance,
    config: ModelConfig = ModelConfig(),
    limits: OracleLimits = OracleLimits(),
):
    """Minimum of :func:`eval_approx_objective` over canonical batchings."""
    table = SubsetTable(instance.layout, config)
    cache = {}
    best = (float("inf"), None)
    for batching in enumerate_batchings(instance, limits):
        total = 0.0
        for t in range(1, instance.num_trolleys + 1):
            oids = batching.trolley_orders(t)
            if not oids:
                continue
            key = frozenset(oids)
            if key not in cache:
                cache[key] = table.trolley_value(_trolley_products(instance, oids))
            total += cache[key]
        if total < best[0] - 1e-12:
            best = (total, batching)
    if best[1] is None:
        return 0.0, Batching({})
    return best


def _trolley_products(instance: Instance, oids):
    seen = {}
    for oid in oids:
        for p in instance.order_products(instance.order_by_id(oid)):
            seen[p.id] = p
    return list(seen.values())


# -- exhaustive routing -----------------------------------------------------


def _connected(edge_list, n_vertices):
    parent = list(range(n_vertices))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    touched = {ORIGIN}
    for u, v in edge_list:
        parent[find(u)] = find(v)
        touched.update((u, v))
    root = find(ORIGIN)
    return all(find(v) == root for v in touched)


def no_reversal_distance(layout: WarehouseLayout, products, limits=OracleLimits()):
    """Shortest closed walk from the origin fully traversing one Q(p) subaisle per product.

    Returns ``(distance, multigraph)`` where ``multigraph`` maps
    ``(u, v, kind)`` to a traversal count.  Multiplicities range over
    ``{0, 1, 2}``.  Cross-aisle segments form a path per cross-aisle, so
    once the vertical counts are fixed each segment's parity is forced and
    only the choice between 0 and 2 on even segments is enumerated.  Blocks
    below the deepest candidate subaisle are not entered: with equal gaps in
    every cross-aisle such an excursion can always be replaced by the same
    horizontal move one cross-aisle higher.
    """
    qsets = [sorted(p.subaisles) for p in products]
    if not qsets:
        return 0.0, {}
    WA = layout.num_aisles
    depth = max(s.block for q in qsets for s in q)
    edges = layout.edges()
    vertical = [e for e in edges if e.kind == "origin"] + [
        e
        for e in edges
        if e.kind == "aisle" and layout.vertex_position(e.v)[1] - 1 <= depth
    ]
    if len(vertical) > limits.max_vertical_edges:
        raise OracleLimitError(
            f"{len(vertical)} vertical edges > {limits.max_vertical_edges}"
        )
    rows = range(1, depth + 2)
    gaps = np.array(layout.cross_gaps)
    nv = len(vertical)

    counts = np.array(list(itertools.product((0, 1, 2), repeat=nv)), dtype=np.int8)
    vlen = np.array([e.length for e in vertical])
    origin_cols = [k for k, e in enumerate(vertical) if e.kind == "origin"]
    ok = counts[:, origin_cols].sum(axis=1) % 2 == 0
    col_of = {}
    for k, e in enumerate(vertical):
        if e.kind == "aisle":
            a, c = layout.vertex_position(e.u)
            col_of[(a, c)] = k
    for q in qsets:
        ok &= (counts[:, [col_of[tuple(s)] for s in q]] >= 1).any(axis=1)
    counts = counts[ok]
    if len(counts) == 0:
        raise ValueError("no covering multigraph exists")

    # vertex parity per grid vertex from vertical edges
    n_all = layout.num_vertices + 1
    parity = np.zeros((len(counts), n_all), dtype=np.int8)
    for k, e in enumerate(vertical):
        parity[:, e.u] += counts[:, k]
        parity[:, e.v] += counts[:, k]
    parity %= 2
    seg_parity = {}
    lb = counts @ vlen
    feasible = np.ones(len(counts), dtype=bool)
    for r in rows:
        vids = [layout.vertex_id(a, r) for a in range(1, WA + 1)]
        cum = np.cumsum(parity[:, vids], axis=1) % 2
        feasible &= cum[:, -1] == 0
        seg = cum[:, :-1]
        seg_parity[r] = seg
        lb = lb + seg @ gaps
    order = np.argsort(lb[feasible], kind="stable")
    cand = np.nonzero(feasible)[0][order]

    best, best_graph = np.inf, None
    for idx in cand:
        base = lb[idx]
        if base >= best - 1e-12:
            break
        even = [(r, k) for r in rows for k in range(WA - 1) if seg_parity[r][idx, k] == 0]
        options = []
        for doubled in itertools.product((0, 1), repeat=len(even)):
            extra = sum(2 * gaps[k] for (r, k), d in zip(even, doubled) if d)
            options.append((extra, doubled))
        options.sort(key=lambda o: o[0])
        for extra, doubled in options:
            if base + extra >= best - 1e-12:
                break
            graph = {}
            for k, e in enumerate(vertical):
                if counts[idx, k]:
                    graph[(e.u, e.v, e.kind)] = int(counts[idx, k])
            dmap = dict(zip(even, doubled))
            for r in rows:
                for k in range(WA - 1):
                    c = 1 if seg_parity[r][idx, k] else 2 * dmap[(r, k)]
                    if c:
                        u, v = layout.vertex_id(k + 1, r), layout.vertex_id(k + 2, r)
                        graph[(u, v, "cross")] = c
            if _connected([(u, v) for u, v, _ in graph], n_all):
                best, best_graph = base + extra, graph
                break
    return float(best), best_graph


def reversal_distance(layout: WarehouseLayout, products, limits=OracleLimits()):
    """Shortest closed walk through one candidate point per product.

    Brute force over location choices and visiting orders.  Returns
    ``(distance, sequence)`` with ``sequence`` the visited points.
    """
    if not products:
        return 0.0, []
    n = len(products)
    if n > limits.max_picks_per_trolley:
        raise OracleLimitError(f"{n} picks > {limits.max_picks_per_trolley}")
    perms = np.array(list(itertools.permutations(range(1, n + 1))))
    best, best_seq = np.inf, None
    for choice in itertools.product(*[p.locations for p in products]):
        pts = [ORIGIN] + list(choice)
        D = np.array([[layout.shortest_distance(a, b) for b in pts] for a in pts])
        cost = D[0, perms[:, 0]] + D[perms[:, -1], 0]
        if n > 1:
            cost = cost + D[perms[:, :-1], perms[:, 1:]].sum(axis=1)
        k = int(np.argmin(cost))
        if cost[k] < best - 1e-12:
            best = float(cost[k])
            best_seq = [pts[i] for i in perms[k]]
    return best, best_seq


def route_distance(layout, products, mode, limits=OracleLimits()) -> float:
    if mode == NO_REVERSAL:
        return no_reversal_distance(layout, products, limits)[0]
    if mode == REVERSAL:
        return reversal_distance(layout, products, limits)[0]
    raise ValueError(f"mode must be one of {MODES}")


def joint_optimal(instance: Instance, mode=NO_REVERSAL, limits=OracleLimits()):
    """Best total routed distance over all canonical batchings.

    Returns ``(value, batching)``.
    """
    cache = {}
    best = (float("inf"), None)
    for batching in enumerate_batchings(instance, limits):
        total = 0.0
        for t in range(1, instance.num_trolleys + 1):
            oids = batching.trolley_orders(t)
            if not oids:
                continue
            prods = _trolley_products(instance, oids)
            key = frozenset(p.id for p in prods)
            if key not in cache:
                cache[key] = route_distance(instance.layout, prods, mode, limits)
            total += cache[key]
            if total >= best[0]:
                break
        if total < best[0] - 1e-12:
            best = (total, batching)
    if best[1] is None:
        return 0.0, Batching({})
    return best
