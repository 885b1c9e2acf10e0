"""Batching heuristics: partial integer optimization (PIO) and recomputed savings.

PIO keeps integrality only on the first ``tau`` trolleys of the remaining
problem.  Each round first finds the most baskets those trolleys can carry,
then solves the approximation model with that load pinned, fixes the orders
that landed on them and drops the trolleys.  Rounds repeat until every order
is placed.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

from . import approx_model
from .approx_model import ModelConfig
from .errors import HeuristicError, InfeasibleInstanceError, SolverError
from .instance import Batching, Instance, sort_orders
from .milp import BINARY, CONTINUOUS, INFEASIBLE, BackendConfig, MilpModel, solve
from .oracle import SubsetTable
from .router import NO_REVERSAL, PickTask, route_task

logger = logging.getLogger(__name__)

APPROX = "approx"
EXACT_ROUTE = "exact_route"
ESTIMATORS = (APPROX, EXACT_ROUTE)
SUBSET_TABLE_MAX_EDGES = 16


@dataclass(frozen=True)
class PioConfig:
    backend: BackendConfig
    tau: int = 1
    model: ModelConfig = ModelConfig()
    round_time_limit: float | None = None

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be >= 1")


@dataclass
class PioRun:
    batching: Batching
    rounds: list = field(default_factory=list)


def _round_backend(pio: PioConfig) -> BackendConfig:
    if pio.round_time_limit is None:
        return pio.backend
    return pio.backend.with_time_limit(pio.round_time_limit)


def _max_load(instance: Instance, tau: int, backend: BackendConfig):
    """Step (a): most baskets the first ``tau`` trolleys can take."""
    T, B = instance.num_trolleys, instance.capacity
    m = MilpModel("pio_load")
    z = {}
    for i, o in enumerate(instance.orders, 1):
        for t in range(1, T + 1):
            z[o.id, t] = m.add_var(f"z_o{i}_t{t}", 0, 1, BINARY if t <= tau else CONTINUOUS)
        m.add_constraint(f"assign_o{i}", [(z[o.id, t], 1) for t in range(1, T + 1)], "=", 1)
    for t in range(1, T + 1):
        m.add_constraint(
            f"cap_t{t}", [(z[o.id, t], o.baskets) for o in instance.orders], "<=", B
        )
    m.set_objective(
        [(z[o.id, t], -o.baskets) for o in instance.orders for t in range(1, tau + 1)]
    )
    res = solve(m, backend)
    if not res.has_solution:
        raise SolverError(f"PIO load step: solver status {res.status}", res)
    return int(round(-res.objective_value)), res


def _pinned_round(instance, cfg, tau, target, backend):
    """Step (b): approximation model, integral on trolleys 1..tau, load pinned."""
    model, cat = approx_model.build(instance, cfg, integer_trolleys=range(1, tau + 1))
    orders = cat.instance.orders
    model.add_constraint(
        "pio_load",
        [(cat.z[o.id, t], o.baskets) for o in orders for t in range(1, tau + 1)],
        "=",
        target,
    )
    return model, cat, solve(model, backend)


def pio_run(instance: Instance, pio: PioConfig) -> PioRun:
    """PIO with a per-round log (load target, objective, fixed orders, timings)."""
    instance.check_capacity()
    backend = _round_backend(pio)
    remaining = instance
    offset = 0
    assignment = {}
    rounds = []
    while remaining.orders:
        if pio.model.symmetry != "none":
            remaining = sort_orders(remaining)
        T = remaining.num_trolleys
        tau = min(pio.tau, T)
        start = time.perf_counter()
        target, _ = _max_load(remaining, tau, backend)
        cfg = pio.model
        model, cat, res = _pinned_round(remaining, cfg, tau, target, backend)
        if res.status == INFEASIBLE and cfg.symmetry != "none":
            # the symmetry rows pin the largest order to trolley 1, which the
            # load target may exclude
            cfg = replace(cfg, symmetry="none")
            model, cat, res = _pinned_round(remaining, cfg, tau, target, backend)
        if res.status == INFEASIBLE:
            raise HeuristicError(f"PIO round {len(rounds) + 1}: load target {target} infeasible")
        if not res.has_solution:
            raise SolverError(f"PIO round {len(rounds) + 1}: solver status {res.status}", res)
        fixed = {}
        for o in remaining.orders:
            for t in range(1, tau + 1):
                if res.value(cat.z[o.id, t]) > 0.5:
                    fixed[o.id] = t
        if sum(remaining.order_by_id(oid).baskets for oid in fixed) != target:
            raise HeuristicError(f"PIO round {len(rounds) + 1}: fixed load differs from {target}")
        for oid, t in fixed.items():
            assignment[oid] = offset + t
        rounds.append(
            {
                "round": len(rounds) + 1,
                "trolleys": [offset + t for t in range(1, tau + 1)],
                "load_target": target,
                "objective": res.objective_value,
                "status": res.status,
                "fixed_orders": sorted(fixed, key=lambda oid: (fixed[oid], oid)),
                "symmetry": cfg.symmetry,
                "wall_time": time.perf_counter() - start,
            }
        )
        logger.info("PIO round %d: %s", len(rounds), rounds[-1])
        left = [o for o in remaining.orders if o.id not in fixed]
        offset += tau
        if not left:
            break
        if T - tau < 1:
            raise HeuristicError(f"orders {[o.id for o in left]} left with no trolleys")
        remaining = remaining.replace(orders=left, num_trolleys=T - tau)
    batching = Batching({o.id: assignment[o.id] for o in instance.orders})
    batching.validate(instance)
    return PioRun(batching, rounds)


def pio_batch(instance: Instance, pio: PioConfig) -> Batching:
    return pio_run(instance, pio).batching


# -- savings --------------------------------------------------------------------


class _Estimator:
    def __init__(self, instance, kind, mode, backend, config):
        if kind not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if kind == EXACT_ROUTE and mode == NO_REVERSAL and backend is None:
            raise SolverError("exact no-reversal estimates need a solver backend")
        self.instance = instance
        self.kind = kind
        self.mode = mode
        self.backend = backend
        self.config = config
        self.cache = {}
        self.table = None
        n_edges = instance.layout.num_aisles * instance.layout.num_blocks
        if kind == APPROX and n_edges <= SUBSET_TABLE_MAX_EDGES:
            self.table = SubsetTable(instance.layout, config)
        elif kind == APPROX and backend is None:
            raise SolverError("approximate estimates on this layout need a solver backend")

    def __call__(self, group) -> float:
        key = frozenset(group)
        if key not in self.cache:
            self.cache[key] = self._compute(group)
        return self.cache[key]

    def _compute(self, group) -> float:
        inst = self.instance
        task = PickTask.for_orders(inst, group)
        if self.kind == EXACT_ROUTE:
            return route_task(task, self.mode, self.backend).distance
        if self.table is not None:
            return self.table.trolley_value(task.products)
        orders = [inst.order_by_id(oid) for oid in group]
        single = inst.replace(
            orders=orders, num_trolleys=1, capacity=max(inst.capacity, sum(o.baskets for o in orders))
        )
        return approx_model.solve_exact(single, self.config, self.backend).objective


def _first_fit_decreasing(instance: Instance):
    bins = []
    for o in sorted(instance.orders, key=lambda o: -o.baskets):
        for grp in bins:
            if grp[0] + o.baskets <= instance.capacity:
                grp[0] += o.baskets
                grp[1].append(o.id)
                break
        else:
            bins.append([o.baskets, [o.id]])
    return [grp[1] for grp in bins]


def savings_batch(
    instance: Instance,
    mode: str = NO_REVERSAL,
    estimator: str = EXACT_ROUTE,
    backend: BackendConfig | None = None,
    config: ModelConfig = ModelConfig(),
) -> Batching:
    """Clarke–Wright style merging with savings recomputed after every merge.

    Starts from one group per order.  While a capacity-feasible merge with a
    positive saving exists, or there are more groups than trolleys, the merge
    with the largest saving is applied (ties go to the lexicographically
    smallest pair of input positions).
    """
    instance.check_capacity()
    est = _Estimator(instance, estimator, mode, backend, config)
    pos = {o.id: i for i, o in enumerate(instance.orders)}
    baskets = {o.id: o.baskets for o in instance.orders}
    groups = [[o.id] for o in instance.orders]
    T, B = instance.num_trolleys, instance.capacity

    def load(g):
        return sum(baskets[oid] for oid in g)

    while True:
        best = None
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                a, b = groups[i], groups[j]
                if load(a) + load(b) > B:
                    continue
                saving = est(a) + est(b) - est(a + b)
                if best is None or saving > best[0] + 1e-9:
                    best = (saving, i, j)
        must = len(groups) > T
        if best is None or (best[0] <= 1e-9 and not must):
            if must:
                packed = _first_fit_decreasing(instance)
                if len(packed) > T:
                    raise InfeasibleInstanceError(
                        f"cannot place {len(instance.orders)} orders on {T} trolleys of capacity {B}"
                    )
                logger.info("savings merges stuck at %d groups; repacking", len(groups))
                groups = packed
                continue
            break
        _, i, j = best
        merged = sorted(groups[i] + groups[j], key=pos.get)
        groups = [g for k, g in enumerate(groups) if k not in (i, j)] + [merged]
        groups.sort(key=lambda g: pos[g[0]])
    batching = Batching.from_groups(groups)
    batching.validate(instance)
    return batching
