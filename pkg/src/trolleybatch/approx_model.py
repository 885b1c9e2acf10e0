"""The distance-approximation batching MILP.

Each trolley ``t`` is charged the aisle edges it uses, the trip from the
origin to its westmost and back from its eastmost block-1 aisle, the
cross-aisle span between them and, optionally, extra cross-aisle travel
to aisles reached only in deeper blocks plus one subaisle per block
traversed an odd number of times.  Routes are not modelled; batches are.

Variable names (all MPS-safe):

========================  =============================================
``z_o{i}_t{t}``           order ``i`` (build order) on trolley ``t``
``x_t{t}_a{a}_b{b}``      subaisle ``(a, b)`` used by trolley ``t``
``alpha_t{t}``            trolley used
``beta1_t{t}_a{a}``       block-1 subaisle of aisle ``a`` used
``gF1_/gL1_t{t}_a{a}``    westmost / eastmost block-1 aisle
``dwe_t{t}``              cross-aisle distance charged
``ahat_t{t}``             some block >= 2 subaisle used
``beta2_t{t}_a{a}``       aisle ``a`` used in some block >= 2
``gF2_/gL2_t{t}_a{a}``    westmost / eastmost aisle over blocks >= 2
``zF_t{t}``, ``zL_t{t}``  extra westward / eastward excursion
``y_t{t}_b{b}``           odd number of subaisles used in block ``b``
``w_t{t}_b{b}``           half the even part of that count
========================  =============================================
"""

from __future__ import annotations

import math
import time
from collections import defaultdict
from dataclasses import dataclass, field, replace

from .errors import ExtractionError
from .instance import Batching, Instance, min_trolleys, prune_dominated, sort_orders
from .milp import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    BackendConfig,
    MilpModel,
    SolveResult,
    require_solution,
    solve,
)
from .milp.model import INT_TOL

SYMMETRY_LEVELS = ("none", "basic", "strong")


@dataclass(frozen=True)
class ModelConfig:
    multiblock_extension: bool = True
    parity_terms: bool = True
    symmetry: str = "strong"
    valid_inequalities: bool = True
    prune_dominated: bool = True

    def __post_init__(self):
        if self.symmetry not in SYMMETRY_LEVELS:
            raise ValueError(f"symmetry must be one of {SYMMETRY_LEVELS}")

    @classmethod
    def basic(cls) -> "ModelConfig":
        """Only the single-block formulation: no extension, parity, symmetry or cuts."""
        return cls(False, False, "none", False, False)


@dataclass
class VariableCatalog:
    instance: Instance
    config: ModelConfig
    order_ids: list
    z: dict = field(default_factory=dict)
    x: dict = field(default_factory=dict)
    alpha: dict = field(default_factory=dict)
    beta1: dict = field(default_factory=dict)
    gF1: dict = field(default_factory=dict)
    gL1: dict = field(default_factory=dict)
    dwe: dict = field(default_factory=dict)
    ahat: dict = field(default_factory=dict)
    beta2: dict = field(default_factory=dict)
    gF2: dict = field(default_factory=dict)
    gL2: dict = field(default_factory=dict)
    zF: dict = field(default_factory=dict)
    zL: dict = field(default_factory=dict)
    y: dict = field(default_factory=dict)
    w: dict = field(default_factory=dict)

    @property
    def num_trolleys(self) -> int:
        return self.instance.num_trolleys

    def used_subaisles(self, result: SolveResult, t: int) -> list:
        return [
            s
            for (tt, s), name in self.x.items()
            if tt == t and result.value(name) > 0.5
        ]


def _singleton_sets(instance: Instance):
    """Phi: subaisle -> order ids needing it; plus per-order singleton aisles."""
    phi = defaultdict(list)
    aisles = {}
    for o in instance.orders:
        single = set()
        for p in instance.order_products(o):
            if len(p.subaisles) == 1:
                (s,) = p.subaisles
                single.add(s)
        for s in sorted(single):
            phi[s].append(o.id)
        aisles[o.id] = sorted({s.aisle for s in single})
    return phi, aisles


def build(
    instance: Instance,
    config: ModelConfig = ModelConfig(),
    integer_trolleys=None,
    name="batching",
):
    """Build the approximation MILP.  Returns ``(model, catalog)``.

    ``integer_trolleys`` limits integrality of ``z``, ``x`` and ``w`` to the
    given trolley indices (all trolleys when ``None``); the rest are relaxed
    to ``[0, 1]`` / ``[0, W_A // 2]``.
    """
    instance.check_capacity()
    if config.symmetry != "none":
        instance = sort_orders(instance)
    layout = instance.layout
    T, B = instance.num_trolleys, instance.capacity
    WA, WB = layout.num_aisles, layout.num_blocks
    trolleys = range(1, T + 1)
    aisles = range(1, WA + 1)
    blocks = range(1, WB + 1)
    E = layout.subaisles()
    deep = [s for s in E if s.block >= 2]
    d1 = {a: layout.cross_distance(1, a) for a in aisles}
    d0 = {a: layout.origin_to_aisle(a) for a in aisles}
    d1_max = d1[WA]
    orders = list(instance.orders)
    integer = set(trolleys) if integer_trolleys is None else set(integer_trolleys)
    ext = config.multiblock_extension
    parity = config.parity_terms

    m = MilpModel(name)
    cat = VariableCatalog(instance, config, [o.id for o in orders])

    def cont01(n):
        return m.add_var(n, 0.0, 1.0, CONTINUOUS)

    for i, o in enumerate(orders, 1):
        for t in trolleys:
            cat.z[o.id, t] = m.add_var(
                f"z_o{i}_t{t}", 0, 1, BINARY if t in integer else CONTINUOUS
            )
    for t in trolleys:
        kind = BINARY if t in integer else CONTINUOUS
        for s in E:
            cat.x[t, s] = m.add_var(f"x_t{t}_a{s.aisle}_b{s.block}", 0, 1, kind)
        cat.alpha[t] = cont01(f"alpha_t{t}")
        for a in aisles:
            cat.beta1[t, a] = cont01(f"beta1_t{t}_a{a}")
            cat.gF1[t, a] = cont01(f"gF1_t{t}_a{a}")
            cat.gL1[t, a] = cont01(f"gL1_t{t}_a{a}")
        cat.dwe[t] = m.add_var(f"dwe_t{t}", 0.0)
        if ext:
            cat.ahat[t] = cont01(f"ahat_t{t}")
            for a in aisles:
                cat.beta2[t, a] = cont01(f"beta2_t{t}_a{a}")
                cat.gF2[t, a] = cont01(f"gF2_t{t}_a{a}")
                cat.gL2[t, a] = cont01(f"gL2_t{t}_a{a}")
            cat.zF[t] = m.add_var(f"zF_t{t}", 0.0)
            cat.zL[t] = m.add_var(f"zL_t{t}", 0.0)
        if parity:
            for b in blocks:
                cat.y[t, b] = cont01(f"y_t{t}_b{b}")
                cat.w[t, b] = m.add_var(
                    f"w_t{t}_b{b}", 0, WA // 2, INTEGER if t in integer else CONTINUOUS
                )

    obj = []
    for t in trolleys:
        obj += [(cat.x[t, s], layout.subaisle_length(s)) for s in E]
        for a in aisles:
            obj += [(cat.gF1[t, a], d0[a]), (cat.gL1[t, a], d0[a])]
        obj.append((cat.dwe[t], 1.0))
        if parity:
            obj += [(cat.y[t, b], layout.min_block_subaisle(b)) for b in blocks]
    m.set_objective(obj)

    add = m.add_constraint
    for i, o in enumerate(orders, 1):
        add(f"assign_o{i}", [(cat.z[o.id, t], 1) for t in trolleys], "=", 1)
    for t in trolleys:
        al = cat.alpha[t]
        for i, o in enumerate(orders, 1):
            add(f"use_o{i}_t{t}", [(cat.z[o.id, t], 1), (al, -1)], "<=", 0)
        add(f"used_t{t}", [(al, 1)] + [(cat.z[o.id, t], -1) for o in orders], "<=", 0)
        add(
            f"cap_t{t}",
            [(cat.z[o.id, t], o.baskets) for o in orders] + [(al, -B)],
            "<=",
            0,
        )
        for s in E:
            add(f"xuse_t{t}_a{s.aisle}_b{s.block}", [(cat.x[t, s], 1), (al, -1)], "<=", 0)
        add(f"xany_t{t}", [(al, 1)] + [(cat.x[t, s], -1) for s in E], "<=", 0)
        for a in aisles:
            add(f"beta1_t{t}_a{a}", [(cat.beta1[t, a], 1), (cat.x[t, (a, 1)], -1)], "=", 0)
        _first_last(add, cat.beta1, cat.gF1, cat.gL1, al, t, aisles, "1")

        for i, o in enumerate(orders, 1):
            pids = (
                prune_dominated(o, instance.catalog)
                if config.prune_dominated
                else list(o.product_ids)
            )
            for pid in pids:
                q = sorted(instance.catalog[pid].subaisles)
                add(
                    f"cover_o{i}_{_safe(pid)}_t{t}",
                    [(cat.x[t, s], 1) for s in q] + [(cat.z[o.id, t], -1)],
                    ">=",
                    0,
                )

        span = [(cat.gL1[t, a], -d1[a]) for a in aisles] + [
            (cat.gF1[t, a], d1[a]) for a in aisles
        ]
        if not ext:
            add(f"dwe_t{t}", [(cat.dwe[t], 1)] + span, ">=", 0)
        else:
            ah = cat.ahat[t]
            add(f"ahat_le_t{t}", [(ah, 1), (al, -1)], "<=", 0)
            for s in deep:
                add(
                    f"ahat_ge_t{t}_a{s.aisle}_b{s.block}",
                    [(ah, 1), (cat.x[t, s], -1)],
                    ">=",
                    0,
                )
            add(f"ahat_any_t{t}", [(ah, 1)] + [(cat.x[t, s], -1) for s in deep], "<=", 0)
            for a in aisles:
                add(f"beta2_le_t{t}_a{a}", [(cat.beta2[t, a], 1), (ah, -1)], "<=", 0)
                for b in blocks:
                    if b >= 2:
                        add(
                            f"beta2_ge_t{t}_a{a}_b{b}",
                            [(cat.beta2[t, a], 1), (cat.x[t, (a, b)], -1)],
                            ">=",
                            0,
                        )
            _first_last(add, cat.beta2, cat.gF2, cat.gL2, ah, t, aisles, "2")
            add(
                f"zF_t{t}",
                [(cat.zF[t], 1), (ah, -2 * d1_max)]
                + [(cat.gF1[t, a], -2 * d1[a]) for a in aisles]
                + [(cat.gF2[t, a], 2 * d1[a]) for a in aisles],
                ">=",
                -2 * d1_max,
            )
            add(
                f"zL_t{t}",
                [(cat.zL[t], 1)]
                + [(cat.gL2[t, a], -2 * d1[a]) for a in aisles]
                + [(cat.gL1[t, a], 2 * d1[a]) for a in aisles],
                ">=",
                0,
            )
            add(
                f"dwe_t{t}",
                [(cat.dwe[t], 1), (cat.zF[t], -1), (cat.zL[t], -1)] + span,
                ">=",
                0,
            )
        if parity:
            for b in blocks:
                add(
                    f"parity_t{t}_b{b}",
                    [(cat.x[t, s], 1) for s in layout.block_edges(b)]
                    + [(cat.w[t, b], -2), (cat.y[t, b], -1)],
                    "=",
                    0,
                )

    _symmetry(add, cat, orders, T, config.symmetry)
    if config.valid_inequalities:
        for row in build_valid_inequalities(instance, cat):
            add(*row)
    return m, cat


def _first_last(add, beta, gF, gL, used, t, aisles, tag):
    """Westmost/eastmost indicator rows for one family of aisle indicators."""
    add(f"gF{tag}_sum_t{t}", [(gF[t, a], 1) for a in aisles] + [(used, -1)], "=", 0)
    add(f"gL{tag}_sum_t{t}", [(gL[t, a], 1) for a in aisles] + [(used, -1)], "=", 0)
    for a in aisles:
        add(f"gF{tag}_le_t{t}_a{a}", [(gF[t, a], 1), (beta[t, a], -1)], "<=", 0)
        add(
            f"gF{tag}_ge_t{t}_a{a}",
            [(gF[t, a], 1), (beta[t, a], -1)] + [(beta[t, e], 1) for e in aisles if e < a],
            ">=",
            0,
        )
        add(f"gL{tag}_le_t{t}_a{a}", [(gL[t, a], 1), (beta[t, a], -1)], "<=", 0)
        add(
            f"gL{tag}_ge_t{t}_a{a}",
            [(gL[t, a], 1), (beta[t, a], -1)] + [(beta[t, e], 1) for e in aisles if e > a],
            ">=",
            0,
        )


def _symmetry(add, cat, orders, T, level):
    if level == "none":
        return
    n = len(orders)
    for o in range(1, min(T, n) + 1):
        oid = orders[o - 1].id
        add(f"sym_first_o{o}", [(cat.z[oid, t], 1) for t in range(1, o + 1)], "=", 1)
        for t in range(o + 1, T + 1):
            add(f"sym_zero_o{o}_t{t}", [(cat.z[oid, t], 1)], "=", 0)
    if level != "strong":
        return
    for o in range(2, n + 1):
        oid = orders[o - 1].id
        for t in range(2, T + 1):
            row = [(cat.z[oid, t], 1)]
            row += [(cat.z[oid, r], 1) for r in range(1, t)]
            row += [(cat.z[orders[q - 1].id, t], 1) for q in range(1, o)]
            add(f"sym_open_o{o}_t{t}", row, ">=", 1)


def _safe(pid):
    return "".join(ch if ch.isalnum() else "_" for ch in str(pid))[:24]


def build_valid_inequalities(instance: Instance, catalog: VariableCatalog) -> list:
    """LP-strengthening rows as ``(name, coeffs, sense, rhs)`` tuples.

    ``instance`` must list orders in the same sequence as the build that
    produced ``catalog``.
    """
    rows = []
    layout = instance.layout
    T, B = instance.num_trolleys, instance.capacity
    aisles = range(1, layout.num_aisles + 1)
    trolleys = range(1, T + 1)
    ext = bool(catalog.ahat)
    by_id = {o.id: o for o in instance.orders}
    idx = {oid: i for i, oid in enumerate(catalog.order_ids, 1)}

    for t in range(1, min(min_trolleys(instance), T) + 1):
        rows.append((f"vi_use_t{t}", [(catalog.alpha[t], 1)], "=", 1))

    phi, single_aisles = _singleton_sets(instance)
    for s, oids in sorted(phi.items()):
        total = sum(by_id[o].baskets for o in oids)
        denom = min(B, total)
        tag = f"a{s.aisle}_b{s.block}"
        for t in trolleys:
            rows.append(
                (
                    f"vi_force_t{t}_{tag}",
                    [(catalog.x[t, s], 1)]
                    + [(catalog.z[o, t], -by_id[o].baskets / denom) for o in oids],
                    ">=",
                    0,
                )
            )
        rows.append(
            (
                f"vi_edge_{tag}",
                [(catalog.x[t, s], 1) for t in trolleys],
                ">=",
                math.ceil(total / B),
            )
        )

    for t in trolleys:
        for a in aisles:
            rows.append(
                (
                    f"vi_L1_t{t}_a{a}",
                    [(catalog.beta1[t, a], 1)]
                    + [(catalog.gL1[t, e], -1) for e in aisles if e >= a],
                    "<=",
                    0,
                )
            )
            rows.append(
                (
                    f"vi_F1_t{t}_a{a}",
                    [(catalog.beta1[t, a], 1)]
                    + [(catalog.gF1[t, e], -1) for e in aisles if e <= a],
                    "<=",
                    0,
                )
            )
            if ext:
                rows.append(
                    (
                        f"vi_L2_t{t}_a{a}",
                        [(catalog.beta2[t, a], 1)]
                        + [(catalog.gL2[t, e], -1) for e in aisles if e >= a],
                        "<=",
                        0,
                    )
                )
                rows.append(
                    (
                        f"vi_F2_t{t}_a{a}",
                        [(catalog.beta2[t, a], 1)]
                        + [(catalog.gF2[t, e], -1) for e in aisles if e <= a],
                        "<=",
                        0,
                    )
                )

    # The per-order span bound needs the charged cross-aisle distance to cover
    # deeper blocks, which only holds with the extension or a single block.
    if ext or layout.num_blocks == 1:
        for oid, al in single_aisles.items():
            if len(al) < 2:
                continue
            span = layout.cross_distance(al[0], al[-1])
            for t in trolleys:
                rows.append(
                    (
                        f"vi_span_o{idx[oid]}_t{t}",
                        [(catalog.dwe[t], 1), (catalog.z[oid, t], -span)],
                        ">=",
                        0,
                    )
                )
    return rows


def extract_batching(catalog: VariableCatalog, result: SolveResult) -> Batching:
    """Read the order-to-trolley assignment from an integral solution."""
    if not result.has_solution:
        raise ExtractionError(f"no solution to extract (status {result.status})")
    assignment = {}
    T = catalog.num_trolleys
    for oid in catalog.order_ids:
        vals = [result.value(catalog.z[oid, t]) for t in range(1, T + 1)]
        ones = [t for t, v in enumerate(vals, 1) if abs(v - 1) <= INT_TOL]
        stray = [v for v in vals if INT_TOL < abs(v) and abs(v - 1) > INT_TOL]
        if len(ones) != 1 or stray:
            raise ExtractionError(f"order {oid}: z values {vals} are not a single assignment")
        assignment[oid] = ones[0]
    return Batching(assignment)


def audit_solution(catalog: VariableCatalog, result: SolveResult) -> list[str]:
    """Problems with an integral solution: assignment, capacity, coverage, parity."""
    inst = catalog.instance
    problems = []
    try:
        batching = extract_batching(catalog, result)
    except ExtractionError as exc:
        return [str(exc)]
    for t in range(1, inst.num_trolleys + 1):
        load = batching.load(inst, t)
        if load > inst.capacity:
            problems.append(f"trolley {t} load {load} > {inst.capacity}")
        used = set(catalog.used_subaisles(result, t))
        for oid in batching.trolley_orders(t):
            for p in inst.order_products(inst.order_by_id(oid)):
                if not p.subaisles & used:
                    problems.append(f"trolley {t} misses product {p.id} of {oid}")
        for b in range(1, inst.layout.num_blocks + 1):
            if (t, b) not in catalog.y:
                continue
            count = sum(1 for s in used if s.block == b)
            if count % 2 != round(result.value(catalog.y[t, b])):
                problems.append(f"trolley {t} block {b}: parity of {count} != y")
    return problems


@dataclass
class ExactSolution:
    batching: Batching
    result: SolveResult
    catalog: VariableCatalog
    model: MilpModel
    build_time: float = 0.0

    @property
    def objective(self) -> float:
        return self.result.objective_value


def solve_exact(
    instance: Instance, config: ModelConfig, backend: BackendConfig
) -> ExactSolution:
    """Build, solve and extract in one call."""
    start = time.perf_counter()
    model, cat = build(instance, config)
    built = time.perf_counter() - start
    result = require_solution(solve(model, backend), "batching MILP")
    return ExactSolution(extract_batching(cat, result), result, cat, model, built)


def fix_batching(model: MilpModel, catalog: VariableCatalog, batching: Batching):
    """Pin every ``z`` of ``model`` to ``batching`` (in place)."""
    for (oid, t), name in catalog.z.items():
        v = 1.0 if batching.assignment.get(oid) == t else 0.0
        model.variables[name].lower = model.variables[name].upper = v


def evaluate_batching(
    instance: Instance,
    batching: Batching,
    backend: BackendConfig,
    config: ModelConfig = ModelConfig(),
) -> float:
    """Approximation objective of a fixed batching, by MILP.

    Symmetry rows are dropped since they would fight the given labels.
    """
    batching.validate(instance)
    cfg = replace(config, symmetry="none")
    model, cat = build(instance, cfg)
    fix_batching(model, cat, batching)
    return require_solution(solve(model, backend), "fixed batching").objective_value
