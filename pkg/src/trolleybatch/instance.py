"""Orders, products, trolleys: the problem data and its JSON form."""

from __future__ import annotations

import json
import math
from importlib import resources
from dataclasses import dataclass, field
from functools import cached_property

import jsonschema
import numpy as np

from .errors import InfeasibleInstanceError, InstanceValidationError
from .warehouse import TOL, Location, SubaisleId, WarehouseLayout

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["layout", "products", "orders", "trolleys", "capacity"],
    "properties": {
        "layout": {
            "type": "object",
            "required": ["aisles", "blocks", "subaisle_lengths", "cross_gaps"],
            "properties": {
                "aisles": {"type": "integer", "minimum": 2},
                "blocks": {"type": "integer", "minimum": 1},
                "subaisle_lengths": {
                    "type": "array",
                    "items": {
                        "type": "array",
                        "items": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "cross_gaps": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                },
                "origin_offset": {"type": "number", "minimum": 0},
                "origin_links": {
                    "type": "array",
                    "items": {"type": "number", "minimum": 0},
                },
            },
        },
        "products": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "locations"],
                "properties": {
                    "id": {"type": "string"},
                    "locations": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["aisle", "block", "offset"],
                            "properties": {
                                "aisle": {"type": "integer"},
                                "block": {"type": "integer"},
                                "offset": {"type": "number", "minimum": 0},
                            },
                        },
                    },
                },
            },
        },
        "orders": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "baskets", "products"],
                "properties": {
                    "id": {"type": "string"},
                    "baskets": {"type": "integer", "minimum": 1},
                    "products": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "string"},
                    },
                },
            },
        },
        "trolleys": {"type": "integer", "minimum": 1},
        "capacity": {"type": "integer", "minimum": 1},
    },
}


@dataclass(frozen=True)
class Product:
    id: str
    locations: tuple

    @cached_property
    def subaisles(self) -> frozenset:
        """Q(p): the subaisles the product can be picked from."""
        return frozenset(loc.subaisle for loc in self.locations)


@dataclass(frozen=True)
class Order:
    id: str
    product_ids: tuple
    baskets: int = 1


@dataclass(frozen=True)
class Instance:
    layout: WarehouseLayout
    products: tuple
    orders: tuple
    num_trolleys: int
    capacity: int

    def __post_init__(self):
        object.__setattr__(self, "products", tuple(self.products))
        object.__setattr__(self, "orders", tuple(self.orders))
        _validate(self)

    @cached_property
    def catalog(self) -> dict:
        return {p.id: p for p in self.products}

    @property
    def total_baskets(self) -> int:
        return sum(o.baskets for o in self.orders)

    def order_products(self, order: Order) -> list[Product]:
        return [self.catalog[pid] for pid in order.product_ids]

    def order_subaisles(self, order: Order) -> frozenset:
        """Union of Q(p) over the products of ``order``."""
        out = set()
        for p in self.order_products(order):
            out |= p.subaisles
        return frozenset(out)

    def order_by_id(self, oid: str) -> Order:
        for o in self.orders:
            if o.id == oid:
                return o
        raise KeyError(oid)

    def check_capacity(self):
        if self.total_baskets > self.num_trolleys * self.capacity:
            raise InfeasibleInstanceError(
                f"{self.total_baskets} baskets exceed {self.num_trolleys} trolleys "
                f"x capacity {self.capacity}"
            )

    def replace(self, **changes) -> "Instance":
        fields = dict(
            layout=self.layout,
            products=self.products,
            orders=self.orders,
            num_trolleys=self.num_trolleys,
            capacity=self.capacity,
        )
        fields.update(changes)
        return Instance(**fields)


def _validate(inst: Instance):
    layout = inst.layout
    if inst.num_trolleys < 1:
        raise InstanceValidationError("need at least one trolley", "trolleys")
    if inst.capacity < 1:
        raise InstanceValidationError("capacity must be >= 1", "capacity")
    seen = set()
    for i, p in enumerate(inst.products):
        path = f"products[{i}]"
        if p.id in seen:
            raise InstanceValidationError(f"duplicate product id {p.id!r}", path + ".id")
        seen.add(p.id)
        if not p.locations:
            raise InstanceValidationError(
                "product needs at least one location", path + ".locations", "empty Q(p)"
            )
        subs = set()
        for j, loc in enumerate(p.locations):
            lpath = f"{path}.locations[{j}]"
            if not (1 <= loc.aisle <= layout.num_aisles and 1 <= loc.block <= layout.num_blocks):
                raise InstanceValidationError(
                    f"subaisle {(loc.aisle, loc.block)} not in layout", lpath, "location"
                )
            length = layout.subaisle_length(loc.subaisle)
            if not -TOL <= loc.offset <= length + TOL:
                raise InstanceValidationError(
                    f"offset {loc.offset} outside [0, {length}]", lpath + ".offset", "offset"
                )
            if loc.subaisle in subs:
                raise InstanceValidationError(
                    f"subaisle {tuple(loc.subaisle)} listed twice", lpath, "distinct locations"
                )
            subs.add(loc.subaisle)
    seen_orders = set()
    for i, o in enumerate(inst.orders):
        path = f"orders[{i}]"
        if o.id in seen_orders:
            raise InstanceValidationError(f"duplicate order id {o.id!r}", path + ".id")
        seen_orders.add(o.id)
        if int(o.baskets) != o.baskets or o.baskets < 1:
            raise InstanceValidationError(
                "baskets must be a positive integer", path + ".baskets", "integer baskets"
            )
        if o.baskets > inst.capacity:
            raise InstanceValidationError(
                f"{o.baskets} baskets exceed trolley capacity {inst.capacity}",
                path + ".baskets",
                "order capacity",
            )
        if not o.product_ids:
            raise InstanceValidationError("order has no products", path + ".products")
        for j, pid in enumerate(o.product_ids):
            if pid not in seen:
                raise InstanceValidationError(
                    f"unknown product {pid!r}", f"{path}.products[{j}]", "product exists"
                )


@dataclass(frozen=True)
class Batching:
    """Assignment of every order id to a trolley index in ``1..T``."""

    assignment: dict = field(default_factory=dict)

    def trolley_orders(self, t: int) -> list[str]:
        return [oid for oid, tt in self.assignment.items() if tt == t]

    def groups(self, num_trolleys: int) -> list[list[str]]:
        return [self.trolley_orders(t) for t in range(1, num_trolleys + 1)]

    def load(self, instance: Instance, t: int) -> int:
        return sum(instance.order_by_id(oid).baskets for oid in self.trolley_orders(t))

    def validate(self, instance: Instance):
        """Raise unless every order sits on exactly one trolley within capacity."""
        ids = [o.id for o in instance.orders]
        if set(self.assignment) != set(ids):
            missing = set(ids) - set(self.assignment)
            extra = set(self.assignment) - set(ids)
            raise InstanceValidationError(
                f"batching mismatch: missing {sorted(missing)}, unknown {sorted(extra)}",
                "batching",
                "exactly one",
            )
        for oid, t in self.assignment.items():
            if not 1 <= t <= instance.num_trolleys:
                raise InstanceValidationError(
                    f"order {oid} on trolley {t} outside 1..{instance.num_trolleys}",
                    "batching",
                    "trolley index",
                )
        for t in range(1, instance.num_trolleys + 1):
            if self.load(instance, t) > instance.capacity:
                raise InstanceValidationError(
                    f"trolley {t} carries {self.load(instance, t)} > {instance.capacity}",
                    "batching",
                    "capacity",
                )

    @classmethod
    def from_groups(cls, groups) -> "Batching":
        return cls({oid: t for t, grp in enumerate(groups, 1) for oid in grp})


# -- JSON -------------------------------------------------------------------


def _path(error: jsonschema.ValidationError) -> str:
    out = ""
    for part in error.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else part)
    return out


def instance_from_dict(doc: dict) -> Instance:
    try:
        jsonschema.validate(doc, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InstanceValidationError(exc.message, _path(exc), "schema") from None
    try:
        layout = WarehouseLayout.from_dict(doc["layout"])
    except ValueError as exc:
        raise InstanceValidationError(str(exc), "layout", "layout") from None
    products = [
        Product(
            p["id"],
            tuple(Location(l["aisle"], l["block"], float(l["offset"])) for l in p["locations"]),
        )
        for p in doc["products"]
    ]
    orders = [
        Order(o["id"], tuple(dict.fromkeys(o["products"])), o["baskets"])
        for o in doc["orders"]
    ]
    inst = Instance(layout, products, orders, doc["trolleys"], doc["capacity"])
    if inst.total_baskets > inst.num_trolleys * inst.capacity:
        raise InstanceValidationError(
            f"{inst.total_baskets} baskets exceed total capacity "
            f"{inst.num_trolleys * inst.capacity}",
            "orders",
            "total capacity",
        )
    return inst


def parse_instance(document: str) -> Instance:
    """Parse and validate an instance JSON document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise InstanceValidationError(f"malformed JSON: {exc}", "", "parse") from None
    return instance_from_dict(doc)


def load_instance(path) -> Instance:
    with open(path) as fh:
        return parse_instance(fh.read())


def fixture_path(name: str):
    """Path of a bundled instance, e.g. ``fixture_path("worked_example.json")``."""
    return resources.files("trolleybatch") / "fixtures" / name


def load_fixture(name: str) -> Instance:
    return parse_instance(fixture_path(name).read_text())


def instance_to_dict(inst: Instance) -> dict:
    return {
        "layout": inst.layout.to_dict(),
        "products": [
            {
                "id": p.id,
                "locations": [
                    {"aisle": l.aisle, "block": l.block, "offset": l.offset}
                    for l in p.locations
                ],
            }
            for p in inst.products
        ],
        "orders": [
            {"id": o.id, "baskets": o.baskets, "products": list(o.product_ids)}
            for o in inst.orders
        ],
        "trolleys": inst.num_trolleys,
        "capacity": inst.capacity,
    }


def serialize_instance(inst: Instance, indent=2) -> str:
    return json.dumps(instance_to_dict(inst), indent=indent)


# -- preprocessing ----------------------------------------------------------


def prune_dominated(order: Order, catalog) -> list[str]:
    """Product ids of ``order`` whose coverage constraint is not implied by another.

    A product ``p`` is dropped when a remaining product ``q`` has
    ``Q(q) <= Q(p)``: any subaisle serving ``q`` also serves ``p``.  Only the
    MILP's coverage rows use this; routing still sees every product.
    """
    kept = list(order.product_ids)
    for pid in list(kept):
        qp = catalog[pid].subaisles
        if any(q != pid and catalog[q].subaisles <= qp for q in kept):
            kept.remove(pid)
    return kept


def sort_orders(instance: Instance) -> Instance:
    """Reorder by baskets desc, then distinct subaisles desc, then id."""
    keyed = sorted(
        instance.orders,
        key=lambda o: (-o.baskets, -len(instance.order_subaisles(o)), o.id),
    )
    return instance.replace(orders=keyed)


def min_trolleys(instance: Instance) -> int:
    return math.ceil(instance.total_baskets / instance.capacity)


# -- generation -------------------------------------------------------------


def random_instance(
    seed,
    num_orders=4,
    num_trolleys=2,
    capacity=3,
    num_aisles=3,
    num_blocks=2,
    max_products_per_order=2,
    multi_location_prob=0.2,
    integer_lengths=True,
) -> Instance:
    """Uniform-random tiny instance, deterministic in ``seed``.

    Basket counts are drawn so the total always fits ``num_trolleys * capacity``.
    """
    if num_orders > num_trolleys * capacity:
        raise ValueError(f"{num_orders} orders cannot fit {num_trolleys} x {capacity} baskets")
    rng = np.random.default_rng(seed)

    def draw(lo, hi):
        return float(rng.integers(lo, hi + 1)) if integer_lengths else float(rng.uniform(lo, hi))

    layout = WarehouseLayout(
        num_aisles,
        num_blocks,
        [[draw(1, 4) for _ in range(num_blocks)] for _ in range(num_aisles)],
        [draw(1, 3) for _ in range(num_aisles - 1)],
        draw(0, 2),
    )
    subs = layout.subaisles()
    products, orders = [], []
    budget = num_trolleys * capacity
    for i in range(num_orders):
        remaining_orders = num_orders - i - 1
        hi = min(capacity, budget - remaining_orders)
        baskets = int(rng.integers(1, max(1, hi) + 1))
        budget -= baskets
        pids = []
        for _ in range(int(rng.integers(1, max_products_per_order + 1))):
            k = 2 if rng.random() < multi_location_prob else 1
            picks = rng.choice(len(subs), size=k, replace=False)
            locs = []
            for idx in sorted(picks):
                s = subs[idx]
                length = layout.subaisle_length(s)
                locs.append(Location(s.aisle, s.block, round(float(rng.uniform(0.1, 0.9)) * length, 3)))
            pid = f"p{len(products) + 1}"
            products.append(Product(pid, tuple(locs)))
            pids.append(pid)
        orders.append(Order(f"o{i + 1}", tuple(pids), baskets))
    return Instance(layout, products, orders, num_trolleys, capacity)
