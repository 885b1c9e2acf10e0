import itertools
import json

import pytest

from trolleybatch.errors import OracleLimitError
from trolleybatch.instance import (
    Batching,
    Instance,
    Order,
    Product,
    fixture_path,
    load_fixture,
    random_instance,
)
from trolleybatch.oracle import (
    OracleLimits,
    approx_optimum,
    enumerate_batchings,
    eval_approx_objective,
    joint_optimal,
    no_reversal_distance,
    reversal_distance,
)
from trolleybatch.warehouse import Location, WarehouseLayout


def _orders(baskets, trolleys, capacity):
    lay = WarehouseLayout.uniform(3, 1)
    products = [Product("p", (Location(1, 1, 0.5),))]
    orders = [Order(f"o{i}", ("p",), b) for i, b in enumerate(baskets)]
    return Instance(lay, products, orders, trolleys, capacity)


def partitions_by_brute_force(inst):
    """Unlabelled capacity-feasible groupings from all T^n labellings."""
    ids = [o.id for o in inst.orders]
    seen = set()
    for labels in itertools.product(range(inst.num_trolleys), repeat=len(ids)):
        groups = {}
        for oid, t in zip(ids, labels):
            groups.setdefault(t, set()).add(oid)
        if all(sum(inst.order_by_id(o).baskets for o in g) <= inst.capacity for g in groups.values()):
            seen.add(frozenset(frozenset(g) for g in groups.values()))
    return len(seen)


def test_enumeration_counts():
    assert len(list(enumerate_batchings(_orders([1, 1], 2, 2)))) == 2
    assert len(list(enumerate_batchings(_orders([1], 2, 2)))) == 1
    assert len(list(enumerate_batchings(_orders([1, 1, 1, 1], 2, 10)))) == 8


@pytest.mark.parametrize("baskets,trolleys,capacity", [([1, 2, 1, 2], 3, 3), ([2, 2, 1, 1, 1], 3, 3), ([1] * 5, 2, 3)])
def test_enumeration_matches_partition_count(baskets, trolleys, capacity):
    inst = _orders(baskets, trolleys, capacity)
    got = list(enumerate_batchings(inst))
    for b in got:
        b.validate(inst)
    assert len(got) == partitions_by_brute_force(inst)
    assert len({frozenset(map(frozenset, b.groups(trolleys))) - {frozenset()} for b in got}) == len(got)


def test_limits_refuse():
    with pytest.raises(OracleLimitError):
        list(enumerate_batchings(_orders([1] * 7, 7, 1)))
    with pytest.raises(OracleLimitError):
        approx_optimum(random_instance(0, num_orders=2), limits=OracleLimits(max_aisle_edges=2))


def test_worked_example_values(worked):
    assert eval_approx_objective(worked, Batching({"o1": 1})) == 6.0
    assert joint_optimal(worked)[0] == 6.0
    dist, graph = no_reversal_distance(worked.layout, worked.products)
    assert dist == 6.0
    assert sum(graph.values()) == 6


def test_empty_cases(worked):
    empty = worked.replace(orders=[], products=[])
    assert approx_optimum(empty)[0] == 0
    assert joint_optimal(empty)[0] == 0
    spare = worked.replace(num_trolleys=2)
    assert eval_approx_objective(spare, Batching({"o1": 2})) == 6.0


@pytest.mark.parametrize("seed", range(5))
def test_mode_ordering(seed):
    inst = random_instance(seed, num_orders=3)
    approx = approx_optimum(inst)[0]
    nr = joint_optimal(inst, "no_reversal")[0]
    rv = joint_optimal(inst, "reversal")[0]
    assert approx <= nr + 1e-9
    assert rv <= nr + 1e-9
    for p in inst.products:
        assert reversal_distance(inst.layout, [p])[0] <= no_reversal_distance(inst.layout, [p])[0] + 1e-9


def test_committed_expectations():
    expected = json.loads(fixture_path("expected_oracle.json").read_text())
    for name, values in expected.items():
        inst = load_fixture(name)
        assert approx_optimum(inst)[0] == values["approx_optimum"]
        assert joint_optimal(inst, "no_reversal")[0] == values["joint_noreversal"]
        assert joint_optimal(inst, "reversal")[0] == values["joint_reversal"]
