import random

import pytest

from tiny import random_task

from trolleybatch.errors import RoutingCapacityError
from trolleybatch.instance import Batching, Product, random_instance
from trolleybatch.oracle import no_reversal_distance, reversal_distance
from trolleybatch.router import (
    NO_REVERSAL,
    REVERSAL,
    PickTask,
    Route,
    euler_tour,
    route_batching,
    route_from_dict,
    route_no_reversal,
    route_reversal,
)
from trolleybatch.warehouse import ORIGIN, Location, WarehouseLayout


def check_route(layout, route, products):
    assert route.walk[0] == ORIGIN and route.walk[-1] == ORIGIN
    assert layout.walk_length(route.walk) == pytest.approx(route.distance, abs=1e-9)
    assert route.covers(layout, products)


def test_worked_example_no_reversal(backend, worked):
    task = PickTask(worked.layout, worked.products)
    route = route_no_reversal(task, backend)
    assert route.distance == pytest.approx(6.0, abs=1e-9)
    assert route.walk == [0, 1, 5, 6, 7, 3, 0]
    check_route(worked.layout, route, worked.products)


def test_worked_example_reversal(worked):
    route = route_reversal(PickTask(worked.layout, worked.products))
    assert route.distance == pytest.approx(6.0, abs=1e-9)
    check_route(worked.layout, route, worked.products)


def test_empty_tasks(backend):
    lay = WarehouseLayout.uniform(3, 2)
    for route in (route_no_reversal(PickTask(lay, ()), backend), route_reversal(PickTask(lay, ()))):
        assert route.walk == [ORIGIN] and route.distance == 0


def test_out_and_back():
    lay = WarehouseLayout.uniform(4, 4, origin_offset=1.0)
    route = route_reversal(PickTask(lay, (Product("p", (Location(1, 1, 0.3),)),)))
    assert route.distance == pytest.approx(2 * (1.0 + 0.3), abs=1e-9)


def test_reversal_cap():
    lay = WarehouseLayout.uniform(3, 1)
    products = tuple(Product(f"p{i}", (Location(1 + i % 3, 1, 0.1 + 0.05 * i),)) for i in range(5))
    with pytest.raises(RoutingCapacityError, match="no-reversal"):
        route_reversal(PickTask(lay, products), cap=4)


def all_euler_circuits(edges, start=0):
    edges = list(edges)
    out = []

    def rec(cur, left, walk):
        if not left:
            if cur == start:
                out.append(walk)
            return
        for k, (u, v) in enumerate(left):
            if cur in (u, v):
                rec(v if cur == u else u, left[:k] + left[k + 1 :], walk + [v if cur == u else u])

    rec(start, edges, [start])
    return out


def test_euler_tour_is_lexicographic():
    edges = [(0, 1), (0, 3), (1, 2), (2, 3), (1, 4), (4, 5), (1, 5)]
    graph = {(u, v, "e"): 1 for u, v in edges}
    assert euler_tour(graph) == min(all_euler_circuits(edges)) == [0, 1, 4, 5, 1, 2, 3, 0]
    doubled = {(0, 1, "o"): 2, (1, 2, "c"): 1, (2, 5, "a"): 1, (1, 4, "a"): 1, (4, 5, "c"): 1}
    flat = [(k[0], k[1]) for k, c in doubled.items() for _ in range(c)]
    assert euler_tour(doubled) == min(all_euler_circuits(flat))
    with pytest.raises(ValueError):
        euler_tour({(0, 1, "o"): 1, (1, 2, "c"): 1})


@pytest.mark.parametrize("seed", range(12))
def test_routers_against_oracles(backend, seed):
    task = random_task(random.Random(seed))
    nr = route_no_reversal(task, backend)
    rv = route_reversal(task)
    assert nr.distance == pytest.approx(no_reversal_distance(task.layout, task.products)[0], abs=1e-9)
    assert rv.distance == pytest.approx(reversal_distance(task.layout, task.products)[0], abs=1e-9)
    assert rv.distance <= nr.distance + 1e-9
    check_route(task.layout, nr, task.products)
    check_route(task.layout, rv, task.products)


def test_no_reversal_multigraph_is_even(backend):
    task = random_task(random.Random(99))
    route = route_no_reversal(task, backend)
    degree = {}
    for u, v in zip(route.walk, route.walk[1:]):
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    assert all(d % 2 == 0 for d in degree.values())


def test_route_batching(backend):
    inst = random_instance(2, num_orders=3, num_trolleys=3, capacity=3)
    batching = Batching({o.id: 1 if i < 2 else 2 for i, o in enumerate(inst.orders)})
    routes, total = route_batching(inst, batching, NO_REVERSAL, backend)
    assert routes[3].distance == 0 and routes[3].walk == [ORIGIN]
    assert total == pytest.approx(sum(r.distance for r in routes.values()))
    relabelled = Batching({oid: {1: 3, 2: 1}[t] for oid, t in batching.assignment.items()})
    assert route_batching(inst, relabelled, NO_REVERSAL, backend)[1] == pytest.approx(total)


def test_route_batching_annotates_trolley(worked):
    with pytest.raises(RoutingCapacityError, match="trolley 1"):
        route_batching(worked, Batching({"o1": 1}), REVERSAL, cap=1)


def test_route_json_round_trip():
    route = Route([0, 1, Location(1, 1, 0.5), 1, 0], 3.0, REVERSAL)
    d = route.to_dict(trolley=2)
    assert d["trolley"] == 2
    assert d["walk"][2] == {"aisle": 1, "block": 1, "offset": 0.5}
    assert route_from_dict(d) == route
