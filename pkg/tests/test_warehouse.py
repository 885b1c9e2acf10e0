import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trolleybatch.errors import LayoutRangeError
from trolleybatch.warehouse import ORIGIN, Location, SubaisleId, WarehouseLayout

FIG1 = WarehouseLayout.uniform(4, 4)


def test_vertex_labels():
    assert FIG1.vertex_id(1, 1) == 1
    assert FIG1.vertex_id(1, 2) == 5
    assert FIG1.vertex_id(3, 2) == 7
    first_aisle = [FIG1.subaisle_vertices(s) for s in FIG1.aisle_edges(1)]
    assert first_aisle == [(1, 5), (5, 9), (9, 13), (13, 17)]


def test_vertex_id_is_a_bijection():
    labels = [
        FIG1.vertex_id(a, c) for a in range(1, 5) for c in range(1, 6)
    ]
    assert sorted(labels) == list(range(1, FIG1.num_vertices + 1))
    for v in labels:
        assert FIG1.vertex_id(*FIG1.vertex_position(v)) == v


@pytest.mark.parametrize("aisle,cross", [(0, 1), (5, 1), (1, 0), (1, 6)])
def test_vertex_id_out_of_range(aisle, cross):
    with pytest.raises(LayoutRangeError):
        FIG1.vertex_id(aisle, cross)


def test_edge_sets_partition():
    lay = WarehouseLayout.uniform(3, 2)
    universe = set(lay.subaisles())
    assert len(universe) == 6
    by_aisle = [set(lay.aisle_edges(a)) for a in range(1, 4)]
    by_block = [set(lay.block_edges(b)) for b in range(1, 3)]
    assert set().union(*by_aisle) == universe == set().union(*by_block)
    assert sum(map(len, by_aisle)) == sum(map(len, by_block)) == 6
    assert lay.block_edges(2) == [SubaisleId(1, 2), SubaisleId(2, 2), SubaisleId(3, 2)]
    with pytest.raises(LayoutRangeError):
        lay.block_edges(3)


def test_cross_distance_is_additive():
    lay = WarehouseLayout(4, 1, [[2.0]] * 4, [1.5, 2.0, 0.5])
    for a, b, c in itertools.combinations_with_replacement(range(1, 5), 3):
        assert lay.cross_distance(a, c) == pytest.approx(
            lay.cross_distance(a, b) + lay.cross_distance(b, c), abs=1e-9
        )
    assert lay.cross_distance(3, 1) == 3.5


def test_origin_distances():
    lay = WarehouseLayout(3, 1, [[2.0]] * 3, [1.0, 2.0], origin_offset=0.5)
    assert [lay.origin_to_aisle(a) for a in (1, 2, 3)] == [0.5, 1.5, 3.5]
    linked = WarehouseLayout(3, 1, [[2.0]] * 3, [1.0, 2.0], 0.5, origin_links=[0.5, 0.5, 0.5])
    assert [linked.origin_to_aisle(a) for a in (1, 2, 3)] == [0.5, 0.5, 0.5]


def test_min_block_subaisle():
    lay = WarehouseLayout(2, 2, [[3.0, 1.0], [2.0, 4.0]], [1.0])
    assert lay.min_block_subaisle(1) == 2.0
    assert lay.min_block_subaisle(2) == 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(num_aisles=1),
        dict(num_blocks=0),
        dict(subaisle_lengths=[[0.0], [1.0]]),
        dict(cross_gaps=[0.0]),
        dict(cross_gaps=[1.0, 1.0]),
        dict(origin_offset=-1.0),
    ],
)
def test_layout_validation(kwargs):
    base = dict(num_aisles=2, num_blocks=1, subaisle_lengths=[[1.0], [1.0]], cross_gaps=[1.0])
    base.update(kwargs)
    with pytest.raises(ValueError):
        WarehouseLayout(**base)


def test_layout_dict_round_trip():
    lay = WarehouseLayout(3, 2, [[1, 2], [3, 4], [5, 6]], [1, 2], 0.0, [0.0, 1.0, 3.0])
    assert WarehouseLayout.from_dict(lay.to_dict()) == lay


def test_shortest_distance_examples():
    assert FIG1.shortest_distance(ORIGIN, 3) == 3.0
    assert FIG1.shortest_distance(5, 7) == 2.0
    assert FIG1.shortest_distance(7, 7) == 0.0
    mid = Location(1, 1, 0.25)
    assert FIG1.shortest_distance(ORIGIN, mid) == 1.25
    assert FIG1.shortest_distance(mid, Location(1, 1, 0.75)) == 0.5
    with pytest.raises(LayoutRangeError):
        FIG1.shortest_distance(ORIGIN, Location(1, 1, 1.5))


# -- independent all-pairs check on the expanded graph ---------------------------


def expanded_graph(shape, points):
    """Grid built straight from the raw fields, pick points as degree-2 nodes."""
    wa, wb, lengths, gaps, offset = shape
    g = nx.Graph()
    g.add_edge("O", (1, 1), weight=offset)
    for c in range(1, wb + 2):
        for a in range(1, wa):
            g.add_edge((a, c), (a + 1, c), weight=gaps[a - 1])
    splits = {}
    for p in points:
        splits.setdefault((p.aisle, p.block), set()).add(p.offset)
    for a in range(1, wa + 1):
        for b in range(1, wb + 1):
            length = lengths[a - 1][b - 1]
            cuts = sorted(splits.get((a, b), set()) | {0.0, length})
            nodes = [(a, b) if x == 0.0 else (a, b + 1) if x == length else ("p", a, b, x) for x in cuts]
            for (n1, x1), (n2, x2) in zip(zip(nodes, cuts), zip(nodes[1:], cuts[1:])):
                g.add_edge(n1, n2, weight=x2 - x1)
    return g


def node_of(layout, p):
    if p == ORIGIN:
        return "O"
    if isinstance(p, Location):
        return ("p", p.aisle, p.block, p.offset)
    return layout.vertex_position(p)


layouts = st.builds(
    lambda wa, wb, data: (wa, wb, data),
    st.integers(2, 4),
    st.integers(1, 3),
    st.randoms(use_true_random=False),
)


@settings(max_examples=40, deadline=None)
@given(layouts)
def test_shortest_distance_matches_networkx(params):
    wa, wb, rnd = params
    lengths = [[float(rnd.randint(1, 5)) for _ in range(wb)] for _ in range(wa)]
    gaps = [float(rnd.randint(1, 3)) for _ in range(wa - 1)]
    offset = float(rnd.randint(0, 2))
    lay = WarehouseLayout(wa, wb, lengths, gaps, offset)
    points = []
    for _ in range(4):
        a, b = rnd.randint(1, wa), rnd.randint(1, wb)
        points.append(Location(a, b, rnd.uniform(0.01, lengths[a - 1][b - 1] - 0.01)))
    g = expanded_graph((wa, wb, lengths, gaps, offset), points)
    ref = dict(nx.all_pairs_dijkstra_path_length(g))
    candidates = [ORIGIN, 1, lay.num_vertices, lay.vertex_id(wa, 1)] + points
    for p, q in itertools.product(candidates, repeat=2):
        d = lay.shortest_distance(p, q)
        assert d == pytest.approx(ref[node_of(lay, p)][node_of(lay, q)], abs=1e-9)
        assert d == pytest.approx(lay.shortest_distance(q, p), abs=1e-12)
        path = lay.shortest_path(p, q)
        assert path[0] == lay.normalize_point(p) and path[-1] == lay.normalize_point(q)
        assert lay.walk_length(path) == pytest.approx(d, abs=1e-9)
    for p, q, r in itertools.product(candidates[:5], repeat=3):
        assert lay.shortest_distance(p, r) <= lay.shortest_distance(p, q) + lay.shortest_distance(q, r) + 1e-9


def test_zero_origin_offset():
    lay = WarehouseLayout(2, 1, [[1.0], [1.0]], [1.0], 0.0)
    assert lay.shortest_distance(ORIGIN, 1) == 0.0
    assert lay.shortest_distance(ORIGIN, 4) == 2.0


def test_step_length_rejects_jumps():
    assert FIG1.step_length(1, 5) == 1.0
    assert FIG1.step_length(Location(1, 1, 0.5), 5) == 0.5
    with pytest.raises(ValueError):
        FIG1.step_length(1, 7)
