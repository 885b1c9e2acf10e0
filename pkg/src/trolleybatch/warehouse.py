"""Rectangular multi-block warehouse geometry.

Vertices are numbered the same way throughout the package: the vertex where
aisle ``a`` meets cross-aisle ``c`` has label ``a + (c - 1) * W_A``, cross-aisle
1 being the northern (front) one.  Label 0 is the origin (depot).  The aisle
edge between cross-aisles ``b`` and ``b + 1`` in aisle ``a`` is the subaisle
``(a, b)``; positions inside it are measured from its northern end.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Union

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, dijkstra

from .errors import LayoutRangeError

ORIGIN = 0
TOL = 1e-9


class SubaisleId(NamedTuple):
    aisle: int
    block: int


class Location(NamedTuple):
    """A point inside subaisle ``(aisle, block)``, ``offset`` from its north end."""

    aisle: int
    block: int
    offset: float

    @property
    def subaisle(self) -> SubaisleId:
        return SubaisleId(self.aisle, self.block)


class Edge(NamedTuple):
    u: int
    v: int
    length: float
    kind: str  # "origin", "cross" or "aisle"


# A grid point is either a vertex label or a location inside a subaisle.
Point = Union[int, Location]


def _as_float_tuple(values):
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class WarehouseLayout:
    """Immutable grid layout.

    ``subaisle_lengths[a - 1][b - 1]`` is the length of subaisle ``(a, b)`` and
    ``cross_gaps[a - 1]`` the distance between aisles ``a`` and ``a + 1``; the
    same gap applies in every cross-aisle.

    By default the origin hangs off vertex 1 by a single connector of length
    ``origin_offset``.  ``origin_links`` instead gives a direct connector from
    the origin to the head (cross-aisle 1 vertex) of every aisle; its first
    entry must then equal ``origin_offset``.
    """

    num_aisles: int
    num_blocks: int
    subaisle_lengths: tuple
    cross_gaps: tuple
    origin_offset: float = 1.0
    origin_links: tuple | None = None

    def __post_init__(self):
        wa, wb = self.num_aisles, self.num_blocks
        if int(wa) != wa or wa < 2:
            raise ValueError(f"num_aisles must be an integer >= 2, got {wa}")
        if int(wb) != wb or wb < 1:
            raise ValueError(f"num_blocks must be an integer >= 1, got {wb}")
        lengths = tuple(_as_float_tuple(row) for row in self.subaisle_lengths)
        if len(lengths) != wa or any(len(row) != wb for row in lengths):
            raise ValueError(f"subaisle_lengths must be {wa} rows of {wb} lengths")
        if any(x <= 0 for row in lengths for x in row):
            raise ValueError("every subaisle length must be > 0")
        gaps = _as_float_tuple(self.cross_gaps)
        if len(gaps) != wa - 1:
            raise ValueError(f"cross_gaps must have {wa - 1} entries")
        if any(g <= 0 for g in gaps):
            raise ValueError("every cross gap must be > 0")
        if self.origin_offset < 0:
            raise ValueError("origin_offset must be >= 0")
        object.__setattr__(self, "subaisle_lengths", lengths)
        object.__setattr__(self, "cross_gaps", gaps)
        object.__setattr__(self, "origin_offset", float(self.origin_offset))
        if self.origin_links is not None:
            links = _as_float_tuple(self.origin_links)
            if len(links) != wa:
                raise ValueError(f"origin_links must have {wa} entries")
            if any(x < 0 for x in links):
                raise ValueError("origin_links must be >= 0")
            if abs(links[0] - self.origin_offset) > TOL:
                raise ValueError("origin_links[0] must equal origin_offset")
            object.__setattr__(self, "origin_links", links)

    @classmethod
    def uniform(cls, num_aisles, num_blocks, length=1.0, gap=1.0, origin_offset=1.0):
        return cls(
            num_aisles,
            num_blocks,
            [[length] * num_blocks for _ in range(num_aisles)],
            [gap] * (num_aisles - 1),
            origin_offset,
        )

    # -- labels and edge sets ------------------------------------------------

    @property
    def num_vertices(self) -> int:
        """Grid vertices, excluding the origin."""
        return self.num_aisles * (self.num_blocks + 1)

    def _check_aisle(self, a):
        if not 1 <= a <= self.num_aisles:
            raise LayoutRangeError(f"aisle {a} outside 1..{self.num_aisles}")

    def _check_block(self, b):
        if not 1 <= b <= self.num_blocks:
            raise LayoutRangeError(f"block {b} outside 1..{self.num_blocks}")

    def vertex_id(self, aisle: int, cross_aisle: int) -> int:
        self._check_aisle(aisle)
        if not 1 <= cross_aisle <= self.num_blocks + 1:
            raise LayoutRangeError(
                f"cross-aisle {cross_aisle} outside 1..{self.num_blocks + 1}"
            )
        return aisle + (cross_aisle - 1) * self.num_aisles

    def vertex_position(self, v: int) -> tuple[int, int]:
        """Inverse of :meth:`vertex_id`: ``(aisle, cross_aisle)``."""
        if not 1 <= v <= self.num_vertices:
            raise LayoutRangeError(f"vertex {v} outside 1..{self.num_vertices}")
        return (v - 1) % self.num_aisles + 1, (v - 1) // self.num_aisles + 1

    def subaisles(self) -> list[SubaisleId]:
        """All aisle edges, block-major (block 1 first, west to east)."""
        return [
            SubaisleId(a, b)
            for b in range(1, self.num_blocks + 1)
            for a in range(1, self.num_aisles + 1)
        ]

    def block_edges(self, b: int) -> list[SubaisleId]:
        self._check_block(b)
        return [SubaisleId(a, b) for a in range(1, self.num_aisles + 1)]

    def aisle_edges(self, a: int) -> list[SubaisleId]:
        self._check_aisle(a)
        return [SubaisleId(a, b) for b in range(1, self.num_blocks + 1)]

    def subaisle_vertices(self, s: SubaisleId) -> tuple[int, int]:
        """``(north, south)`` end vertices of a subaisle."""
        self._check_block(s[1])
        return self.vertex_id(s[0], s[1]), self.vertex_id(s[0], s[1] + 1)

    def subaisle_length(self, s: SubaisleId) -> float:
        self._check_aisle(s[0])
        self._check_block(s[1])
        return self.subaisle_lengths[s[0] - 1][s[1] - 1]

    def edges(self) -> list[Edge]:
        """Every edge of the warehouse graph, origin connectors first."""
        out = []
        if self.origin_links is None:
            out.append(Edge(ORIGIN, 1, self.origin_offset, "origin"))
        else:
            out.extend(
                Edge(ORIGIN, a, d, "origin") for a, d in enumerate(self.origin_links, 1)
            )
        for c in range(1, self.num_blocks + 2):
            for a in range(1, self.num_aisles):
                out.append(
                    Edge(
                        self.vertex_id(a, c),
                        self.vertex_id(a + 1, c),
                        self.cross_gaps[a - 1],
                        "cross",
                    )
                )
        for s in self.subaisles():
            u, v = self.subaisle_vertices(s)
            out.append(Edge(u, v, self.subaisle_length(s), "aisle"))
        return out

    # -- distances -----------------------------------------------------------

    def cross_distance(self, a1: int, a2: int) -> float:
        self._check_aisle(a1)
        self._check_aisle(a2)
        lo, hi = min(a1, a2), max(a1, a2)
        return float(sum(self.cross_gaps[lo - 1 : hi - 1]))

    def origin_to_aisle(self, a: int) -> float:
        """Shortest distance from the origin to the head of aisle ``a``.

        Equals ``origin_offset + cross_distance(1, a)`` for the single-connector
        layout.
        """
        self._check_aisle(a)
        return float(self._apsp[0][ORIGIN, a])

    def min_block_subaisle(self, b: int) -> float:
        self._check_block(b)
        return min(row[b - 1] for row in self.subaisle_lengths)

    @cached_property
    def _apsp(self):
        n = self.num_vertices + 1
        dense = np.full((n, n), np.inf)
        for e in self.edges():
            w = min(dense[e.u, e.v], e.length)
            dense[e.u, e.v] = dense[e.v, e.u] = w
        graph = csgraph_from_dense(dense, null_value=np.inf)
        dist, pred = dijkstra(graph, directed=False, return_predecessors=True)
        return dist, pred

    @property
    def vertex_distances(self) -> np.ndarray:
        """All-pairs shortest distances between vertex labels (origin = 0)."""
        return self._apsp[0]

    def normalize_point(self, p: Point) -> Point:
        """Validate ``p``; locations at a subaisle end collapse to the vertex."""
        if isinstance(p, Location):
            s = p.subaisle
            length = self.subaisle_length(s)
            if not -TOL <= p.offset <= length + TOL:
                raise LayoutRangeError(
                    f"offset {p.offset} outside [0, {length}] in subaisle {tuple(s)}"
                )
            north, south = self.subaisle_vertices(s)
            if p.offset <= TOL:
                return north
            if p.offset >= length - TOL:
                return south
            return Location(p.aisle, p.block, float(p.offset))
        p = int(p)
        if not 0 <= p <= self.num_vertices:
            raise LayoutRangeError(f"vertex {p} outside 0..{self.num_vertices}")
        return p

    def _anchors(self, p: Point):
        """``(vertex, distance)`` pairs through which ``p`` reaches the graph."""
        if isinstance(p, Location):
            north, south = self.subaisle_vertices(p.subaisle)
            return ((north, p.offset), (south, self.subaisle_length(p.subaisle) - p.offset))
        return ((p, 0.0),)

    def shortest_distance(self, p1: Point, p2: Point) -> float:
        p1, p2 = self.normalize_point(p1), self.normalize_point(p2)
        dist = self.vertex_distances
        best = min(
            d1 + dist[v1, v2] + d2
            for v1, d1 in self._anchors(p1)
            for v2, d2 in self._anchors(p2)
        )
        if (
            isinstance(p1, Location)
            and isinstance(p2, Location)
            and p1.subaisle == p2.subaisle
        ):
            best = min(best, abs(p1.offset - p2.offset))
        return float(best)

    def shortest_path(self, p1: Point, p2: Point) -> list:
        """A shortest walk ``[p1, v..., p2]`` through intermediate vertices."""
        p1, p2 = self.normalize_point(p1), self.normalize_point(p2)
        if p1 == p2:
            return [p1]
        if (
            isinstance(p1, Location)
            and isinstance(p2, Location)
            and p1.subaisle == p2.subaisle
        ):
            target = abs(p1.offset - p2.offset)
            if abs(self.shortest_distance(p1, p2) - target) <= TOL:
                return [p1, p2]
        dist, pred = self._apsp
        best = None
        for v1, d1 in self._anchors(p1):
            for v2, d2 in self._anchors(p2):
                total = d1 + dist[v1, v2] + d2
                if best is None or total < best[0] - TOL:
                    best = (total, v1, v2)
        _, v1, v2 = best
        chain = [v2]
        while chain[-1] != v1:
            chain.append(int(pred[v1, chain[-1]]))
        chain.reverse()
        head = [p1] if isinstance(p1, Location) else []
        tail = [p2] if isinstance(p2, Location) else []
        return head + chain + tail

    def step_length(self, p: Point, q: Point) -> float:
        """Length of a single walk step; raises if ``p`` and ``q`` are not adjacent.

        Adjacent means joined by one graph edge, or lying on the same subaisle
        (including its end vertices).
        """
        p, q = self.normalize_point(p), self.normalize_point(q)
        if p == q:
            return 0.0
        if isinstance(p, int) and isinstance(q, int):
            lengths = [
                e.length for e in self.edges() if {e.u, e.v} == {p, q}
            ]
            if not lengths:
                raise ValueError(f"vertices {p} and {q} are not adjacent")
            return min(lengths)
        for a, b in ((p, q), (q, p)):
            if isinstance(a, Location):
                north, south = self.subaisle_vertices(a.subaisle)
                length = self.subaisle_length(a.subaisle)
                if b == north:
                    return a.offset
                if b == south:
                    return length - a.offset
                if isinstance(b, Location) and b.subaisle == a.subaisle:
                    return abs(a.offset - b.offset)
        raise ValueError(f"points {p} and {q} are not on a common edge")

    def walk_length(self, walk) -> float:
        return float(sum(self.step_length(p, q) for p, q in zip(walk, walk[1:])))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "aisles": self.num_aisles,
            "blocks": self.num_blocks,
            "subaisle_lengths": [list(row) for row in self.subaisle_lengths],
            "cross_gaps": list(self.cross_gaps),
            "origin_offset": self.origin_offset,
        }
        if self.origin_links is not None:
            d["origin_links"] = list(self.origin_links)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "WarehouseLayout":
        return cls(
            d["aisles"],
            d["blocks"],
            d["subaisle_lengths"],
            d["cross_gaps"],
            d.get("origin_offset", 1.0),
            d.get("origin_links"),
        )
