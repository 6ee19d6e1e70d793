"""Geometric street graph: great-circle geometry and bounded shortest paths.

The graph is immutable after construction and safe to share across threads;
every shortest-path computation owns its private working state.

Two distance modes exist. ``haversine`` interprets vertex coordinates as
geographic degrees and measures great-circle meters; ``planar`` interprets
(lat, lon) directly as (y, x) meters on a flat plane, which keeps synthetic
fixtures exact. All set-membership decisions downstream go through the
scalar functions in this module so that there is a single numeric path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyGraphError, InvalidInputError, InvalidVertexError

EARTH_RADIUS_M = 6_371_008.8

# Edge lengths may undercut the direct distance by at most this much (meters).
LENGTH_SLACK_M = 1e-6


@dataclass(frozen=True)
class GeoPoint:
    """Coordinate pair; degrees in haversine mode, meters in planar mode."""

    lat: float
    lon: float


def check_geographic(point: GeoPoint) -> GeoPoint:
    """Enforce degree bounds; applies to geographic graphs only."""
    if not (-90.0 <= point.lat <= 90.0):
        raise InvalidInputError(f"latitude {point.lat} outside [-90, 90]")
    if not (-180.0 <= point.lon <= 180.0):
        raise InvalidInputError(f"longitude {point.lon} outside [-180, 180]")
    return point


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters on the mean-radius sphere."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    dphi = math.radians(b.lat - a.lat)
    dlam = math.radians(b.lon - a.lon)
    s = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(s)))


def planar_m(a: GeoPoint, b: GeoPoint) -> float:
    """Flat-plane distance with (lat, lon) read as (y, x) meters."""
    dy = a.lat - b.lat
    dx = a.lon - b.lon
    return math.sqrt(dy * dy + dx * dx)


@dataclass(frozen=True)
class DistanceMap:
    """Shortest-path distances from a source set, capped at ``cutoff``.

    Vertices beyond the cutoff (or unreachable) are simply absent, which
    makes the set-difference operations downstream natural.
    """

    sources: frozenset[int]
    cutoff: float | None
    dist: Mapping[int, float]

    def __contains__(self, vid: int) -> bool:
        return vid in self.dist

    def __getitem__(self, vid: int) -> float:
        return self.dist[vid]

    def get(self, vid: int, default=None):
        return self.dist.get(vid, default)

    def items(self):
        return self.dist.items()

    def __len__(self) -> int:
        return len(self.dist)


class StreetGraph:
    """Immutable geometric graph of street intersections and segments.

    Vertices carry coordinates; edges carry metric lengths and an optional
    one-way flag. Undirected edges are stored once but traversable both
    ways.
    """

    __slots__ = (
        "_points",
        "_adj",
        "_edges",
        "profile",
        "distance_mode",
        "_order",
        "_index",
        "_lats",
        "_lons",
        "_cache",
    )

    def __init__(self, points, adj, edges, profile, distance_mode):
        self._points = points
        self._adj = adj
        self._edges = edges
        self.profile = profile
        self.distance_mode = distance_mode
        self._order = tuple(sorted(points))
        self._index = {vid: i for i, vid in enumerate(self._order)}
        n = len(self._order)
        self._lats = np.fromiter((points[v].lat for v in self._order), dtype=np.float64, count=n)
        self._lons = np.fromiter((points[v].lon for v in self._order), dtype=np.float64, count=n)
        # Memoization slot for expensive derived results (graph is immutable).
        self._cache = {}

    @classmethod
    def build(
        cls,
        vertices: Mapping[int, GeoPoint] | Iterable[tuple[int, GeoPoint]],
        edges: Iterable[tuple[int, int, float, bool]],
        profile: str = "drive",
        distance_mode: str = "haversine",
    ) -> "StreetGraph":
        """Validate and assemble a graph from (id, point) pairs and
        (u, v, length_m, directed) records."""
        if distance_mode not in ("haversine", "planar"):
            raise InvalidInputError(f"unknown distance mode {distance_mode!r}")
        points = dict(vertices.items() if isinstance(vertices, Mapping) else vertices)
        if not points:
            raise EmptyGraphError("graph has no vertices")
        if distance_mode == "haversine":
            for p in points.values():
                check_geographic(p)
        metric = haversine_m if distance_mode == "haversine" else planar_m

        canonical = []
        seen = {}
        for u, v, length, directed in edges:
            if u not in points or v not in points:
                raise InvalidVertexError(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u}")
            if not length > 0.0:
                raise InvalidInputError(f"edge ({u}, {v}) has non-positive length {length}")
            direct = metric(points[u], points[v])
            if length < direct - LENGTH_SLACK_M:
                raise InvalidInputError(
                    f"edge ({u}, {v}) length {length} undercuts direct distance {direct}"
                )
            if not directed and u > v:
                u, v = v, u
            key = (u, v, bool(directed))
            prev = seen.get(key)
            if prev is None or length < prev:
                seen[key] = length
        for (u, v, directed), length in seen.items():
            canonical.append((u, v, float(length), directed))
        canonical.sort(key=lambda e: (e[0], e[1], e[3]))

        adj = {vid: [] for vid in points}
        for u, v, length, directed in canonical:
            adj[u].append((v, length))
            if not directed:
                adj[v].append((u, length))
        for vid in adj:
            adj[vid].sort()
            adj[vid] = tuple(adj[vid])
        return cls(points, adj, tuple(canonical), profile, distance_mode)

    # -- basic accessors ------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self._points)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def vertex_ids(self) -> tuple[int, ...]:
        """Vertex ids in ascending order (the canonical order)."""
        return self._order

    def __contains__(self, vid: int) -> bool:
        return vid in self._points

    def point(self, vid: int) -> GeoPoint:
        try:
            return self._points[vid]
        except KeyError:
            raise InvalidVertexError(f"unknown vertex {vid}") from None

    def neighbors(self, vid: int) -> tuple[tuple[int, float], ...]:
        """Outgoing (neighbor, length_m) pairs."""
        try:
            return self._adj[vid]
        except KeyError:
            raise InvalidVertexError(f"unknown vertex {vid}") from None

    def edges(self) -> tuple[tuple[int, int, float, bool], ...]:
        return self._edges

    def index_of(self, vid: int) -> int:
        """Position of the vertex in the canonical order."""
        return self._index[vid]

    # -- metric helpers -------------------------------------------------

    def euclid(self, u: int, v: int) -> float:
        return self.distance(self.point(u), self.point(v))

    def distance(self, a: GeoPoint, b: GeoPoint) -> float:
        if self.distance_mode == "planar":
            return planar_m(a, b)
        return haversine_m(a, b)

    def euclid_array_from(self, anchor: int) -> np.ndarray:
        """Direct distances from an anchor vertex to every vertex, in
        canonical vertex order.

        Single code path for all euclidean reach decisions: every consumer
        filters this array (or the dict view below) rather than
        recomputing distances elsewhere. In planar mode the vectorized
        arithmetic is bit-identical to ``planar_m``.
        """
        origin = self.point(anchor)
        if self.distance_mode == "planar":
            dy = origin.lat - self._lats
            dx = origin.lon - self._lons
            return np.sqrt(dy * dy + dx * dx)
        phi1 = math.radians(origin.lat)
        phi2 = np.radians(self._lats)
        dphi = np.radians(self._lats - origin.lat)
        dlam = np.radians(self._lons - origin.lon)
        s = np.sin(dphi / 2.0) ** 2 + math.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
        return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(s)))

    def euclid_from(self, anchor: int) -> dict[int, float]:
        """Dict view of ``euclid_array_from`` keyed by vertex id."""
        arr = self.euclid_array_from(anchor)
        return {vid: arr[i] for i, vid in enumerate(self._order)}

    def components(self) -> dict[int, int]:
        """Weakly-connected component label per vertex."""
        undirected = {vid: set() for vid in self._points}
        for u, v, _, _ in self._edges:
            undirected[u].add(v)
            undirected[v].add(u)
        labels = {}
        label = 0
        for vid in self._order:
            if vid in labels:
                continue
            stack = [vid]
            labels[vid] = label
            while stack:
                cur = stack.pop()
                for nbr in undirected[cur]:
                    if nbr not in labels:
                        labels[nbr] = label
                        stack.append(nbr)
            label += 1
        return labels

    # -- interchange format ---------------------------------------------

    def to_json_bytes(self) -> bytes:
        doc = {
            "vertices": [
                {"id": vid, "lat": self._points[vid].lat, "lon": self._points[vid].lon}
                for vid in self._order
            ],
            "edges": [
                {"u": u, "v": v, "length_m": length, "directed": directed}
                for u, v, length, directed in self._edges
            ],
            "profile": self.profile,
        }
        if self.distance_mode != "haversine":
            doc["distance_mode"] = self.distance_mode
        return json.dumps(doc, separators=(",", ":")).encode("ascii") + b"\n"

    @classmethod
    def from_json(cls, data: bytes | str) -> "StreetGraph":
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"graph document is not valid JSON: {exc}") from None
        try:
            vertices = {int(v["id"]): GeoPoint(float(v["lat"]), float(v["lon"])) for v in doc["vertices"]}
            edges = [
                (int(e["u"]), int(e["v"]), float(e["length_m"]), bool(e["directed"]))
                for e in doc["edges"]
            ]
            profile = doc["profile"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"graph document missing or malformed field: {exc}") from None
        mode = doc.get("distance_mode", "haversine")
        return cls.build(vertices, edges, profile=profile, distance_mode=mode)


def shortest_path_distances(
    graph: StreetGraph, sources: Iterable[int], cutoff: float | None = None
) -> DistanceMap:
    """Exact multi-source Dijkstra distances, capped at ``cutoff`` meters.

    Deterministic regardless of heap tie order: the heap is keyed by
    (distance, vertex id).
    """
    src = frozenset(sources)
    if not src:
        raise InvalidInputError("source set is empty")
    for s in src:
        if s not in graph:
            raise InvalidVertexError(f"unknown source vertex {s}")

    dist: dict[int, float] = {}
    heap = [(0.0, s) for s in sorted(src)]
    while heap:
        d, v = heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for nbr, length in graph.neighbors(v):
            if nbr in dist:
                continue
            nd = d + length
            if cutoff is not None and nd > cutoff:
                continue
            heappush(heap, (nd, nbr))
    return DistanceMap(sources=src, cutoff=cutoff, dist=dist)


def nearest_vertex(graph: StreetGraph, point: GeoPoint) -> int:
    """Vertex minimizing direct distance to ``point``; ties break to the
    smallest id."""
    if graph.vertex_count == 0:
        raise EmptyGraphError("graph has no vertices")
    best = None
    for vid in graph.vertex_ids():
        d = graph.distance(point, graph.point(vid))
        if best is None or d < best[0]:
            best = (d, vid)
    return best[1]
