"""Reachability inconsistency analysis.

A vertex is *inconsistent* for a point of interest at radius ``r`` when it
lies inside the direct-distance disc ``E(p, r)`` but outside the network
reach ``N(p, tau * r)``: close as the crow flies, yet not reachable along
the streets within the tolerated detour budget. Unreachable vertices are
maximally inefficient and therefore inconsistent whenever they are close.
A vertex's *inconsistency degree* counts the (POI, radius) pairs for which
it is inconsistent, so overlapping POIs of different categories each
contribute.

The set difference E(p, r) \\ N(p, tau * r) is the budgeted-radius form of
the detour criterion; thresholding per-path detour ratios instead would be
equivalent up to how tau interacts with r.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidVertexError
from .graph import GeoPoint, StreetGraph, check_geographic, nearest_vertex, shortest_path_distances

DEFAULT_RADII = (400.0, 800.0, 1600.0)
DEFAULT_TAU = 1.5


@dataclass(frozen=True)
class Poi:
    id: str
    category: str
    vertex: int


@dataclass(frozen=True)
class PoiPlacement:
    """Ordered collection of POIs, each anchored to a graph vertex."""

    pois: tuple[Poi, ...]

    def __post_init__(self):
        ids = [p.id for p in self.pois]
        if len(set(ids)) != len(ids):
            raise InvalidInputError("POI ids must be unique")

    def __len__(self) -> int:
        return len(self.pois)

    def anchors(self) -> tuple[int, ...]:
        return tuple(p.vertex for p in self.pois)

    def by_id(self, poi_id: str) -> Poi:
        for p in self.pois:
            if p.id == poi_id:
                return p
        raise InvalidInputError(f"unknown POI id {poi_id!r}")

    def moved(self, poi_id: str, vertex: int) -> "PoiPlacement":
        """Copy with one POI re-anchored."""
        self.by_id(poi_id)
        return PoiPlacement(
            tuple(Poi(p.id, p.category, vertex) if p.id == poi_id else p for p in self.pois)
        )

    def validate_against(self, graph: StreetGraph) -> None:
        for p in self.pois:
            if p.vertex not in graph:
                raise InvalidVertexError(f"POI {p.id!r} anchored to unknown vertex {p.vertex}")


@dataclass(frozen=True)
class ScaleLadder:
    """Ascending analysis radii (meters) plus the detour tolerance tau."""

    radii: tuple[float, ...] = DEFAULT_RADII
    tau: float = DEFAULT_TAU

    def __post_init__(self):
        if not self.radii:
            raise InvalidInputError("scale ladder needs at least one radius")
        if any(r <= 0 for r in self.radii):
            raise InvalidInputError("radii must be positive")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise InvalidInputError("radii must be strictly ascending")
        if self.tau < 1.0:
            raise InvalidInputError("tau must be >= 1")

    @property
    def max_network_cutoff(self) -> float:
        return self.tau * self.radii[-1]


@dataclass(frozen=True)
class InconsistencyReport:
    """Per-vertex degrees plus the per-(POI, radius) inconsistent sets.

    ``degree`` holds only vertices with degree >= 1; absence means zero.
    """

    degree: dict[int, int]
    per_pair: dict[tuple[str, float], frozenset[int]]
    inconsistent_vertices: int
    degree_sum: int
    degree_max: int


def euclidean_reach_set(graph: StreetGraph, anchor: int, r: float) -> set[int]:
    """E(p, r): vertices within direct distance r of the anchor."""
    if r <= 0:
        raise InvalidInputError("radius must be positive")
    distances = graph.euclid_from(anchor)
    return {vid for vid, d in distances.items() if d <= r}


def network_reach_set(graph: StreetGraph, anchor: int, d: float) -> set[int]:
    """N(p, d): vertices within shortest-path distance d of the anchor."""
    if d <= 0:
        raise InvalidInputError("distance budget must be positive")
    dm = shortest_path_distances(graph, {anchor}, cutoff=d)
    return set(dm.dist)


def inconsistent_set(graph: StreetGraph, anchor: int, r: float, tau: float) -> set[int]:
    """E(p, r) minus N(p, tau * r): close by air, unreachable by street
    within the detour budget (including fully unreachable vertices)."""
    if tau < 1.0:
        raise InvalidInputError("tau must be >= 1")
    return euclidean_reach_set(graph, anchor, r) - network_reach_set(graph, anchor, tau * r)


def detour_index(graph: StreetGraph, v: int, anchor: int) -> float | None:
    """Network over direct distance from v to the POI anchor.

    Returns None when v is unreachable from the anchor (or coincides with
    it in space), and raises for v == anchor where the ratio is 0/0.
    """
    if v == anchor:
        raise InvalidInputError("detour index is undefined for the anchor itself (0/0)")
    if v not in graph:
        raise InvalidVertexError(f"unknown vertex {v}")
    direct = graph.euclid(anchor, v)
    dm = shortest_path_distances(graph, {anchor}, cutoff=None)
    net = dm.get(v)
    if net is None or direct == 0.0:
        return None
    return net / direct


def anchor_pair_sets(graph: StreetGraph, anchor: int, ladder: ScaleLadder) -> tuple[frozenset[int], ...]:
    """Inconsistent set per ladder radius for one anchor vertex.

    One direct-distance scan and one cutoff Dijkstra serve all radii. The
    optimizer reuses this as its per-anchor cache unit, so every consumer
    sees identical sets.
    """
    arr = graph.euclid_array_from(anchor)
    order = graph.vertex_ids()
    network = shortest_path_distances(graph, {anchor}, cutoff=ladder.max_network_cutoff)
    inf = float("inf")
    sets = []
    for r in ladder.radii:
        budget = ladder.tau * r
        close = np.flatnonzero(arr <= r)
        sets.append(
            frozenset(order[i] for i in close if network.get(order[i], inf) > budget)
        )
    return tuple(sets)


def analyze(graph: StreetGraph, placement: PoiPlacement, ladder: ScaleLadder) -> InconsistencyReport:
    """Full multi-scale report over every (POI, radius) pair."""
    if len(placement) == 0:
        raise InvalidInputError("placement has no POIs")
    placement.validate_against(graph)

    degree: dict[int, int] = {}
    per_pair: dict[tuple[str, float], frozenset[int]] = {}
    for poi in placement.pois:
        for r, bad in zip(ladder.radii, anchor_pair_sets(graph, poi.vertex, ladder)):
            per_pair[(poi.id, r)] = bad
            for vid in bad:
                degree[vid] = degree.get(vid, 0) + 1

    return InconsistencyReport(
        degree=degree,
        per_pair=per_pair,
        inconsistent_vertices=len(degree),
        degree_sum=sum(degree.values()),
        degree_max=max(degree.values(), default=0),
    )


def placement_from_records(graph: StreetGraph, records: list) -> PoiPlacement:
    """Build a placement from ``{"id", "category", "lat"/"lon" or "vertex"}``
    records, snapping coordinates to the nearest vertex."""
    pois = []
    for item in records:
        if not isinstance(item, dict) or "id" not in item:
            raise InvalidInputError("each POI record needs at least an 'id'")
        category = str(item.get("category", "poi"))
        if "vertex" in item:
            try:
                vertex = int(item["vertex"])
            except (TypeError, ValueError):
                raise InvalidInputError(f"POI {item['id']!r} has a malformed vertex id") from None
            if vertex not in graph:
                raise InvalidVertexError(f"POI {item['id']!r} references unknown vertex {vertex}")
        elif "lat" in item and "lon" in item:
            try:
                point = GeoPoint(float(item["lat"]), float(item["lon"]))
            except (TypeError, ValueError):
                raise InvalidInputError(f"POI {item['id']!r} has malformed coordinates") from None
            if graph.distance_mode == "haversine":
                check_geographic(point)
            vertex = nearest_vertex(graph, point)
        else:
            raise InvalidInputError(f"POI {item['id']!r} needs 'vertex' or 'lat'/'lon'")
        pois.append(Poi(str(item["id"]), category, vertex))
    return PoiPlacement(tuple(pois))


# -- serialization -------------------------------------------------------


def report_to_dict(report: InconsistencyReport) -> dict:
    return {
        "degrees": {str(vid): report.degree[vid] for vid in sorted(report.degree)},
        "pairs": [
            {"poi": poi_id, "radius_m": radius, "vertices": sorted(vertices)}
            for (poi_id, radius), vertices in report.per_pair.items()
        ],
        "summary": {
            "inconsistent_vertices": report.inconsistent_vertices,
            "degree_sum": report.degree_sum,
            "degree_max": report.degree_max,
        },
    }


def report_to_json_bytes(report: InconsistencyReport) -> bytes:
    return json.dumps(report_to_dict(report), separators=(",", ":")).encode("ascii") + b"\n"


def report_from_dict(doc: dict) -> InconsistencyReport:
    try:
        degree = {int(k): int(v) for k, v in doc["degrees"].items()}
        per_pair = {
            (p["poi"], float(p["radius_m"])): frozenset(p["vertices"]) for p in doc["pairs"]
        }
        summary = doc["summary"]
        return InconsistencyReport(
            degree=degree,
            per_pair=per_pair,
            inconsistent_vertices=int(summary["inconsistent_vertices"]),
            degree_sum=int(summary["degree_sum"]),
            degree_max=int(summary["degree_max"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"report document missing or malformed field: {exc}") from None


def report_to_geojson_dict(
    graph: StreetGraph, report: InconsistencyReport, placement: PoiPlacement | None = None
) -> dict:
    """FeatureCollection of vertex points carrying a ``degree`` property,
    followed by POI points when a placement is supplied."""
    features = []
    for vid in graph.vertex_ids():
        pt = graph.point(vid)
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [pt.lon, pt.lat]},
                "properties": {"vertex_id": vid, "degree": report.degree.get(vid, 0)},
            }
        )
    if placement is not None:
        for poi in placement.pois:
            pt = graph.point(poi.vertex)
            features.append(
                {
                    "type": "Feature",
                    "geometry": {"type": "Point", "coordinates": [pt.lon, pt.lat]},
                    "properties": {"poi": poi.id, "category": poi.category, "vertex_id": poi.vertex},
                }
            )
    return {"type": "FeatureCollection", "features": features}


def report_to_geojson_bytes(
    graph: StreetGraph, report: InconsistencyReport, placement: PoiPlacement | None = None
) -> bytes:
    doc = report_to_geojson_dict(graph, report, placement)
    return json.dumps(doc, separators=(",", ":")).encode("ascii") + b"\n"
