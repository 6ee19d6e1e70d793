"""OpenStreetMap XML ingestion and street-graph construction.

Parses OSM 0.6 ``node``/``way`` elements, filters ways by travel profile,
then builds a simplified graph: every shared node becomes a vertex, and
degree-2 chain nodes interior to a way are contracted so each edge spans
intersection-to-intersection with length equal to the summed segment
lengths. Contraction keeps all pairwise shortest-path distances intact.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace

from .errors import EmptyExtractError, EmptyGraphError, ParseError
from .graph import GeoPoint, StreetGraph, check_geographic, haversine_m

_DRIVE_TAGS = frozenset(
    {
        "motorway",
        "trunk",
        "primary",
        "secondary",
        "tertiary",
        "unclassified",
        "residential",
        "motorway_link",
        "trunk_link",
        "primary_link",
        "secondary_link",
        "tertiary_link",
        "living_street",
    }
)

_WALK_TAGS = (_DRIVE_TAGS - {"motorway", "trunk", "motorway_link", "trunk_link"}) | {
    "footway",
    "pedestrian",
    "path",
    "steps",
    "track",
}


@dataclass(frozen=True)
class TravelProfile:
    """Edge-filtering and directedness rules for one travel mode."""

    name: str
    allowed_highway_tags: frozenset[str]
    oneway_respected: bool

    @classmethod
    def named(cls, name: str) -> "TravelProfile":
        if name == "drive":
            return cls("drive", _DRIVE_TAGS, oneway_respected=True)
        if name == "walk":
            return cls("walk", _WALK_TAGS, oneway_respected=False)
        raise ValueError(f"unknown travel profile {name!r}")


@dataclass(frozen=True)
class RawNode:
    id: int
    lat: float
    lon: float


@dataclass(frozen=True)
class RawWay:
    id: int
    node_refs: tuple[int, ...]
    tags: dict[str, str]
    # 0 = both ways, 1 = forward only, -1 = reverse only; resolved by
    # filter_profile for profiles that respect oneway tags.
    oneway: int = 0


@dataclass
class ParseDiagnostics:
    invalid_nodes: int = 0
    duplicate_nodes: int = 0
    dropped_ways: int = 0
    notes: list[str] = field(default_factory=list)


def _byte_offset(data: bytes, line: int, column: int) -> int:
    lines = data.split(b"\n")
    return sum(len(l) + 1 for l in lines[: line - 1]) + column


def parse_osm_xml(document: bytes) -> tuple[list[RawNode], list[RawWay], ParseDiagnostics]:
    """Parse an OSM 0.6 XML document into raw nodes and ways.

    Malformed elements are skipped and counted; ways referencing unknown
    nodes or fewer than two nodes are dropped with a diagnostic. A document
    with zero valid nodes is an empty extract.
    """
    if isinstance(document, str):
        document = document.encode("utf-8")
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = getattr(exc, "position", (1, 0))
        offset = _byte_offset(document, line, column)
        raise ParseError(f"not well-formed XML at byte {offset}: {exc}", byte_offset=offset) from None

    diagnostics = ParseDiagnostics()
    nodes: dict[int, RawNode] = {}
    ways: list[RawWay] = []

    for elem in root:
        if elem.tag == "node":
            try:
                nid = int(elem.attrib["id"])
                lat = float(elem.attrib["lat"])
                lon = float(elem.attrib["lon"])
                check_geographic(GeoPoint(lat, lon))
            except Exception:
                diagnostics.invalid_nodes += 1
                diagnostics.notes.append(f"skipped malformed node {elem.attrib.get('id')}")
                continue
            if nid in nodes:
                diagnostics.duplicate_nodes += 1
                diagnostics.notes.append(f"skipped duplicate node {nid}")
                continue
            nodes[nid] = RawNode(nid, lat, lon)
        elif elem.tag == "way":
            try:
                wid = int(elem.attrib["id"])
                refs = tuple(int(nd.attrib["ref"]) for nd in elem if nd.tag == "nd")
                tags = {t.attrib["k"]: t.attrib["v"] for t in elem if t.tag == "tag"}
            except Exception:
                diagnostics.dropped_ways += 1
                diagnostics.notes.append(f"dropped malformed way {elem.attrib.get('id')}")
                continue
            if len(refs) < 2:
                diagnostics.dropped_ways += 1
                diagnostics.notes.append(f"dropped way {wid}: fewer than 2 node refs")
                continue
            if any(r not in nodes for r in refs):
                diagnostics.dropped_ways += 1
                diagnostics.notes.append(f"dropped way {wid}: unresolved node ref")
                continue
            ways.append(RawWay(wid, refs, tags))

    if not nodes:
        raise EmptyExtractError("document contains no valid nodes")
    return list(nodes.values()), ways, diagnostics


def _resolve_oneway(tags: dict[str, str]) -> int:
    value = tags.get("oneway", "").strip().lower()
    if value in ("yes", "true", "1"):
        return 1
    if value in ("-1", "reverse"):
        return -1
    return 0


def filter_profile(ways: list[RawWay], profile: TravelProfile) -> list[RawWay]:
    """Keep ways whose highway tag the profile admits; resolve one-way
    direction for profiles that respect it."""
    kept = []
    for way in ways:
        highway = way.tags.get("highway")
        if highway not in profile.allowed_highway_tags:
            continue
        oneway = _resolve_oneway(way.tags) if profile.oneway_respected else 0
        kept.append(replace(way, oneway=oneway))
    return kept


def build_street_graph(
    nodes: list[RawNode], ways: list[RawWay], profile: TravelProfile
) -> StreetGraph:
    """Contract filtered ways into an intersection-to-intersection graph.

    A node stays a vertex when it is a way endpoint or is used more than
    once across all ways (an intersection or self-crossing); other interior
    nodes are chain points folded into the enclosing edge. Self-loops are
    dropped and the shortest of any parallel edges is kept, neither of
    which can change a shortest-path distance.
    """
    coords = {n.id: GeoPoint(n.lat, n.lon) for n in nodes}

    usage: dict[int, int] = {}
    for way in ways:
        for ref in way.node_refs:
            usage[ref] = usage.get(ref, 0) + 1

    def is_vertex(way: RawWay, position: int) -> bool:
        if position == 0 or position == len(way.node_refs) - 1:
            return True
        return usage[way.node_refs[position]] > 1

    vertex_ids: set[int] = set()
    edges: list[tuple[int, int, float, bool]] = []
    for way in ways:
        refs = way.node_refs
        start = 0
        vertex_ids.add(refs[0])
        acc = 0.0
        for i in range(1, len(refs)):
            seg = haversine_m(coords[refs[i - 1]], coords[refs[i]])
            acc += seg
            if is_vertex(way, i):
                u, v = refs[start], refs[i]
                vertex_ids.add(v)
                if u != v:
                    # Coincident intersections still need a positive length.
                    length = max(acc, 1e-9)
                    if way.oneway == -1:
                        edges.append((v, u, length, True))
                    else:
                        edges.append((u, v, length, way.oneway == 1))
                start = i
                acc = 0.0

    if not vertex_ids:
        raise EmptyGraphError("no ways survive profile filtering")
    vertices = {vid: coords[vid] for vid in vertex_ids}
    return StreetGraph.build(vertices, edges, profile=profile.name, distance_mode="haversine")


def ingest(document: bytes, profile_name: str) -> tuple[StreetGraph, ParseDiagnostics]:
    """Parse, filter and build in one step."""
    profile = TravelProfile.named(profile_name)
    nodes, ways, diagnostics = parse_osm_xml(document)
    graph = build_street_graph(nodes, filter_profile(ways, profile), profile)
    return graph, diagnostics
