"""Street-network mobility analysis toolkit.

Builds geometric graphs from OpenStreetMap extracts, finds vertices whose
direct-distance proximity to points of interest is not matched by street
reachability, relocates the POIs to shrink that set, and verifies the
outcome with centrality indicators.
"""

__version__ = "0.1.0"

from .errors import GridsightError
from .graph import DistanceMap, GeoPoint, StreetGraph, haversine_m, nearest_vertex, shortest_path_distances
from .inconsistency import (
    InconsistencyReport,
    Poi,
    PoiPlacement,
    ScaleLadder,
    analyze,
    detour_index,
    euclidean_reach_set,
    inconsistent_set,
    network_reach_set,
)
from .centrality import accessibility, betweenness, closeness, compare_placements
from .optimize import (
    Objective,
    PlacementSolution,
    SearchConfig,
    evaluate_placement,
    exhaustive_search,
    local_search,
    what_if,
)
from .osm import TravelProfile, build_street_graph, filter_profile, ingest, parse_osm_xml

__all__ = [
    "DistanceMap",
    "GeoPoint",
    "GridsightError",
    "InconsistencyReport",
    "Objective",
    "PlacementSolution",
    "Poi",
    "PoiPlacement",
    "ScaleLadder",
    "SearchConfig",
    "StreetGraph",
    "TravelProfile",
    "accessibility",
    "analyze",
    "betweenness",
    "build_street_graph",
    "closeness",
    "compare_placements",
    "detour_index",
    "euclidean_reach_set",
    "evaluate_placement",
    "exhaustive_search",
    "filter_profile",
    "haversine_m",
    "inconsistent_set",
    "ingest",
    "local_search",
    "nearest_vertex",
    "network_reach_set",
    "parse_osm_xml",
    "shortest_path_distances",
    "what_if",
]
