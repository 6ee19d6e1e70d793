"""Centrality indicators used to verify placements.

Three indicators are supported. Closeness (Wasserman-Faust scaled so
values stay comparable on disconnected graphs), exact weighted betweenness
via Brandes' accumulation, and an entropy-based accessibility: the
exponential of the Shannon entropy of the h-step uniform random-walk
distribution, i.e. the effective number of h-step destinations. The walk
is degree-uniform (topological); length weighting would be a variant.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sparse_dijkstra

from .errors import InvalidInputError, InvalidVertexError
from .graph import StreetGraph, shortest_path_distances
from .inconsistency import PoiPlacement

INDICATORS = ("accessibility", "betweenness", "closeness")
DEFAULT_WALK_STEPS = 3


def closeness(graph: StreetGraph, v: int) -> float:
    """Scaled closeness of one vertex; 0 for an isolated vertex."""
    dm = shortest_path_distances(graph, {v}, cutoff=None)
    n = graph.vertex_count
    reachable = len(dm)
    if reachable <= 1 or n <= 1:
        return 0.0
    total = sum(dm.dist.values())
    return ((reachable - 1) / total) * ((reachable - 1) / (n - 1))


def _as_csr(graph: StreetGraph) -> csr_matrix:
    order = graph.vertex_ids()
    index = {vid: i for i, vid in enumerate(order)}
    entries: dict[tuple[int, int], float] = {}
    for vid in order:
        i = index[vid]
        for nbr, length in graph.neighbors(vid):
            key = (i, index[nbr])
            prev = entries.get(key)
            if prev is None or length < prev:
                entries[key] = length
    n = len(order)
    if not entries:
        return csr_matrix((n, n))
    rows, cols, data = zip(*((i, j, w) for (i, j), w in entries.items()))
    return csr_matrix((data, (rows, cols)), shape=(n, n))


def closeness_all(graph: StreetGraph, chunk: int = 512) -> dict[int, float]:
    """Closeness for every vertex at once (sparse-Dijkstra backed).

    Memoized on the graph: it is immutable, and the all-sources pass is
    the expensive part of candidate-pool construction.
    """
    cached = graph._cache.get("closeness_all")
    if cached is not None:
        return cached
    order = graph.vertex_ids()
    n = len(order)
    values: dict[int, float] = {}
    if n == 1:
        values[order[0]] = 0.0
    else:
        matrix = _as_csr(graph)
        for start in range(0, n, chunk):
            idx = list(range(start, min(start + chunk, n)))
            dists = sparse_dijkstra(matrix, directed=True, indices=idx)
            finite = np.isfinite(dists)
            reachable = finite.sum(axis=1)
            totals = np.where(finite, dists, 0.0).sum(axis=1)
            for row, i in enumerate(idx):
                r = int(reachable[row])
                if r <= 1:
                    values[order[i]] = 0.0
                else:
                    values[order[i]] = ((r - 1) / float(totals[row])) * ((r - 1) / (n - 1))
    graph._cache["closeness_all"] = values
    return values


def betweenness(graph: StreetGraph) -> dict[int, float]:
    """Exact weighted betweenness, endpoints excluded; undirected graphs
    halved per convention."""
    bc = {vid: 0.0 for vid in graph.vertex_ids()}
    for s in graph.vertex_ids():
        stack, preds, sigma = _dijkstra_sssp(graph, s)
        delta = {vid: 0.0 for vid in sigma}
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    if not any(directed for _, _, _, directed in graph.edges()):
        for vid in bc:
            bc[vid] /= 2.0
    return bc


def _dijkstra_sssp(graph, s):
    """Shortest-path DAG from s: settle order, predecessor lists, path
    counts."""
    stack = []
    preds: dict[int, list[int]] = {s: []}
    sigma: dict[int, float] = {s: 1.0}
    dist: dict[int, float] = {}
    seen: dict[int, float] = {s: 0.0}
    heap = [(0.0, s)]
    while heap:
        d, v = heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        stack.append(v)
        for w, length in graph.neighbors(v):
            if w in dist:
                continue
            vw = d + length
            old = seen.get(w)
            if old is None or vw < old:
                seen[w] = vw
                heappush(heap, (vw, w))
                sigma[w] = sigma[v]
                preds[w] = [v]
            elif vw == old:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return stack, preds, sigma


def walk_distribution(graph: StreetGraph, v: int, h: int) -> dict[int, float]:
    """Position distribution after h steps of a degree-uniform walk.

    A vertex with no outgoing edges absorbs the walk, which also covers
    isolated vertices.
    """
    if h < 1:
        raise InvalidInputError("step count must be >= 1")
    if v not in graph:
        raise InvalidVertexError(f"unknown vertex {v}")
    p = {v: 1.0}
    for _ in range(h):
        q: dict[int, float] = {}
        for u, mass in p.items():
            nbrs = graph.neighbors(u)
            if not nbrs:
                q[u] = q.get(u, 0.0) + mass
                continue
            share = mass / len(nbrs)
            for w, _ in nbrs:
                q[w] = q.get(w, 0.0) + share
        p = q
    return p


def accessibility(graph: StreetGraph, v: int, h: int = DEFAULT_WALK_STEPS) -> float:
    """Effective number of h-step destinations: exp(entropy of the walk
    distribution). Always in [1, n].

    A uniform distribution over k destinations yields exactly k (the
    entropy is ln k algebraically; taking the shortcut avoids exp/log
    round-off on the exact cases).
    """
    p = walk_distribution(graph, v, h)
    masses = [mass for mass in p.values() if mass > 0.0]
    if len(set(masses)) == 1:
        return float(len(masses))
    entropy = -sum(mass * math.log(mass) for mass in masses)
    return math.exp(entropy)


@dataclass(frozen=True)
class CentralityDelta:
    """Indicator values at each POI anchor before and after a relocation.

    Keyed by POI id because anchor vertices differ between placements.
    """

    indicator: str
    before: dict[str, float]
    after: dict[str, float]
    mean_change: float
    poi_anchor_changes: dict[str, tuple[int, int, float, float]]


def _indicator_at(graph, indicator, anchors):
    if indicator == "closeness":
        return {a: closeness(graph, a) for a in set(anchors)}
    if indicator == "betweenness":
        table = betweenness(graph)
        return {a: table[a] for a in set(anchors)}
    if indicator == "accessibility":
        return {a: accessibility(graph, a) for a in set(anchors)}
    raise InvalidInputError(f"unknown indicator {indicator!r}; expected one of {INDICATORS}")


def compare_placements(
    graph: StreetGraph, before: PoiPlacement, after: PoiPlacement, indicator: str = "closeness"
) -> CentralityDelta:
    """Indicator at each POI anchor under both placements, plus the mean
    signed change across POIs."""
    before_ids = {p.id for p in before.pois}
    after_ids = {p.id for p in after.pois}
    if before_ids != after_ids:
        raise InvalidInputError("placements must carry the same POI ids")
    before.validate_against(graph)
    after.validate_against(graph)

    anchors = [p.vertex for p in before.pois] + [p.vertex for p in after.pois]
    values = _indicator_at(graph, indicator, anchors)

    after_by_id = {p.id: p for p in after.pois}
    before_map: dict[str, float] = {}
    after_map: dict[str, float] = {}
    changes: dict[str, tuple[int, int, float, float]] = {}
    for p in before.pois:
        q = after_by_id[p.id]
        before_map[p.id] = values[p.vertex]
        after_map[p.id] = values[q.vertex]
        changes[p.id] = (p.vertex, q.vertex, values[p.vertex], values[q.vertex])
    k = len(before.pois)
    mean_change = (sum(after_map.values()) - sum(before_map.values())) / k
    return CentralityDelta(indicator, before_map, after_map, mean_change, changes)


def delta_to_dict(delta: CentralityDelta) -> dict:
    return {
        "indicator": delta.indicator,
        "pois": {
            pid: {
                "before_vertex": entry[0],
                "after_vertex": entry[1],
                "before": entry[2],
                "after": entry[3],
            }
            for pid, entry in delta.poi_anchor_changes.items()
        },
        "mean_change": delta.mean_change,
    }


# -- exports --------------------------------------------------------------


def indicator_table(graph: StreetGraph, h: int = DEFAULT_WALK_STEPS) -> list[tuple[int, str, float]]:
    """(vertex_id, indicator, value) rows for all three indicators."""
    close = closeness_all(graph)
    between = betweenness(graph)
    rows = []
    for vid in graph.vertex_ids():
        rows.append((vid, "accessibility", accessibility(graph, vid, h)))
        rows.append((vid, "betweenness", between[vid]))
        rows.append((vid, "closeness", close[vid]))
    return rows


def indicator_csv_bytes(graph: StreetGraph, h: int = DEFAULT_WALK_STEPS) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["vertex_id", "indicator", "value"])
    for vid, name, value in indicator_table(graph, h):
        writer.writerow([vid, name, repr(value)])
    return buf.getvalue().encode("ascii")


def indicators_to_geojson_bytes(graph: StreetGraph, h: int = DEFAULT_WALK_STEPS) -> bytes:
    close = closeness_all(graph)
    between = betweenness(graph)
    features = []
    for vid in graph.vertex_ids():
        pt = graph.point(vid)
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [pt.lon, pt.lat]},
                "properties": {
                    "vertex_id": vid,
                    "accessibility": accessibility(graph, vid, h),
                    "betweenness": between[vid],
                    "closeness": close[vid],
                },
            }
        )
    doc = {"type": "FeatureCollection", "features": features}
    return json.dumps(doc, separators=(",", ":")).encode("ascii") + b"\n"
