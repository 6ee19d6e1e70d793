import json
import math
import random

import pytest

from gridsight.errors import InvalidInputError, InvalidVertexError
from gridsight.graph import GeoPoint
from gridsight.inconsistency import (
    InconsistencyReport,
    Poi,
    PoiPlacement,
    ScaleLadder,
    analyze,
    detour_index,
    euclidean_reach_set,
    inconsistent_set,
    network_reach_set,
    placement_from_records,
    report_from_dict,
    report_to_geojson_dict,
    report_to_json_bytes,
)

from oracles import (
    apsp_maps,
    brute_analyze,
    brute_euclid_set,
    brute_inconsistent_set,
    brute_network_set,
)
from synth import barrier_grid, corpus, grid_graph, path_graph, with_isolated_vertex


def placement(*pois):
    return PoiPlacement(tuple(Poi(f"p{i}", "poi", v) for i, v in enumerate(pois)))


# -- euclidean reach ------------------------------------------------------


def test_euclid_reach_tiny_radius_is_anchor_only():
    g = path_graph(3)
    assert euclidean_reach_set(g, 1, 1.0) == {1}


def test_euclid_reach_collinear_path():
    g = path_graph(3)  # 0 m, 100 m, 200 m
    assert euclidean_reach_set(g, 0, 150.0) == {0, 1}


def test_euclid_reach_grid_corner_diagonal():
    g = grid_graph(4, 4)
    r = math.sqrt(100.0 * 100.0 + 100.0 * 100.0)
    got = euclidean_reach_set(g, 0, r)
    assert got == brute_euclid_set(g, 0, r)
    assert got == {0, 1, 4, 5}


def test_euclid_reach_invalid_anchor():
    g = path_graph(3)
    with pytest.raises(InvalidVertexError):
        euclidean_reach_set(g, 77, 100.0)


def test_euclid_reach_invalid_radius():
    g = path_graph(3)
    with pytest.raises(InvalidInputError):
        euclidean_reach_set(g, 0, 0.0)


# -- network reach --------------------------------------------------------


def test_network_reach_path():
    g = path_graph(3)
    assert network_reach_set(g, 0, 150.0) == {0, 1}


def test_network_reach_excludes_disconnected():
    g = with_isolated_vertex(path_graph(3), 99, GeoPoint(0.0, 50.0))
    assert 99 not in network_reach_set(g, 0, 1e12)


def test_network_reach_barrier_detour():
    g = barrier_grid()
    # Derived by hand and cross-checked: behind-the-barrier vertices need
    # the 300 m detour through row 0, so a 250 m budget excludes them all.
    got = network_reach_set(g, 5, 250.0)
    assert got == {0, 1, 2, 4, 5, 8, 9, 13}
    assert got == brute_network_set(apsp_maps(g), 5, 250.0)


# -- inconsistent sets -----------------------------------------------------


def test_inconsistent_empty_when_net_equals_euclid():
    g = path_graph(5)
    for r in (50.0, 150.0, 350.0):
        assert inconsistent_set(g, 0, r, 1.0) == set()


def test_isolated_vertex_is_always_inconsistent():
    g = with_isolated_vertex(path_graph(3), 99, GeoPoint(0.0, 50.0))
    for tau in (1.0, 1.5, 4.0):
        assert 99 in inconsistent_set(g, 0, 80.0, tau)


def test_barrier_inconsistent_set_two_blocks():
    g = barrier_grid()
    # r = 2 blocks, tau = 1.5: exactly the vertices behind the barrier
    # whose detour exceeds 300 m.
    got = inconsistent_set(g, 5, 200.0, 1.5)
    assert got == {7, 10}
    assert got == brute_inconsistent_set(g, apsp_maps(g), 5, 200.0, 1.5)


# -- detour index ----------------------------------------------------------


def test_detour_index_straight_edge():
    g = path_graph(2)
    assert detour_index(g, 1, 0) == pytest.approx(1.0, abs=1e-12)


def test_detour_index_grid_diagonal():
    g = grid_graph(3, 3, spacing=1.0)
    # Planar closed form: (|dx| + |dy|) / sqrt(dx^2 + dy^2).
    got = detour_index(g, 4, 0)
    assert got == pytest.approx(2.0 / math.sqrt(2.0), abs=1e-9)


def test_detour_index_disconnected_is_undefined():
    g = with_isolated_vertex(path_graph(3), 99, GeoPoint(0.0, 50.0))
    assert detour_index(g, 99, 0) is None


def test_detour_index_anchor_is_error():
    g = path_graph(3)
    with pytest.raises(InvalidInputError):
        detour_index(g, 0, 0)


def test_detour_index_at_least_one():
    rng = random.Random(5)
    for g in corpus(seed=23, count=6, max_n=60):
        anchor = rng.choice(g.vertex_ids())
        for v in g.vertex_ids():
            if v == anchor:
                continue
            ratio = detour_index(g, v, anchor)
            if ratio is not None:
                assert ratio >= 1.0 - 1e-9


# -- analyze ---------------------------------------------------------------


def test_analyze_zero_degrees_on_straight_path():
    g = path_graph(5)
    report = analyze(g, placement(0), ScaleLadder(radii=(150.0, 350.0), tau=1.0))
    assert report.degree == {}
    assert report.inconsistent_vertices == 0
    assert report.degree_max == 0


def test_analyze_barrier_two_radii():
    g = barrier_grid()
    ladder = ScaleLadder(radii=(100.0, 200.0), tau=1.4)
    report = analyze(g, placement(5), ladder)
    assert report.per_pair[("p0", 100.0)] == {6}
    assert report.per_pair[("p0", 200.0)] == {6, 7, 10}
    assert report.degree == {6: 2, 7: 1, 10: 1}
    assert set(report.degree.values()) <= {1, 2}
    assert report.inconsistent_vertices == 3
    assert report.degree_sum == 4
    assert report.degree_max == 2

    degree, per_pair = brute_analyze(g, placement(5), ladder)
    assert report.degree == degree
    assert report.per_pair == per_pair


def test_analyze_coincident_pois_double_degrees():
    g = barrier_grid()
    ladder = ScaleLadder(radii=(100.0, 200.0), tau=1.4)
    single = analyze(g, placement(5), ladder)
    double = analyze(g, placement(5, 5), ladder)
    assert double.degree == {v: 2 * d for v, d in single.degree.items()}
    assert double.degree_sum == 2 * single.degree_sum
    assert double.inconsistent_vertices == single.inconsistent_vertices


def test_analyze_empty_placement_rejected():
    g = path_graph(3)
    with pytest.raises(InvalidInputError):
        analyze(g, PoiPlacement(()), ScaleLadder())


def test_analyze_unknown_anchor_rejected():
    g = path_graph(3)
    with pytest.raises(InvalidVertexError):
        analyze(g, placement(42), ScaleLadder())


def test_analyze_matches_brute_force_on_random_graphs():
    rng = random.Random(31)
    for g in corpus(seed=97, count=9, max_n=80):
        anchors = rng.sample(g.vertex_ids(), min(3, g.vertex_count))
        span = 1000.0
        ladder = ScaleLadder(
            radii=(rng.uniform(50, 300), rng.uniform(301, 700)), tau=rng.uniform(1.0, 2.0)
        )
        report = analyze(g, placement(*anchors), ladder)
        degree, per_pair = brute_analyze(g, placement(*anchors), ladder)
        assert report.degree == degree
        assert report.per_pair == per_pair


# -- set-theoretic invariants ----------------------------------------------


def test_reach_inclusions_and_identities():
    rng = random.Random(71)
    for g in corpus(seed=5, count=12, max_n=60):
        anchor = rng.choice(g.vertex_ids())
        r = rng.uniform(40, 600)
        tau = rng.uniform(1.0, 2.5)
        E = euclidean_reach_set(g, anchor, r)
        N = network_reach_set(g, anchor, r)
        N_budget = network_reach_set(g, anchor, tau * r)
        assert N <= N_budget
        assert N <= E
        # Cardinality identity at tau = 1.
        assert len(E) == len(N) + len(inconsistent_set(g, anchor, r, 1.0))
        # More detour budget never creates inconsistency.
        assert inconsistent_set(g, anchor, r, tau) <= inconsistent_set(g, anchor, r, 1.0)


def test_degree_bound():
    g = barrier_grid()
    ladder = ScaleLadder(radii=(100.0, 200.0, 400.0), tau=1.1)
    p = placement(5, 10, 0)
    report = analyze(g, p, ladder)
    bound = len(p) * len(ladder.radii)
    assert all(0 <= d <= bound for d in report.degree.values())


# -- types and validation ----------------------------------------------------


def test_scale_ladder_validation():
    with pytest.raises(InvalidInputError):
        ScaleLadder(radii=())
    with pytest.raises(InvalidInputError):
        ScaleLadder(radii=(100.0, 100.0))
    with pytest.raises(InvalidInputError):
        ScaleLadder(radii=(-5.0,))
    with pytest.raises(InvalidInputError):
        ScaleLadder(radii=(100.0,), tau=0.5)


def test_placement_unique_ids():
    with pytest.raises(InvalidInputError):
        PoiPlacement((Poi("a", "x", 1), Poi("a", "y", 2)))


def test_placement_from_records_snaps_coordinates():
    g = barrier_grid()
    records = [{"id": "h1", "category": "hospital", "lat": 130.0, "lon": 120.0}]
    got = placement_from_records(g, records)
    assert got.pois[0].vertex == 5
    records = [{"id": "h1", "category": "hospital", "vertex": 9}]
    assert placement_from_records(g, records).pois[0].vertex == 9


# -- serialization -----------------------------------------------------------


def test_report_json_shape_and_determinism():
    g = barrier_grid()
    ladder = ScaleLadder(radii=(100.0, 200.0), tau=1.4)
    report = analyze(g, placement(5), ladder)
    payload = report_to_json_bytes(report)
    assert payload == report_to_json_bytes(analyze(g, placement(5), ladder))
    doc = json.loads(payload)
    assert set(doc) == {"degrees", "pairs", "summary"}
    assert doc["degrees"] == {"6": 2, "7": 1, "10": 1}
    assert doc["pairs"][0] == {"poi": "p0", "radius_m": 100.0, "vertices": [6]}
    assert doc["pairs"][1]["vertices"] == [6, 7, 10]
    assert doc["summary"] == {"inconsistent_vertices": 3, "degree_sum": 4, "degree_max": 2}

    restored = report_from_dict(doc)
    assert restored.degree == report.degree
    assert restored.per_pair == report.per_pair


def test_report_geojson_features():
    g = barrier_grid()
    ladder = ScaleLadder(radii=(100.0, 200.0), tau=1.4)
    p = placement(5)
    report = analyze(g, p, ladder)
    doc = report_to_geojson_dict(g, report, p)
    assert doc["type"] == "FeatureCollection"
    assert len(doc["features"]) == g.vertex_count + 1
    by_vid = {
        f["properties"]["vertex_id"]: f["properties"]["degree"]
        for f in doc["features"]
        if "degree" in f["properties"]
    }
    assert by_vid[6] == 2
    assert by_vid[0] == 0
