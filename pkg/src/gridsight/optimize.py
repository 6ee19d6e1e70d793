"""Heuristic POI relocation minimizing the count of inconsistent vertices.

Best-improvement hill climbing over single-POI relocations: every
iteration scans all (POI, unoccupied candidate vertex) moves, applies the
lexicographically best strictly improving one, and stops at a certified
local optimum or the iteration cap. Moves never stack two POIs on one
vertex, keeping the search inside the distinct-placement space that the
exhaustive enumerator verifies (stacking would trivially shrink the
inconsistent-vertex union without placing a second usable facility).
Restarts draw fresh placements from the candidate pool with the seeded
generator. An exhaustive enumerator provides the global optimum on
desk-scale instances for verification.

The objective is lexicographic: inconsistent vertex count, then degree
sum, then mean direct distance to the nearest POI (always defined, unlike
a network-distance mean on disconnected graphs, and cheap to patch when a
single POI moves).
"""

from __future__ import annotations

import itertools
import json
import math
import random
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .centrality import CentralityDelta, closeness_all, compare_placements, delta_to_dict
from .errors import BudgetExceededError, InvalidConfigError, InvalidInputError
from .graph import StreetGraph
from .inconsistency import (
    InconsistencyReport,
    Poi,
    PoiPlacement,
    ScaleLadder,
    analyze,
    anchor_pair_sets,
)

DEFAULT_POOL_SIZE = 512
DEFAULT_BUDGET = 200_000


@dataclass(frozen=True, order=True)
class Objective:
    """Lexicographically compared, all components minimized."""

    inconsistent_vertices: int
    degree_sum: int
    mean_nearest_poi_distance_m: float

    def as_tuple(self):
        return (self.inconsistent_vertices, self.degree_sum, self.mean_nearest_poi_distance_m)


@dataclass(frozen=True)
class SearchConfig:
    candidate_pool: str = "top-m-by-closeness"
    pool_size: int = DEFAULT_POOL_SIZE
    max_iterations: int = 100
    restarts: int = 1
    seed: int = 42
    ladder: ScaleLadder = field(default_factory=ScaleLadder)

    def __post_init__(self):
        if self.candidate_pool not in ("all-vertices", "top-m-by-closeness"):
            raise InvalidConfigError(f"unknown candidate pool {self.candidate_pool!r}")
        if self.pool_size < 1:
            raise InvalidConfigError("pool_size must be >= 1")
        if self.max_iterations < 1:
            raise InvalidConfigError("max_iterations must be >= 1")
        if self.restarts < 1:
            raise InvalidConfigError("restarts must be >= 1")


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    poi: str | None
    from_vertex: int | None
    to_vertex: int | None
    objective: Objective


@dataclass(frozen=True)
class PlacementSolution:
    placement: PoiPlacement
    objective: Objective
    trace: tuple[TraceEntry, ...]
    centrality_delta: CentralityDelta | None
    converged: bool


class SearchProgress:
    """Cooperative cancellation flag plus a progress counter.

    Safe to read from other threads while a search runs.
    """

    def __init__(self):
        self.iteration = 0
        self.best_objective: Objective | None = None
        self._cancel = threading.Event()

    def cancel(self):
        self._cancel.set()

    @property
    def cancelled(self) -> bool:
        return self._cancel.is_set()

    def _update(self, iteration: int, objective: Objective):
        self.iteration = iteration
        if self.best_objective is None or objective < self.best_objective:
            self.best_objective = objective


class PlacementEvaluator:
    """Caches per-anchor reach structures so move scans stay cheap.

    All callers share one numeric path: pair sets come from
    ``anchor_pair_sets`` and the distance mean from the cached per-anchor
    arrays, so patched and fresh evaluations agree exactly.
    """

    def __init__(self, graph: StreetGraph, ladder: ScaleLadder):
        self.graph = graph
        self.ladder = ladder
        self._n = graph.vertex_count
        self._pair_sets: dict[int, tuple[frozenset[int], ...]] = {}
        self._unions: dict[int, tuple[frozenset[int], int]] = {}
        self._euclid: dict[int, np.ndarray] = {}

    def pair_sets(self, anchor: int) -> tuple[frozenset[int], ...]:
        sets = self._pair_sets.get(anchor)
        if sets is None:
            sets = anchor_pair_sets(self.graph, anchor, self.ladder)
            self._pair_sets[anchor] = sets
        return sets

    def anchor_union(self, anchor: int) -> tuple[frozenset[int], int]:
        """(union of the anchor's per-radius sets, summed cardinality)."""
        cached = self._unions.get(anchor)
        if cached is None:
            sets = self.pair_sets(anchor)
            union = frozenset().union(*sets) if sets else frozenset()
            cached = (union, sum(len(s) for s in sets))
            self._unions[anchor] = cached
        return cached

    def euclid_array(self, anchor: int) -> np.ndarray:
        arr = self._euclid.get(anchor)
        if arr is None:
            arr = self.graph.euclid_array_from(anchor)
            self._euclid[anchor] = arr
        return arr

    def mean_nearest(self, anchors: Sequence[int]) -> float:
        nearest = np.minimum.reduce([self.euclid_array(a) for a in anchors])
        return float(nearest.mean())

    def degree_counts(self, anchors: Sequence[int]) -> dict[int, int]:
        counts: dict[int, int] = {}
        for a in anchors:
            for s in self.pair_sets(a):
                for vid in s:
                    counts[vid] = counts.get(vid, 0) + 1
        return counts

    def objective(self, anchors: Sequence[int]) -> Objective:
        counts = self.degree_counts(anchors)
        return Objective(len(counts), sum(counts.values()), self.mean_nearest(anchors))

    def moved_objective(self, base: "_MoveBase", candidate: int) -> Objective:
        """Objective after re-anchoring the held-out POI, via degree
        patching against the precomputed base."""
        union, total = self.anchor_union(candidate)
        gained = sum(1 for vid in union if vid not in base.counts)
        anchors = list(base.other_anchors)
        anchors.append(candidate)
        return Objective(base.nonzero + gained, base.degree_sum + total, self.mean_nearest(anchors))

    def move_base(self, anchors: Sequence[int], index: int) -> "_MoveBase":
        """Degree state with one POI's contribution subtracted."""
        counts = self.degree_counts(anchors)
        for s in self.pair_sets(anchors[index]):
            for vid in s:
                left = counts[vid] - 1
                if left:
                    counts[vid] = left
                else:
                    del counts[vid]
        others = tuple(a for i, a in enumerate(anchors) if i != index)
        return _MoveBase(counts, len(counts), sum(counts.values()), others)


@dataclass(frozen=True)
class _MoveBase:
    counts: dict[int, int]
    nonzero: int
    degree_sum: int
    other_anchors: tuple[int, ...]


def evaluate_placement(graph: StreetGraph, placement: PoiPlacement, ladder: ScaleLadder) -> Objective:
    """Deterministic objective for one placement."""
    if len(placement) == 0:
        raise InvalidInputError("placement has no POIs")
    placement.validate_against(graph)
    return PlacementEvaluator(graph, ladder).objective(placement.anchors())


def what_if(
    graph: StreetGraph,
    placement: PoiPlacement,
    move: tuple[str, int],
    ladder: ScaleLadder,
) -> tuple[Objective, InconsistencyReport]:
    """Evaluate one hypothetical relocation without mutating anything."""
    poi_id, target = move
    placement.by_id(poi_id)
    if target not in graph:
        raise InvalidInputError(f"what-if target vertex {target} is not in the graph")
    moved = placement.moved(poi_id, target)
    return evaluate_placement(graph, moved, ladder), analyze(graph, moved, ladder)


def candidate_pool(graph: StreetGraph, config: SearchConfig) -> tuple[int, ...]:
    """Candidate target vertices, ascending by id."""
    if config.candidate_pool == "all-vertices":
        return graph.vertex_ids()
    m = min(graph.vertex_count, config.pool_size)
    ranked = sorted(closeness_all(graph).items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(sorted(vid for vid, _ in ranked[:m]))


def _climb(
    evaluator: PlacementEvaluator,
    placement: PoiPlacement,
    pool: tuple[int, ...],
    max_iterations: int,
    progress: SearchProgress | None,
) -> tuple[PoiPlacement, Objective, list[TraceEntry], bool]:
    current = evaluator.objective(placement.anchors())
    trace = [TraceEntry(0, None, None, None, current)]
    if progress is not None:
        progress._update(0, current)
    converged = False
    for iteration in range(1, max_iterations + 1):
        if progress is not None and progress.cancelled:
            break
        anchors = placement.anchors()
        occupied = set(anchors)
        best_key = None
        best = None
        for index, poi in enumerate(placement.pois):
            if progress is not None and progress.cancelled:
                break
            base = evaluator.move_base(anchors, index)
            for target in pool:
                # Never stack POIs: the exhaustive oracle enumerates
                # distinct k-subsets, and relocation keeps that space.
                if target in occupied:
                    continue
                objective = evaluator.moved_objective(base, target)
                key = (objective, poi.id, target)
                if best_key is None or key < best_key:
                    best_key = key
                    best = (poi.id, poi.vertex, target, objective)
        if progress is not None and progress.cancelled:
            break
        if best is None or not best[3] < current:
            converged = True
            break
        poi_id, source, target, current = best[0], best[1], best[2], best[3]
        placement = placement.moved(poi_id, target)
        trace.append(TraceEntry(iteration, poi_id, source, target, current))
        if progress is not None:
            progress._update(iteration, current)
    return placement, current, trace, converged


def local_search(
    graph: StreetGraph,
    initial: PoiPlacement,
    config: SearchConfig,
    progress: SearchProgress | None = None,
    max_workers: int = 1,
) -> PlacementSolution:
    """Best-improvement hill climbing with seeded restarts.

    Returns the best solution across restarts; ``converged`` certifies
    that its final placement admits no improving single relocation.
    """
    if len(initial) == 0:
        raise InvalidInputError("initial placement has no POIs")
    initial.validate_against(graph)
    pool = candidate_pool(graph, config)
    if not pool:
        raise InvalidConfigError("candidate pool is empty")
    k = len(initial)
    if config.restarts > 1 and k > len(pool):
        raise InvalidConfigError(f"candidate pool ({len(pool)}) smaller than POI count ({k})")

    evaluator = PlacementEvaluator(graph, config.ladder)
    rng = random.Random(config.seed)
    starts = [initial]
    for _ in range(config.restarts - 1):
        anchors = rng.sample(pool, k)
        starts.append(
            PoiPlacement(tuple(Poi(p.id, p.category, a) for p, a in zip(initial.pois, anchors)))
        )

    def run(start: PoiPlacement):
        return _climb(evaluator, start, pool, config.max_iterations, progress)

    if max_workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            outcomes = list(executor.map(run, starts))
    else:
        outcomes = []
        for start in starts:
            if progress is not None and progress.cancelled and outcomes:
                break
            outcomes.append(run(start))

    best = None
    for placement, objective, trace, converged in outcomes:
        if best is None or objective < best[1]:
            best = (placement, objective, trace, converged)
    placement, objective, trace, converged = best
    delta = compare_placements(graph, initial, placement, "closeness")
    return PlacementSolution(placement, objective, tuple(trace), delta, converged)


def exhaustive_search(
    graph: StreetGraph,
    k: int,
    ladder: ScaleLadder,
    budget: int = DEFAULT_BUDGET,
) -> PlacementSolution:
    """Global optimum over all k-subsets of vertices, for verification.

    Ties break to the first (smallest) sorted vertex-id tuple.
    """
    if k < 1:
        raise InvalidConfigError("POI count must be >= 1")
    n = graph.vertex_count
    if k > n:
        raise InvalidConfigError(f"POI count {k} exceeds vertex count {n}")
    required = math.comb(n, k)
    if required > budget:
        raise BudgetExceededError(
            f"exhaustive search needs {required} evaluations, budget is {budget}",
            required=required,
            budget=budget,
        )
    evaluator = PlacementEvaluator(graph, ladder)
    best_anchors = None
    best_objective = None
    for combo in itertools.combinations(graph.vertex_ids(), k):
        objective = evaluator.objective(combo)
        if best_objective is None or objective < best_objective:
            best_objective = objective
            best_anchors = combo
    placement = PoiPlacement(tuple(Poi(f"poi{i + 1}", "poi", a) for i, a in enumerate(best_anchors)))
    trace = (TraceEntry(0, None, None, None, best_objective),)
    return PlacementSolution(placement, best_objective, trace, None, True)


# -- configuration and serialization ---------------------------------------


def search_config_from_dict(doc: dict) -> SearchConfig:
    try:
        ladder = ScaleLadder(
            radii=tuple(float(r) for r in doc.get("radii", ScaleLadder().radii)),
            tau=float(doc.get("tau", ScaleLadder().tau)),
        )
        return SearchConfig(
            candidate_pool=doc.get("candidate_pool", "top-m-by-closeness"),
            pool_size=int(doc.get("pool_size", DEFAULT_POOL_SIZE)),
            max_iterations=int(doc.get("max_iterations", 100)),
            restarts=int(doc.get("restarts", 1)),
            seed=int(doc.get("seed", 42)),
            ladder=ladder,
        )
    except (TypeError, ValueError) as exc:
        raise InvalidConfigError(f"malformed search config: {exc}") from None


def search_config_from_file(path: str | Path) -> SearchConfig:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        doc = tomllib.loads(data.decode("utf-8"))
    else:
        doc = json.loads(data)
    if not isinstance(doc, dict):
        raise InvalidConfigError("search config must be a table/object")
    return search_config_from_dict(doc)


def objective_to_dict(objective: Objective) -> dict:
    return {
        "inconsistent_vertices": objective.inconsistent_vertices,
        "degree_sum": objective.degree_sum,
        "mean_nearest_poi_distance_m": objective.mean_nearest_poi_distance_m,
    }


def placement_to_dict(placement: PoiPlacement) -> dict:
    return {
        "pois": [{"id": p.id, "category": p.category, "vertex": p.vertex} for p in placement.pois]
    }


def solution_to_dict(solution: PlacementSolution) -> dict:
    return {
        "placement": placement_to_dict(solution.placement),
        "objective": objective_to_dict(solution.objective),
        "trace": [
            {
                "iteration": t.iteration,
                "poi": t.poi,
                "from_vertex": t.from_vertex,
                "to_vertex": t.to_vertex,
                "objective": objective_to_dict(t.objective),
            }
            for t in solution.trace
        ],
        "centrality_delta": None
        if solution.centrality_delta is None
        else delta_to_dict(solution.centrality_delta),
        "converged": solution.converged,
    }


def solution_to_json_bytes(solution: PlacementSolution) -> bytes:
    return json.dumps(solution_to_dict(solution), separators=(",", ":")).encode("ascii") + b"\n"
