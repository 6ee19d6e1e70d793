"""Command-line front door: ingest, analyze, optimize, export, serve.

Exit codes: 0 on success, 1 on domain errors (bad or missing input files,
empty extracts), 2 on usage errors. The ``GRIDSIGHT_LOG`` environment
variable (error|warn|info|debug) controls logging verbosity. Outputs are
produced by the same serializers as the HTTP service, byte for byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .errors import GridsightError, InvalidInputError
from .graph import StreetGraph
from .inconsistency import (
    ScaleLadder,
    analyze,
    placement_from_records,
    report_from_dict,
    report_to_geojson_bytes,
    report_to_json_bytes,
)
from .centrality import indicator_csv_bytes
from .optimize import (
    SearchConfig,
    local_search,
    search_config_from_file,
    solution_to_json_bytes,
)
from .osm import ingest

log = logging.getLogger("gridsight")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    level = os.environ.get("GRIDSIGHT_LOG", "warn").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _read_bytes(path: str) -> bytes:
    p = Path(path)
    if not p.exists():
        raise InvalidInputError(f"input file not found: {path}")
    return p.read_bytes()


def _write_bytes(path: str, data: bytes):
    if path == "-":
        sys.stdout.buffer.write(data)
    else:
        Path(path).write_bytes(data)


def _load_graph(path: str) -> StreetGraph:
    return StreetGraph.from_json(_read_bytes(path))


def _load_placement(graph: StreetGraph, path: str):
    try:
        records = json.loads(_read_bytes(path))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"POI file {path} is not valid JSON: {exc}") from None
    if not isinstance(records, list):
        raise InvalidInputError(f"POI file {path} must hold a JSON list")
    return placement_from_records(graph, records)


def _parse_radii(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise InvalidInputError(f"malformed radii list {text!r}") from None


def _cmd_ingest(args) -> int:
    graph, diagnostics = ingest(_read_bytes(args.input), args.profile)
    log.info(
        "built %s graph: %d vertices, %d edges (%d invalid nodes, %d dropped ways)",
        args.profile,
        graph.vertex_count,
        graph.edge_count,
        diagnostics.invalid_nodes,
        diagnostics.dropped_ways,
    )
    _write_bytes(args.output, graph.to_json_bytes())
    return 0


def _cmd_analyze(args) -> int:
    graph = _load_graph(args.graph)
    placement = _load_placement(graph, args.pois)
    ladder = ScaleLadder(radii=_parse_radii(args.radii), tau=args.tau)
    report = analyze(graph, placement, ladder)
    _write_bytes(args.output, report_to_json_bytes(report))
    log.info("analyzed %d POIs at %d radii: %d inconsistent vertices", len(placement), len(ladder.radii), report.inconsistent_vertices)
    return 0


def _cmd_optimize(args) -> int:
    graph = _load_graph(args.graph)
    placement = _load_placement(graph, args.pois)
    config = search_config_from_file(args.config) if args.config else SearchConfig()
    if args.seed is not None:
        config = SearchConfig(
            candidate_pool=config.candidate_pool,
            pool_size=config.pool_size,
            max_iterations=config.max_iterations,
            restarts=config.restarts,
            seed=args.seed,
            ladder=config.ladder,
        )
    workers = args.threads if args.threads > 0 else min(config.restarts, os.cpu_count() or 1)
    solution = local_search(graph, placement, config, max_workers=workers)
    _write_bytes(args.output, solution_to_json_bytes(solution))
    log.info(
        "optimize finished: objective (%d, %d, %.1f), converged=%s",
        solution.objective.inconsistent_vertices,
        solution.objective.degree_sum,
        solution.objective.mean_nearest_poi_distance_m,
        solution.converged,
    )
    return 0


def _cmd_export(args) -> int:
    graph = _load_graph(args.graph)
    if args.format == "csv":
        _write_bytes(args.output, indicator_csv_bytes(graph))
        return 0
    if args.report is None:
        raise InvalidInputError("geojson export needs --report")
    try:
        report = report_from_dict(json.loads(_read_bytes(args.report)))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"report file {args.report} is not valid JSON: {exc}") from None
    placement = _load_placement(graph, args.pois) if args.pois else None
    _write_bytes(args.output, report_to_geojson_bytes(graph, report, placement))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridsight", description="Street-network mobility analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse OSM XML into the graph interchange JSON")
    p.add_argument("--input", required=True, help="OSM XML file")
    p.add_argument("--profile", choices=("drive", "walk"), default="drive")
    p.add_argument("--output", required=True, help="graph JSON output path ('-' for stdout)")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("analyze", help="compute the inconsistency report")
    p.add_argument("--graph", required=True, help="graph interchange JSON")
    p.add_argument("--pois", required=True, help="JSON list of {id, category, lat, lon}")
    p.add_argument("--radii", default="400,800,1600", help="comma-separated meters")
    p.add_argument("--tau", type=float, default=1.5, help="detour tolerance >= 1")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("optimize", help="relocate POIs to minimize inconsistent vertices")
    p.add_argument("--graph", required=True)
    p.add_argument("--pois", required=True)
    p.add_argument("--config", help="search config (.json or .toml)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed (default 42)")
    p.add_argument("--threads", type=int, default=0, help="worker cap for restarts (0 = auto)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("export", help="export a report as GeoJSON or indicators as CSV")
    p.add_argument("--report", help="report JSON (required for geojson)")
    p.add_argument("--graph", required=True)
    p.add_argument("--pois", help="optional POI file; adds POI features to geojson")
    p.add_argument("--format", choices=("geojson", "csv"), default="geojson")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GridsightError as exc:
        print(f"{exc.code}: {exc.message}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
