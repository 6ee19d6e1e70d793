"""HTTP API for the companion UI and scripted clients.

Sessions hold one immutable graph each plus the current placement, ladder
and report; an LRU cap bounds the number of resident graphs. Optimization
runs as a background job per session (at most one at a time) with polled
progress and cooperative cancellation. Every response body is produced by
the same serializers the CLI uses, so equal inputs yield identical bytes.
"""

from __future__ import annotations

import json
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import Response

from . import __version__
from .errors import EmptyExtractError, GridsightError
from .graph import GeoPoint, StreetGraph, check_geographic, nearest_vertex
from .inconsistency import (
    InconsistencyReport,
    PoiPlacement,
    ScaleLadder,
    analyze,
    placement_from_records,
    report_to_geojson_bytes,
    report_to_json_bytes,
)
from .centrality import indicator_csv_bytes
from .optimize import (
    PlacementSolution,
    SearchProgress,
    evaluate_placement,
    local_search,
    objective_to_dict,
    search_config_from_dict,
    solution_to_dict,
    what_if,
)
from .osm import ingest

DEFAULT_SESSION_CAP = 8


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _json_bytes(doc) -> bytes:
    return json.dumps(doc, separators=(",", ":")).encode("ascii") + b"\n"


def _json_response(doc, status: int = 200) -> Response:
    return Response(content=_json_bytes(doc), status_code=status, media_type="application/json")


def _bytes_response(body: bytes, media_type: str = "application/json") -> Response:
    return Response(content=body, media_type=media_type)


@dataclass
class Session:
    id: str
    graph: StreetGraph
    placement: PoiPlacement | None = None
    ladder: ScaleLadder = field(default_factory=ScaleLadder)
    report: InconsistencyReport | None = None
    report_bytes: bytes | None = None
    job_id: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class Job:
    id: str
    session_id: str
    kind: str
    state: str
    progress: SearchProgress
    cancel_requested: bool = False
    result: PlacementSolution | None = None
    error: str | None = None


class Registry:
    """Process-wide session and job bookkeeping."""

    def __init__(self, session_cap: int = DEFAULT_SESSION_CAP):
        self.session_cap = session_cap
        self.sessions: OrderedDict[str, Session] = OrderedDict()
        self.jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._session_seq = 0
        self._job_seq = 0

    def add_session(self, graph: StreetGraph) -> Session:
        with self._lock:
            self._session_seq += 1
            session = Session(id=f"s{self._session_seq}", graph=graph)
            self.sessions[session.id] = session
            while len(self.sessions) > self.session_cap:
                self.sessions.popitem(last=False)
            return session

    def session(self, sid: str) -> Session:
        with self._lock:
            session = self.sessions.get(sid)
            if session is None:
                raise ApiError(404, "unknown-session", f"no session {sid!r}")
            self.sessions.move_to_end(sid)
            return session

    def add_job(self, session: Session) -> Job:
        with self._lock:
            self._job_seq += 1
            job = Job(
                id=f"j{self._job_seq}",
                session_id=session.id,
                kind="optimize",
                state="queued",
                progress=SearchProgress(),
            )
            self.jobs[job.id] = job
            return job

    def job(self, jid: str) -> Job:
        with self._lock:
            job = self.jobs.get(jid)
            if job is None:
                raise ApiError(404, "unknown-job", f"no job {jid!r}")
            return job


def _domain_status(exc: GridsightError, load_context: bool = False) -> int:
    if load_context:
        return 400
    return 422


def _placement_and_ladder(session: Session, doc: dict) -> tuple[PoiPlacement, ScaleLadder]:
    if not isinstance(doc, dict):
        raise ApiError(422, "invalid-input", "request body must be a JSON object")
    records = doc.get("pois")
    if not isinstance(records, list) or not records:
        raise ApiError(422, "invalid-input", "request needs a non-empty 'pois' list")
    placement = placement_from_records(session.graph, records)
    radii = doc.get("radii", session.ladder.radii)
    tau = doc.get("tau", session.ladder.tau)
    ladder = ScaleLadder(radii=tuple(float(r) for r in radii), tau=float(tau))
    return placement, ladder


def _job_snapshot(job: Job) -> dict:
    progress = {
        "iteration": job.progress.iteration,
        "best_objective": None
        if job.progress.best_objective is None
        else objective_to_dict(job.progress.best_objective),
    }
    return {
        "job": job.id,
        "kind": job.kind,
        "state": job.state,
        "progress": progress,
        "result": None if job.result is None else solution_to_dict(job.result),
    }


def create_app(session_cap: int = DEFAULT_SESSION_CAP) -> FastAPI:
    app = FastAPI(title="gridsight", version=__version__)
    registry = Registry(session_cap=session_cap)
    app.state.registry = registry

    @app.exception_handler(ApiError)
    async def _api_error(_request, exc: ApiError):
        return _json_response({"error": exc.code, "message": exc.message}, status=exc.status)

    @app.get("/healthz")
    async def healthz():
        return _json_response({"status": "ok"})

    @app.post("/sessions")
    async def load(request: Request):
        profile = request.query_params.get("profile", "drive")
        if profile not in ("drive", "walk"):
            raise ApiError(400, "invalid-input", f"unknown profile {profile!r}")
        body = await request.body()
        stripped = body.strip()
        try:
            if not stripped:
                raise EmptyExtractError("request body is empty")
            if stripped.startswith(b"{"):
                graph = StreetGraph.from_json(stripped)
            else:
                graph, _ = ingest(body, profile)
        except GridsightError as exc:
            raise ApiError(400, exc.code, exc.message) from None
        session = registry.add_session(graph)
        return _json_response(
            {"session": session.id, "vertices": graph.vertex_count, "edges": graph.edge_count}
        )

    @app.post("/sessions/{sid}/analyze")
    async def analyze_endpoint(sid: str, request: Request):
        session = registry.session(sid)
        doc = await _read_json(request)
        with session.lock:
            try:
                placement, ladder = _placement_and_ladder(session, doc)
                report = analyze(session.graph, placement, ladder)
            except GridsightError as exc:
                raise ApiError(422, exc.code, exc.message) from None
            body = report_to_json_bytes(report)
            session.placement = placement
            session.ladder = ladder
            session.report = report
            session.report_bytes = body
        return _bytes_response(body)

    @app.post("/sessions/{sid}/whatif")
    async def whatif_endpoint(sid: str, request: Request):
        session = registry.session(sid)
        doc = await _read_json(request)
        with session.lock:
            if session.placement is None:
                raise ApiError(409, "no-placement", "run analyze before posing what-if moves")
            if not isinstance(doc, dict) or "poi" not in doc:
                raise ApiError(422, "invalid-input", "what-if body needs a 'poi' id")
            try:
                target = _resolve_target(session.graph, doc)
                baseline = evaluate_placement(session.graph, session.placement, session.ladder)
                objective, report = what_if(
                    session.graph, session.placement, (str(doc["poi"]), target), session.ladder
                )
            except GridsightError as exc:
                raise ApiError(422, exc.code, exc.message) from None
        delta = {
            "inconsistent_vertices": objective.inconsistent_vertices - baseline.inconsistent_vertices,
            "degree_sum": objective.degree_sum - baseline.degree_sum,
            "mean_nearest_poi_distance_m": objective.mean_nearest_poi_distance_m
            - baseline.mean_nearest_poi_distance_m,
        }
        return _bytes_response(
            _json_bytes(
                {
                    "objective": objective_to_dict(objective),
                    "baseline": objective_to_dict(baseline),
                    "delta": delta,
                    "report": json.loads(report_to_json_bytes(report)),
                }
            )
        )

    @app.post("/sessions/{sid}/optimize")
    async def optimize_endpoint(sid: str, request: Request):
        session = registry.session(sid)
        doc = await _read_json(request)
        if not isinstance(doc, dict):
            doc = {}
        with session.lock:
            if session.placement is None:
                raise ApiError(409, "no-placement", "run analyze before optimizing")
            if session.job_id is not None:
                job = registry.jobs.get(session.job_id)
                if job is not None and job.state in ("queued", "running"):
                    raise ApiError(409, "job-running", f"job {job.id} is already running")
            doc.setdefault("radii", list(session.ladder.radii))
            doc.setdefault("tau", session.ladder.tau)
            try:
                config = search_config_from_dict(doc)
            except GridsightError as exc:
                raise ApiError(422, exc.code, exc.message) from None
            job = registry.add_job(session)
            session.job_id = job.id
            initial = session.placement
            graph = session.graph

        def run():
            job.state = "running"
            try:
                solution = local_search(graph, initial, config, progress=job.progress)
                job.result = solution
                job.state = "cancelled" if job.cancel_requested else "done"
            except Exception as exc:  # surfaced via job state
                job.error = str(exc)
                job.state = "failed"

        threading.Thread(target=run, daemon=True).start()
        return _json_response({"job": job.id})

    @app.get("/jobs/{jid}")
    async def job_status(jid: str):
        job = registry.job(jid)
        return _json_response(_job_snapshot(job))

    @app.post("/jobs/{jid}/cancel")
    async def job_cancel(jid: str):
        job = registry.job(jid)
        job.cancel_requested = True
        job.progress.cancel()
        return _json_response({"job": job.id, "cancelled": True})

    @app.get("/sessions/{sid}/export")
    async def export(sid: str, format: str = "geojson"):
        session = registry.session(sid)
        with session.lock:
            if format == "geojson":
                if session.report is None:
                    raise ApiError(409, "no-report", "run analyze before exporting")
                body = report_to_geojson_bytes(session.graph, session.report, session.placement)
                return _bytes_response(body, media_type="application/geo+json")
            if format == "csv":
                if session.report is None:
                    raise ApiError(409, "no-report", "run analyze before exporting")
                return _bytes_response(indicator_csv_bytes(session.graph), media_type="text/csv")
        raise ApiError(422, "unknown-format", f"unknown export format {format!r}")

    return app


async def _read_json(request: Request):
    body = await request.body()
    if not body.strip():
        return {}
    try:
        return json.loads(body)
    except json.JSONDecodeError as exc:
        raise ApiError(422, "invalid-input", f"request body is not valid JSON: {exc}") from None


def _resolve_target(graph: StreetGraph, doc: dict) -> int:
    if "vertex" in doc:
        return int(doc["vertex"])
    if "lat" in doc and "lon" in doc:
        point = GeoPoint(float(doc["lat"]), float(doc["lon"]))
        if graph.distance_mode == "haversine":
            check_geographic(point)
        return nearest_vertex(graph, point)
    raise ApiError(422, "invalid-input", "what-if move needs 'vertex' or 'lat'/'lon'")
