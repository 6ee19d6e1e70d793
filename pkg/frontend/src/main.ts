/** Application wiring: one planner session per browser tab. */

import { ApiClient, ApiError } from "./api.js";
import { buildChoropleth, ChoroplethError, ChoroplethLayer } from "./choropleth.js";
import { JobMonitor, placementAtStep } from "./jobs.js";
import { SvgMap } from "./map.js";
import {
  DEFAULT_LADDER,
  ViewState,
  commitGhost,
  discardGhost,
  ghostDelta,
  ghostEvaluated,
  initialState,
  jobFinished,
  jobStarted,
  markersFromPins,
  placementWithGhost,
  poseGhost,
  reportApplied,
  sessionLoaded,
} from "./state.js";
import type { PoiRecord, SolutionDoc } from "./types.js";

declare global {
  interface Window {
    API_BASE_URL?: string;
  }
}

const api = new ApiClient(window.API_BASE_URL ?? "");

let state: ViewState = initialState();
let map: SvgMap;
let whatifInFlight = false;
let pendingDrag: { poiId: string; lat: number; lon: number } | null = null;
let lastSolution: SolutionDoc | null = null;

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function toast(message: string): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = message;
  banner.hidden = false;
  setTimeout(() => {
    banner.hidden = true;
  }, 6000);
}

function renderLegend(layer: ChoroplethLayer | null): void {
  const legend = el<HTMLDivElement>("legend");
  legend.replaceChildren();
  if (!layer) {
    return;
  }
  for (const entry of layer.legend) {
    const item = document.createElement("span");
    item.className = "legend-item";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = entry.color;
    item.append(swatch, ` ${entry.degree}`);
    legend.appendChild(item);
  }
}

function renderDelta(): void {
  const panel = el<HTMLDivElement>("whatif-panel");
  const delta = ghostDelta(state);
  if (!state.ghost) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;
  const label = el<HTMLSpanElement>("whatif-delta");
  if (!delta) {
    label.textContent = "evaluating…";
  } else {
    label.textContent =
      `Δ inconsistent: ${delta.inconsistent_vertices}, ` +
      `Δ degree sum: ${delta.degree_sum}, ` +
      `Δ mean distance: ${delta.mean_nearest_poi_distance_m.toFixed(1)} m`;
  }
}

function redraw(): void {
  map.render(state.choropleth, state.markers, state.ghost);
  renderLegend(state.choropleth);
  renderDelta();
}

function currentLadder(): { radii: number[]; tau: number } {
  const radii = el<HTMLInputElement>("radii")
    .value.split(",")
    .map((part) => Number(part.trim()))
    .filter((value) => Number.isFinite(value) && value > 0);
  const tau = Number(el<HTMLInputElement>("tau").value);
  return {
    radii: radii.length ? radii : [...DEFAULT_LADDER.radii],
    tau: Number.isFinite(tau) && tau >= 1 ? tau : DEFAULT_LADDER.tau,
  };
}

async function refreshChoropleth(): Promise<void> {
  const doc = await api.exportGeojson(state.sessionId!);
  let layer: ChoroplethLayer;
  try {
    layer = buildChoropleth(doc);
  } catch (error) {
    if (error instanceof ChoroplethError) {
      toast(`Bad GeoJSON from server: ${error.message}`);
      return; // keep the previous layer
    }
    throw error;
  }
  state = reportApplied(state, markersFromPins(layer.pois), layer, state.ladder);
  redraw();
}

async function runAnalyze(records: PoiRecord[]): Promise<void> {
  const ladder = currentLadder();
  await api.analyze(state.sessionId!, { pois: records, radii: ladder.radii, tau: ladder.tau });
  state = { ...state, ladder };
  await refreshChoropleth();
}

async function onLoad(): Promise<void> {
  const body = el<HTMLTextAreaElement>("graph-input").value;
  const profile = el<HTMLSelectElement>("profile").value;
  try {
    const info = await api.loadSession(body, profile);
    state = sessionLoaded(state, info.session, { lat: 0, lon: 0 });
    el<HTMLSpanElement>("session-info").textContent =
      `session ${info.session}: ${info.vertices} vertices, ${info.edges} edges`;
    redraw();
  } catch (error) {
    toast(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
  }
}

async function onAnalyze(): Promise<void> {
  try {
    const records = JSON.parse(el<HTMLTextAreaElement>("pois-input").value) as PoiRecord[];
    await runAnalyze(records);
  } catch (error) {
    toast(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
  }
}

async function onMarkerDrop(poiId: string, lat: number, lon: number): Promise<void> {
  // One in-flight what-if at a time; the newest drag wins.
  if (whatifInFlight) {
    pendingDrag = { poiId, lat, lon };
    return;
  }
  state = poseGhost(state, poiId, lat, lon);
  redraw();
  whatifInFlight = true;
  try {
    const evaluation = await api.whatif(state.sessionId!, { poi: poiId, lat, lon });
    state = ghostEvaluated(state, evaluation);
  } catch (error) {
    toast(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
    state = discardGhost(state);
  } finally {
    whatifInFlight = false;
  }
  redraw();
  if (pendingDrag) {
    const next = pendingDrag;
    pendingDrag = null;
    onMarkerDrop(next.poiId, next.lat, next.lon);
  }
}

async function onCommit(): Promise<void> {
  if (!state.ghost) {
    return;
  }
  try {
    const records = placementWithGhost(state);
    await api.analyze(state.sessionId!, {
      pois: records,
      radii: state.ladder.radii,
      tau: state.ladder.tau,
    });
    const doc = await api.exportGeojson(state.sessionId!);
    const layer = buildChoropleth(doc);
    state = commitGhost(state, markersFromPins(layer.pois), layer);
    redraw();
  } catch (error) {
    toast(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
  }
}

function onDiscard(): void {
  state = discardGhost(state);
  redraw();
}

async function onOptimize(): Promise<void> {
  const startButton = el<HTMLButtonElement>("optimize-start");
  try {
    const config = {
      candidate_pool: el<HTMLSelectElement>("pool").value,
      max_iterations: Number(el<HTMLInputElement>("max-iterations").value) || 50,
      restarts: Number(el<HTMLInputElement>("restarts").value) || 1,
      seed: Number(el<HTMLInputElement>("seed").value) || 42,
    };
    const { job } = await api.optimize(state.sessionId!, config);
    state = jobStarted(state, job);
    startButton.disabled = true;
    const monitor = new JobMonitor(api, job, 300);
    const plot = el<HTMLOListElement>("job-series");
    plot.replaceChildren();
    const snapshot = await monitor.run((snap) => {
      el<HTMLSpanElement>("job-state").textContent = `${snap.state} (iteration ${snap.progress.iteration})`;
      plot.replaceChildren(
        ...monitor.series.map((point) => {
          const item = document.createElement("li");
          item.textContent =
            `iter ${point.iteration}: ${point.objective.inconsistent_vertices} inconsistent, ` +
            `degree sum ${point.objective.degree_sum}`;
          return item;
        }),
      );
    });
    state = jobFinished(state);
    lastSolution = snapshot.result;
    el<HTMLButtonElement>("apply-solution").disabled = lastSolution === null;
    el<HTMLInputElement>("trace-cursor").max = String(
      lastSolution ? lastSolution.trace.filter((t) => t.poi !== null).length : 0,
    );
  } catch (error) {
    toast(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error));
    if (error instanceof ApiError && error.status === 409) {
      return; // leave the start button disabled: a job is already running
    }
  } finally {
    if (!state.activeJobId) {
      startButton.disabled = false;
    }
  }
}

async function onCancelJob(): Promise<void> {
  if (state.activeJobId) {
    await api.cancelJob(state.activeJobId);
  }
}

async function onApplySolution(): Promise<void> {
  if (!lastSolution) {
    return;
  }
  const records: PoiRecord[] = lastSolution.placement.pois.map((poi) => ({
    id: poi.id,
    category: poi.category,
    vertex: poi.vertex,
  }));
  await runAnalyze(records);
}

function onTraceStep(): void {
  if (!lastSolution || !state.choropleth) {
    return;
  }
  const cursor = Number(el<HTMLInputElement>("trace-cursor").value);
  const initialAnchors: Record<string, number> = {};
  for (const marker of state.markers) {
    initialAnchors[marker.id] = marker.vertexId;
  }
  const anchors = placementAtStep(lastSolution, initialAnchors, cursor);
  const byVertex = new Map(state.choropleth.cells.map((cell) => [cell.vertexId, cell]));
  state = {
    ...state,
    traceCursor: cursor,
    markers: state.markers.map((marker) => {
      const vertexId = anchors[marker.id] ?? marker.vertexId;
      const cell = byVertex.get(vertexId);
      return cell ? { ...marker, vertexId, lat: cell.lat, lon: cell.lon } : marker;
    }),
  };
  redraw();
}

export function bootstrap(): void {
  map = new SvgMap(el<HTMLDivElement>("map"), 800, 600, { onMarkerDrop });
  el<HTMLButtonElement>("load").addEventListener("click", onLoad);
  el<HTMLButtonElement>("analyze").addEventListener("click", onAnalyze);
  el<HTMLButtonElement>("whatif-commit").addEventListener("click", onCommit);
  el<HTMLButtonElement>("whatif-discard").addEventListener("click", onDiscard);
  el<HTMLButtonElement>("optimize-start").addEventListener("click", onOptimize);
  el<HTMLButtonElement>("optimize-cancel").addEventListener("click", onCancelJob);
  el<HTMLButtonElement>("apply-solution").addEventListener("click", onApplySolution);
  el<HTMLInputElement>("trace-cursor").addEventListener("input", onTraceStep);
  redraw();
}

if (typeof document !== "undefined" && document.getElementById("map")) {
  bootstrap();
}
