/** View state and its transitions.
 *
 * Marker positions always equal the server-acknowledged placement plus at
 * most one pending what-if ghost; posing a new ghost replaces the old
 * one, and a discard restores the pre-drag view exactly. The choropleth
 * always reflects the last report received from the server.
 */

import type { ChoroplethLayer } from "./choropleth.js";
import type { GeoPoint, Objective, PoiRecord, WhatifResponse } from "./types.js";

export interface PoiMarker {
  id: string;
  category: string;
  vertexId: number;
  lat: number;
  lon: number;
}

export interface GhostMarker {
  poiId: string;
  lat: number;
  lon: number;
  /** Server evaluation of the pending move; null while in flight. */
  evaluation: WhatifResponse | null;
}

export interface Ladder {
  radii: number[];
  tau: number;
}

export interface ViewState {
  sessionId: string | null;
  viewport: { center: GeoPoint; zoom: number };
  markers: PoiMarker[];
  ghost: GhostMarker | null;
  choropleth: ChoroplethLayer | null;
  ladder: Ladder;
  activeJobId: string | null;
  traceCursor: number;
}

export const DEFAULT_LADDER: Ladder = { radii: [400, 800, 1600], tau: 1.5 };

export function initialState(): ViewState {
  return {
    sessionId: null,
    viewport: { center: { lat: 0, lon: 0 }, zoom: 1 },
    markers: [],
    ghost: null,
    choropleth: null,
    ladder: { ...DEFAULT_LADDER, radii: [...DEFAULT_LADDER.radii] },
    activeJobId: null,
    traceCursor: 0,
  };
}

export function sessionLoaded(state: ViewState, sessionId: string, center: GeoPoint): ViewState {
  return {
    ...initialState(),
    sessionId,
    viewport: { center, zoom: 1 },
    ladder: state.ladder,
  };
}

/** Server acknowledged an analyze: markers and choropleth follow it. */
export function reportApplied(
  state: ViewState,
  markers: PoiMarker[],
  layer: ChoroplethLayer,
  ladder: Ladder,
): ViewState {
  return { ...state, markers, choropleth: layer, ladder, ghost: null };
}

/** Drag started or moved: exactly one ghost, not yet evaluated. */
export function poseGhost(state: ViewState, poiId: string, lat: number, lon: number): ViewState {
  if (!state.markers.some((m) => m.id === poiId)) {
    return state;
  }
  return { ...state, ghost: { poiId, lat, lon, evaluation: null } };
}

/** Server answered the what-if for the current ghost. */
export function ghostEvaluated(state: ViewState, evaluation: WhatifResponse): ViewState {
  if (!state.ghost) {
    return state;
  }
  return { ...state, ghost: { ...state.ghost, evaluation } };
}

/** The user discarded the pending move; view equals the pre-drag state. */
export function discardGhost(state: ViewState): ViewState {
  return { ...state, ghost: null };
}

/** The pending move was committed via analyze; the new report arrived. */
export function commitGhost(
  state: ViewState,
  markers: PoiMarker[],
  layer: ChoroplethLayer,
): ViewState {
  return { ...state, markers, choropleth: layer, ghost: null };
}

export function jobStarted(state: ViewState, jobId: string): ViewState {
  return { ...state, activeJobId: jobId, traceCursor: 0 };
}

export function jobFinished(state: ViewState): ViewState {
  return { ...state, activeJobId: null };
}

/** The displayed objective delta for the pending ghost, straight from the
 * server response (never computed locally). */
export function ghostDelta(state: ViewState): Objective | null {
  return state.ghost?.evaluation?.delta ?? null;
}

/** POI records for committing the current ghost through analyze. */
export function placementWithGhost(state: ViewState): PoiRecord[] {
  return state.markers.map((marker) => {
    if (state.ghost && state.ghost.poiId === marker.id) {
      return {
        id: marker.id,
        category: marker.category,
        lat: state.ghost.lat,
        lon: state.ghost.lon,
      };
    }
    return { id: marker.id, category: marker.category, vertex: marker.vertexId };
  });
}

export function markersFromPins(
  pins: { poi: string; category: string; vertexId: number; lat: number; lon: number }[],
): PoiMarker[] {
  return pins.map((pin) => ({
    id: pin.poi,
    category: pin.category,
    vertexId: pin.vertexId,
    lat: pin.lat,
    lon: pin.lon,
  }));
}
