/** Wire formats of the gridsight HTTP API, mirrored field-for-field. */

export interface GeoPoint {
  lat: number;
  lon: number;
}

export interface SessionInfo {
  session: string;
  vertices: number;
  edges: number;
}

export interface PoiRecord {
  id: string;
  category: string;
  lat?: number;
  lon?: number;
  vertex?: number;
}

export interface ReportSummary {
  inconsistent_vertices: number;
  degree_sum: number;
  degree_max: number;
}

export interface ReportPair {
  poi: string;
  radius_m: number;
  vertices: number[];
}

export interface ReportDoc {
  degrees: Record<string, number>;
  pairs: ReportPair[];
  summary: ReportSummary;
}

export interface Objective {
  inconsistent_vertices: number;
  degree_sum: number;
  mean_nearest_poi_distance_m: number;
}

export interface WhatifResponse {
  objective: Objective;
  baseline: Objective;
  delta: Objective;
  report: ReportDoc;
}

export interface TraceEntry {
  iteration: number;
  poi: string | null;
  from_vertex: number | null;
  to_vertex: number | null;
  objective: Objective;
}

export interface SolutionPlacement {
  pois: { id: string; category: string; vertex: number }[];
}

export interface SolutionDoc {
  placement: SolutionPlacement;
  objective: Objective;
  trace: TraceEntry[];
  centrality_delta: unknown;
  converged: boolean;
}

export type JobState = "queued" | "running" | "done" | "cancelled" | "failed";

export interface JobSnapshot {
  job: string;
  kind: string;
  state: JobState;
  progress: { iteration: number; best_objective: Objective | null };
  result: SolutionDoc | null;
}

export interface SearchConfigDoc {
  candidate_pool?: string;
  pool_size?: number;
  max_iterations?: number;
  restarts?: number;
  seed?: number;
  radii?: number[];
  tau?: number;
}

export interface PointFeature {
  type: "Feature";
  geometry: { type: "Point"; coordinates: [number, number] };
  properties: Record<string, unknown>;
}

export interface FeatureCollection {
  type: "FeatureCollection";
  features: PointFeature[];
}

export interface GraphDoc {
  vertices: { id: number; lat: number; lon: number }[];
  edges: { u: number; v: number; length_m: number; directed: boolean }[];
  profile: string;
}
