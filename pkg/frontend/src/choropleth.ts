/** Degree choropleth: quantized integer bins on a sequential scale.
 *
 * Bins are per integer degree (not quantiles) so colors stay comparable
 * across what-if round trips. Degree 0 is a distinct neutral tone.
 */

import type { FeatureCollection } from "./types.js";

export const NEUTRAL_COLOR = "#cfd8dc";

const SCALE_LIGHT = { r: 0xff, g: 0xe0, b: 0xb2 };
const SCALE_DARK = { r: 0xb7, g: 0x1c, b: 0x1c };

export interface VertexCell {
  vertexId: number;
  lat: number;
  lon: number;
  degree: number;
  color: string;
}

export interface PoiPin {
  poi: string;
  category: string;
  vertexId: number;
  lat: number;
  lon: number;
}

export interface ChoroplethLayer {
  cells: VertexCell[];
  pois: PoiPin[];
  maxDegree: number;
  legend: { degree: number; color: string }[];
}

export class ChoroplethError extends Error {}

export function degreeColor(degree: number, maxDegree: number): string {
  if (degree <= 0) {
    return NEUTRAL_COLOR;
  }
  const span = Math.max(maxDegree, 1);
  const t = Math.min(degree, span) / span;
  const channel = (a: number, b: number) => Math.round(a + (b - a) * t);
  const r = channel(SCALE_LIGHT.r, SCALE_DARK.r);
  const g = channel(SCALE_LIGHT.g, SCALE_DARK.g);
  const b = channel(SCALE_LIGHT.b, SCALE_DARK.b);
  return `#${[r, g, b].map((c) => c.toString(16).padStart(2, "0")).join("")}`;
}

export function buildLegend(maxDegree: number): { degree: number; color: string }[] {
  const entries = [];
  for (let degree = 0; degree <= maxDegree; degree += 1) {
    entries.push({ degree, color: degreeColor(degree, maxDegree) });
  }
  return entries;
}

/** Split the export FeatureCollection into vertex cells and POI pins.
 * Throws ChoroplethError on malformed input so the caller can keep the
 * previous layer and show a banner. */
export function buildChoropleth(doc: FeatureCollection): ChoroplethLayer {
  if (!doc || doc.type !== "FeatureCollection" || !Array.isArray(doc.features)) {
    throw new ChoroplethError("not a FeatureCollection");
  }
  const cells: VertexCell[] = [];
  const pois: PoiPin[] = [];
  let maxDegree = 0;
  for (const feature of doc.features) {
    if (
      !feature ||
      feature.type !== "Feature" ||
      feature.geometry?.type !== "Point" ||
      !Array.isArray(feature.geometry.coordinates)
    ) {
      throw new ChoroplethError("malformed feature");
    }
    const [lon, lat] = feature.geometry.coordinates;
    const props = feature.properties ?? {};
    if (typeof props.poi === "string") {
      pois.push({
        poi: props.poi,
        category: String(props.category ?? "poi"),
        vertexId: Number(props.vertex_id),
        lat,
        lon,
      });
      continue;
    }
    if (typeof props.vertex_id !== "number" || typeof props.degree !== "number") {
      throw new ChoroplethError("vertex feature without vertex_id/degree");
    }
    maxDegree = Math.max(maxDegree, props.degree);
    cells.push({ vertexId: props.vertex_id, lat, lon, degree: props.degree, color: "" });
  }
  for (const cell of cells) {
    cell.color = degreeColor(cell.degree, maxDegree);
  }
  return { cells, pois, maxDegree, legend: buildLegend(maxDegree) };
}
