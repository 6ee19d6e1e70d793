import { beforeEach, describe, expect, it } from "vitest";

import { buildChoropleth, NEUTRAL_COLOR } from "../src/choropleth.js";
import { fitProjection, SvgMap } from "../src/map.js";
import type { FeatureCollection } from "../src/types.js";

const DOC: FeatureCollection = {
  type: "FeatureCollection",
  features: [
    {
      type: "Feature",
      geometry: { type: "Point", coordinates: [0, 0] },
      properties: { vertex_id: 1, degree: 0 },
    },
    {
      type: "Feature",
      geometry: { type: "Point", coordinates: [0.001, 0.001] },
      properties: { vertex_id: 2, degree: 2 },
    },
    {
      type: "Feature",
      geometry: { type: "Point", coordinates: [0, 0] },
      properties: { poi: "h1", category: "hospital", vertex_id: 1 },
    },
  ],
};

describe("fitProjection", () => {
  it("round-trips screen and geographic coordinates", () => {
    const projection = fitProjection(
      [
        { lat: 0, lon: 0 },
        { lat: 0.003, lon: 0.003 },
      ],
      800,
      600,
    );
    const screen = projection.toScreen(0.001, 0.002);
    const geo = projection.toGeo(screen.x, screen.y);
    expect(geo.lat).toBeCloseTo(0.001, 9);
    expect(geo.lon).toBeCloseTo(0.002, 9);
  });
});

describe("SvgMap", () => {
  let container: HTMLDivElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    container = document.createElement("div");
    document.body.appendChild(container);
  });

  it("renders choropleth cells with their colors plus markers and ghost", () => {
    const layer = buildChoropleth(DOC);
    const map = new SvgMap(container, 400, 300);
    map.render(
      layer,
      [{ id: "h1", category: "hospital", vertexId: 1, lat: 0, lon: 0 }],
      { poiId: "h1", lat: 0.001, lon: 0.001, evaluation: null },
    );
    const cells = container.querySelectorAll("[data-role='choropleth'] circle");
    expect(cells.length).toBe(2);
    const byVertex = new Map(
      Array.from(cells).map((c) => [c.getAttribute("data-vertex-id"), c.getAttribute("fill")]),
    );
    expect(byVertex.get("1")).toBe(NEUTRAL_COLOR);
    expect(byVertex.get("2")).not.toBe(NEUTRAL_COLOR);
    expect(container.querySelectorAll("[data-role='poi-marker']").length).toBe(1);
    expect(container.querySelectorAll("[data-role='ghost']").length).toBe(1);
  });

  it("reports marker drops in geographic coordinates", () => {
    const layer = buildChoropleth(DOC);
    const drops: { poiId: string; lat: number; lon: number }[] = [];
    const map = new SvgMap(container, 400, 300, {
      onMarkerDrop: (poiId, lat, lon) => drops.push({ poiId, lat, lon }),
    });
    map.render(layer, [{ id: "h1", category: "hospital", vertexId: 1, lat: 0, lon: 0 }], null);
    const marker = container.querySelector("[data-role='poi-marker']")!;
    marker.dispatchEvent(new MouseEvent("pointerdown", { clientX: 10, clientY: 10 }));
    marker.dispatchEvent(new MouseEvent("pointerup", { clientX: 200, clientY: 150 }));
    expect(drops.length).toBe(1);
    expect(drops[0].poiId).toBe("h1");
    const expected = map.screenToGeo(200, 150)!;
    expect(drops[0].lat).toBeCloseTo(expected.lat, 12);
    expect(drops[0].lon).toBeCloseTo(expected.lon, 12);
  });
});
