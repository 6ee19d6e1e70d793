/** Minimal SVG map: projects the graph's bounding box into the viewport,
 * draws the degree choropleth as circles and POI markers as draggable
 * pins. No tile layer; the street graph itself is the base map. */

import type { ChoroplethLayer } from "./choropleth.js";
import type { GhostMarker, PoiMarker } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Projection {
  toScreen(lat: number, lon: number): { x: number; y: number };
  toGeo(x: number, y: number): { lat: number; lon: number };
}

export function fitProjection(
  points: { lat: number; lon: number }[],
  width: number,
  height: number,
  padding = 24,
): Projection {
  let minLat = Infinity;
  let maxLat = -Infinity;
  let minLon = Infinity;
  let maxLon = -Infinity;
  for (const p of points) {
    minLat = Math.min(minLat, p.lat);
    maxLat = Math.max(maxLat, p.lat);
    minLon = Math.min(minLon, p.lon);
    maxLon = Math.max(maxLon, p.lon);
  }
  if (!Number.isFinite(minLat)) {
    minLat = maxLat = minLon = maxLon = 0;
  }
  const spanLat = Math.max(maxLat - minLat, 1e-9);
  const spanLon = Math.max(maxLon - minLon, 1e-9);
  const scale = Math.min((width - 2 * padding) / spanLon, (height - 2 * padding) / spanLat);
  const offsetX = (width - scale * spanLon) / 2;
  const offsetY = (height - scale * spanLat) / 2;
  return {
    toScreen(lat, lon) {
      return {
        x: offsetX + (lon - minLon) * scale,
        // Screen y grows downward; latitude grows upward.
        y: height - offsetY - (lat - minLat) * scale,
      };
    },
    toGeo(x, y) {
      return {
        lon: minLon + (x - offsetX) / scale,
        lat: minLat + (height - offsetY - y) / scale,
      };
    },
  };
}

export interface MapHandlers {
  onMarkerDrop?: (poiId: string, lat: number, lon: number) => void;
}

export class SvgMap {
  readonly svg: SVGSVGElement;
  private projection: Projection | null = null;
  private dragging: { poiId: string; pointerId: number } | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly width = 800,
    private readonly height = 600,
    private readonly handlers: MapHandlers = {},
  ) {
    this.svg = document.createElementNS(SVG_NS, "svg") as SVGSVGElement;
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    this.svg.setAttribute("width", String(width));
    this.svg.setAttribute("height", String(height));
    this.svg.setAttribute("data-role", "map");
    container.appendChild(this.svg);
  }

  render(layer: ChoroplethLayer | null, markers: PoiMarker[], ghost: GhostMarker | null): void {
    while (this.svg.firstChild) {
      this.svg.removeChild(this.svg.firstChild);
    }
    if (!layer) {
      return;
    }
    this.projection = fitProjection(layer.cells, this.width, this.height);
    const cellsGroup = document.createElementNS(SVG_NS, "g");
    cellsGroup.setAttribute("data-role", "choropleth");
    for (const cell of layer.cells) {
      const { x, y } = this.projection.toScreen(cell.lat, cell.lon);
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(x));
      circle.setAttribute("cy", String(y));
      circle.setAttribute("r", "7");
      circle.setAttribute("fill", cell.color);
      circle.setAttribute("data-vertex-id", String(cell.vertexId));
      circle.setAttribute("data-degree", String(cell.degree));
      cellsGroup.appendChild(circle);
    }
    this.svg.appendChild(cellsGroup);

    const markerGroup = document.createElementNS(SVG_NS, "g");
    markerGroup.setAttribute("data-role", "markers");
    for (const marker of markers) {
      markerGroup.appendChild(this.markerElement(marker, ghost?.poiId === marker.id));
    }
    if (ghost) {
      const { x, y } = this.projection.toScreen(ghost.lat, ghost.lon);
      const pin = document.createElementNS(SVG_NS, "circle");
      pin.setAttribute("cx", String(x));
      pin.setAttribute("cy", String(y));
      pin.setAttribute("r", "10");
      pin.setAttribute("fill", "none");
      pin.setAttribute("stroke", "#1565c0");
      pin.setAttribute("stroke-dasharray", "4 3");
      pin.setAttribute("stroke-width", "2");
      pin.setAttribute("data-role", "ghost");
      pin.setAttribute("data-poi-id", ghost.poiId);
      markerGroup.appendChild(pin);
    }
    this.svg.appendChild(markerGroup);
  }

  private markerElement(marker: PoiMarker, dimmed: boolean): SVGElement {
    const { x, y } = this.projection!.toScreen(marker.lat, marker.lon);
    const pin = document.createElementNS(SVG_NS, "circle");
    pin.setAttribute("cx", String(x));
    pin.setAttribute("cy", String(y));
    pin.setAttribute("r", "10");
    pin.setAttribute("fill", dimmed ? "#90a4ae" : "#1565c0");
    pin.setAttribute("stroke", "#ffffff");
    pin.setAttribute("stroke-width", "2");
    pin.setAttribute("data-role", "poi-marker");
    pin.setAttribute("data-poi-id", marker.id);
    pin.addEventListener("pointerdown", (event: Event) => {
      const pe = event as PointerEvent;
      this.dragging = { poiId: marker.id, pointerId: pe.pointerId };
    });
    pin.addEventListener("pointerup", (event: Event) => {
      const pe = event as PointerEvent;
      if (!this.dragging || this.dragging.pointerId !== pe.pointerId || !this.projection) {
        return;
      }
      const poiId = this.dragging.poiId;
      this.dragging = null;
      const rect = this.svg.getBoundingClientRect();
      const geo = this.projection.toGeo(pe.clientX - rect.left, pe.clientY - rect.top);
      this.handlers.onMarkerDrop?.(poiId, geo.lat, geo.lon);
    });
    return pin;
  }

  /** Exposed for tests: translate a screen point back to coordinates. */
  screenToGeo(x: number, y: number): { lat: number; lon: number } | null {
    return this.projection ? this.projection.toGeo(x, y) : null;
  }
}
