import type { Vec3 } from "./types";

export type Point = { x: number; y: number };

const GOLDEN_ANGLE = Math.PI * (3 - Math.sqrt(5));
const MAX_SPREAD_RINGS = 64;

// Orthographic top-down view: world x goes right, world y goes away
// from the viewer, so it maps to screen-up (negative canvas y).
export const projectTopDown = (center: Vec3): Point => ({
  x: center[0],
  y: -center[1],
});

export function fitToViewport(
  points: Map<string, Point>,
  width: number,
  height: number,
  margin: number,
): Map<string, Point> {
  const out = new Map<string, Point>();
  if (points.size === 0) return out;
  let minX = Infinity;
  let maxX = -Infinity;
  let minY = Infinity;
  let maxY = -Infinity;
  for (const p of points.values()) {
    minX = Math.min(minX, p.x);
    maxX = Math.max(maxX, p.x);
    minY = Math.min(minY, p.y);
    maxY = Math.max(maxY, p.y);
  }
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const usableW = Math.max(1, width - 2 * margin);
  const usableH = Math.max(1, height - 2 * margin);
  const scale = Math.min(
    spanX > 0 ? usableW / spanX : Infinity,
    spanY > 0 ? usableH / spanY : Infinity,
  );
  const s = Number.isFinite(scale) ? scale : 1;
  const offsetX = (width - s * spanX) / 2;
  const offsetY = (height - s * spanY) / 2;
  for (const [id, p] of points) {
    out.set(id, { x: offsetX + s * (p.x - minX), y: offsetY + s * (p.y - minY) });
  }
  return out;
}

// Nudge coincident or near-coincident screen positions apart so every
// node stays clickable. Deterministic: ids are visited in sorted order
// and offsets follow a fixed golden-angle spiral, no randomness.
export function spreadOverlaps(points: Map<string, Point>, minGap: number): Map<string, Point> {
  const out = new Map<string, Point>();
  const placed: Point[] = [];
  const ids = [...points.keys()].sort();
  ids.forEach((id, index) => {
    const origin = points.get(id)!;
    let candidate = { ...origin };
    let ring = 0;
    while (placed.some((p) => Math.hypot(p.x - candidate.x, p.y - candidate.y) < minGap)) {
      ring += 1;
      if (ring > MAX_SPREAD_RINGS) break;
      const angle = GOLDEN_ANGLE * (index + ring);
      candidate = {
        x: origin.x + Math.cos(angle) * minGap * ring,
        y: origin.y + Math.sin(angle) * minGap * ring,
      };
    }
    placed.push(candidate);
    out.set(id, candidate);
  });
  return out;
}

const cross = (o: Point, a: Point, b: Point): number =>
  (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);

// Monotone-chain convex hull, counterclockwise, no repeated endpoint.
// Fewer than three distinct points come back as-is.
export function convexHull(points: Point[]): Point[] {
  const unique = [...new Map(points.map((p) => [`${p.x},${p.y}`, p])).values()];
  unique.sort((a, b) => a.x - b.x || a.y - b.y);
  if (unique.length < 3) return unique;
  const lower: Point[] = [];
  for (const p of unique) {
    while (lower.length >= 2 && cross(lower[lower.length - 2], lower[lower.length - 1], p) <= 0) {
      lower.pop();
    }
    lower.push(p);
  }
  const upper: Point[] = [];
  for (const p of [...unique].reverse()) {
    while (upper.length >= 2 && cross(upper[upper.length - 2], upper[upper.length - 1], p) <= 0) {
      upper.pop();
    }
    upper.push(p);
  }
  lower.pop();
  upper.pop();
  const hull = lower.concat(upper);
  return hull.length >= 3 ? hull : unique;
}

export function pointInConvexPolygon(p: Point, polygon: Point[]): boolean {
  if (polygon.length < 3) return false;
  for (let i = 0; i < polygon.length; i++) {
    const a = polygon[i];
    const b = polygon[(i + 1) % polygon.length];
    if (cross(a, b, p) < 0) return false;
  }
  return true;
}

export function pointSegmentDistance(p: Point, a: Point, b: Point): number {
  const dx = b.x - a.x;
  const dy = b.y - a.y;
  const lengthSq = dx * dx + dy * dy;
  const t = lengthSq === 0 ? 0 : Math.max(0, Math.min(1, ((p.x - a.x) * dx + (p.y - a.y) * dy) / lengthSq));
  return Math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}
