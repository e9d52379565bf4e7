import {
  convexHull,
  fitToViewport,
  projectTopDown,
  spreadOverlaps,
  type Point,
} from "./layout";
import type { EdgeRow, GraphPayload, SuggestPayload } from "./types";

export const EDGE_WIDTH_MIN = 1;
export const EDGE_WIDTH_MAX = 7;
export const EDGE_ALPHA_MIN = 0.25;
export const EDGE_ALPHA_MAX = 1.0;
export const NODE_GAP_PX = 26;
export const VIEW_MARGIN_PX = 48;

const COMPONENT_PALETTE = [
  "#2563eb",
  "#0d9488",
  "#d97706",
  "#7c3aed",
  "#db2777",
  "#65a30d",
  "#0891b2",
  "#c2410c",
];
const SEMANTIC_COLOR = "#6b7280";

// Every number put on screen is the server's own value passed through
// String(); the client never rounds, rescales, or recomputes it.
export const formatValue = (value: number | null): string =>
  value === null ? "?" : String(value);

export type EdgeStyle = { width: number; alpha: number; dashed: boolean };

// Thickness and opacity are linear in confidence, so higher-confidence
// edges always draw thicker and darker. Styling only; the number shown
// next to the edge stays the verbatim server value.
export function edgeStyle(edge: Pick<EdgeRow, "confidence" | "component">): EdgeStyle {
  const c = edge.confidence ?? 0;
  return {
    width: EDGE_WIDTH_MIN + (EDGE_WIDTH_MAX - EDGE_WIDTH_MIN) * c,
    alpha: EDGE_ALPHA_MIN + (EDGE_ALPHA_MAX - EDGE_ALPHA_MIN) * c,
    dashed: edge.component === null,
  };
}

export type NodeVM = {
  id: string;
  label: string;
  kind: "object" | "part";
  at: Point;
};

export type EdgeVM = {
  id: string;
  from: Point;
  to: Point;
  midpoint: Point;
  style: EdgeStyle;
  color: string;
  confidenceLabel: string;
  entropyLabel: string;
  method: string;
  interaction: string;
  source: string;
  target: string;
  clampable: boolean;
  evidence: boolean | null;
  selected: boolean;
};

export type HullVM = { componentId: string; polygon: Point[]; color: string };

export type SuggestionVM = {
  edge: string;
  confidenceLabel: string;
  entropyLabel: string;
  selected: boolean;
};

export type ViewModel = {
  sessionId: string;
  empty: boolean;
  nodes: NodeVM[];
  edges: EdgeVM[];
  hulls: HullVM[];
  suggestions: SuggestionVM[];
  logPartitionLabel: string;
  warnings: string[];
};

export function buildViewModel(
  graph: GraphPayload,
  suggest: SuggestPayload,
  selectedEdge: string | null,
  width: number,
  height: number,
): ViewModel {
  const projected = new Map<string, Point>();
  for (const node of graph.nodes) projected.set(node.id, projectTopDown(node.center));
  const fitted = fitToViewport(projected, width, height, VIEW_MARGIN_PX);
  const placed = spreadOverlaps(fitted, NODE_GAP_PX);

  const componentColor = new Map<string, string>();
  graph.components.forEach((comp, index) => {
    componentColor.set(comp.id, COMPONENT_PALETTE[index % COMPONENT_PALETTE.length]);
  });

  const nodes: NodeVM[] = graph.nodes.map((node) => ({
    id: node.id,
    label: node.label,
    kind: node.kind,
    at: placed.get(node.id)!,
  }));

  const edges: EdgeVM[] = [];
  for (const edge of graph.edges) {
    const from = placed.get(edge.source);
    const to = placed.get(edge.target);
    if (!from || !to) continue;
    edges.push({
      id: edge.id,
      from,
      to,
      midpoint: { x: (from.x + to.x) / 2, y: (from.y + to.y) / 2 },
      style: edgeStyle(edge),
      color: edge.component === null ? SEMANTIC_COLOR : componentColor.get(edge.component)!,
      confidenceLabel: formatValue(edge.confidence),
      entropyLabel: formatValue(edge.entropy),
      method: edge.method,
      interaction: edge.interaction,
      source: edge.source,
      target: edge.target,
      clampable: edge.component !== null,
      evidence: edge.evidence,
      selected: edge.id === selectedEdge,
    });
  }

  const memberPoints = new Map<string, Point[]>();
  for (const edge of graph.edges) {
    if (edge.component === null) continue;
    const bucket = memberPoints.get(edge.component) ?? [];
    const from = placed.get(edge.source);
    const to = placed.get(edge.target);
    if (from) bucket.push(from);
    if (to) bucket.push(to);
    memberPoints.set(edge.component, bucket);
  }
  const hulls: HullVM[] = graph.components
    .filter((comp) => (memberPoints.get(comp.id) ?? []).length > 0)
    .map((comp) => ({
      componentId: comp.id,
      polygon: convexHull(memberPoints.get(comp.id)!),
      color: componentColor.get(comp.id)!,
    }));

  // Suggestion rows keep the exact order of the /suggest payload; the
  // server already ranked them by marginal entropy.
  const suggestions: SuggestionVM[] = suggest.suggestions.map((row) => ({
    edge: row.edge,
    confidenceLabel: formatValue(row.confidence),
    entropyLabel: formatValue(row.entropy),
    selected: row.edge === selectedEdge,
  }));

  return {
    sessionId: graph.id,
    empty: graph.nodes.length === 0,
    nodes,
    edges,
    hulls,
    suggestions,
    logPartitionLabel: formatValue(graph.log_partition),
    warnings: graph.warnings,
  };
}
