import type { Toast } from "./store";
import type { EdgeVM, ViewModel } from "./view";

const NODE_RADIUS_OBJECT = 9;
const NODE_RADIUS_PART = 5.5;
const HULL_PAD_PX = 30;
const EDGE_COLOR = "#1d4ed8";

export function drawGraph(canvas: HTMLCanvasElement, vm: ViewModel): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  for (const hull of vm.hulls) drawHull(ctx, hull.polygon, hull.color);
  for (const edge of vm.edges) drawEdge(ctx, edge);
  for (const node of vm.nodes) {
    const r = node.kind === "part" ? NODE_RADIUS_PART : NODE_RADIUS_OBJECT;
    ctx.beginPath();
    ctx.arc(node.at.x, node.at.y, r, 0, 2 * Math.PI);
    ctx.fillStyle = node.kind === "part" ? "#f8fafc" : "#e2e8f0";
    ctx.fill();
    ctx.lineWidth = 1.5;
    ctx.strokeStyle = "#334155";
    ctx.stroke();
    ctx.fillStyle = "#0f172a";
    ctx.font = "12px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillText(node.label, node.at.x, node.at.y - r - 4);
  }
}

function drawHull(ctx: CanvasRenderingContext2D, polygon: { x: number; y: number }[], color: string): void {
  if (polygon.length === 0) return;
  ctx.save();
  ctx.beginPath();
  ctx.moveTo(polygon[0].x, polygon[0].y);
  for (const p of polygon.slice(1)) ctx.lineTo(p.x, p.y);
  ctx.closePath();
  // A fat round-joined stroke doubles as padding around small hulls.
  ctx.lineJoin = "round";
  ctx.lineCap = "round";
  ctx.lineWidth = HULL_PAD_PX;
  ctx.globalAlpha = 0.09;
  ctx.strokeStyle = color;
  ctx.fillStyle = color;
  ctx.stroke();
  ctx.fill();
  ctx.globalAlpha = 0.5;
  ctx.lineWidth = 1;
  ctx.stroke();
  ctx.restore();
}

function drawEdge(ctx: CanvasRenderingContext2D, edge: EdgeVM): void {
  ctx.save();
  ctx.globalAlpha = edge.style.alpha;
  ctx.lineWidth = edge.selected ? edge.style.width + 2 : edge.style.width;
  ctx.strokeStyle = edge.clampable ? EDGE_COLOR : edge.color;
  if (edge.style.dashed) ctx.setLineDash([6, 4]);
  ctx.beginPath();
  ctx.moveTo(edge.from.x, edge.from.y);
  ctx.lineTo(edge.to.x, edge.to.y);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.globalAlpha = 1;
  if (edge.selected) {
    ctx.lineWidth = 1;
    ctx.strokeStyle = "#f59e0b";
    ctx.beginPath();
    ctx.arc(edge.midpoint.x, edge.midpoint.y, 11, 0, 2 * Math.PI);
    ctx.stroke();
  }
  if (edge.evidence !== null) {
    ctx.font = "bold 13px system-ui, sans-serif";
    ctx.textAlign = "center";
    ctx.fillStyle = edge.evidence ? "#16a34a" : "#dc2626";
    ctx.fillText(edge.evidence ? "✓" : "✗", edge.midpoint.x, edge.midpoint.y + 4);
  }
  ctx.restore();
}

export function renderSuggestions(
  host: HTMLElement,
  vm: ViewModel,
  onPick: (edge: string) => void,
): void {
  host.replaceChildren();
  if (vm.suggestions.length === 0) {
    const empty = document.createElement("p");
    empty.className = "muted";
    empty.textContent = "Nothing left to verify.";
    host.append(empty);
    return;
  }
  for (const row of vm.suggestions) {
    const item = document.createElement("button");
    item.type = "button";
    item.className = row.selected ? "suggestion selected" : "suggestion";
    item.dataset.edge = row.edge;
    const name = document.createElement("span");
    name.className = "suggestion-edge";
    name.textContent = row.edge;
    const numbers = document.createElement("span");
    numbers.className = "suggestion-numbers";
    numbers.textContent = `p=${row.confidenceLabel} H=${row.entropyLabel}`;
    item.append(name, numbers);
    item.addEventListener("click", () => onPick(row.edge));
    host.append(item);
  }
}

export function renderDetail(
  host: HTMLElement,
  vm: ViewModel,
  actions: {
    onVerify: (edge: string, observed: boolean) => void;
    onRetract: (edge: string) => void;
  },
): void {
  host.replaceChildren();
  const edge = vm.edges.find((e) => e.selected);
  if (!edge) {
    const hint = document.createElement("p");
    hint.className = "muted";
    hint.textContent = "Select an edge to inspect it.";
    host.append(hint);
    return;
  }
  const title = document.createElement("h3");
  title.textContent = edge.id;
  const relation = line(`${edge.source} ${edge.interaction} ${edge.target}`);
  const confidence = line(`confidence ${edge.confidenceLabel}`);
  const method = line(`method ${edge.method}`);
  host.append(title, relation, confidence, method);
  if (edge.evidence !== null) {
    host.append(line(edge.evidence ? "verified true" : "verified false"));
  }
  if (!edge.clampable) {
    host.append(line("fixed semantic confidence, not clampable"));
    return;
  }
  const buttons = document.createElement("div");
  buttons.className = "actions";
  if (edge.evidence === null) {
    buttons.append(
      actionButton("verify true", () => actions.onVerify(edge.id, true)),
      actionButton("verify false", () => actions.onVerify(edge.id, false)),
    );
  } else {
    buttons.append(actionButton("retract", () => actions.onRetract(edge.id)));
  }
  host.append(buttons);
}

export function renderToasts(host: HTMLElement, toasts: Toast[]): void {
  host.replaceChildren();
  for (const toast of toasts) {
    const el = document.createElement("div");
    el.className = "toast";
    el.textContent = toast.message;
    host.append(el);
  }
}

const line = (text: string): HTMLParagraphElement => {
  const p = document.createElement("p");
  p.textContent = text;
  return p;
};

const actionButton = (label: string, onClick: () => void): HTMLButtonElement => {
  const button = document.createElement("button");
  button.type = "button";
  button.textContent = label;
  button.addEventListener("click", onClick);
  return button;
};
