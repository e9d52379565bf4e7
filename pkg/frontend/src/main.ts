import { pointSegmentDistance } from "./layout";
import { drawGraph, renderDetail, renderSuggestions, renderToasts } from "./render";
import { AppStore } from "./store";
import { buildViewModel, type ViewModel } from "./view";

const EDGE_PICK_RADIUS_PX = 8;

const byId = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function boot(): void {
  const canvas = byId<HTMLCanvasElement>("graph-canvas");
  const landing = byId<HTMLElement>("landing");
  const workspace = byId<HTMLElement>("workspace");
  const emptyState = byId<HTMLElement>("empty-state");
  const sessionLabel = byId<HTMLElement>("session-label");
  const logPartition = byId<HTMLElement>("log-partition");
  const warningsEl = byId<HTMLElement>("warnings");
  const suggestionsEl = byId<HTMLElement>("suggestions");
  const detailEl = byId<HTMLElement>("detail");
  const toastsEl = byId<HTMLElement>("toasts");
  const sceneInput = byId<HTMLInputElement>("scene-file");
  const proposalsInput = byId<HTMLInputElement>("proposals-file");
  const startButton = byId<HTMLButtonElement>("start-session");
  const attachInput = byId<HTMLInputElement>("attach-id");
  const attachButton = byId<HTMLButtonElement>("attach-session");
  const landingError = byId<HTMLElement>("landing-error");

  let vm: ViewModel | null = null;

  const render = () => {
    renderToasts(toastsEl, store.toasts);
    if (store.sessionId === null || store.graph === null || store.suggest === null) {
      landing.hidden = false;
      workspace.hidden = true;
      return;
    }
    landing.hidden = true;
    workspace.hidden = false;
    sizeCanvas();
    vm = buildViewModel(
      store.graph,
      store.suggest,
      store.selectedEdge,
      canvas.width,
      canvas.height,
    );
    emptyState.hidden = !vm.empty;
    canvas.hidden = vm.empty;
    sessionLabel.textContent = `session ${vm.sessionId}`;
    logPartition.textContent = `log Z ${vm.logPartitionLabel}`;
    warningsEl.replaceChildren();
    for (const warning of vm.warnings) {
      const p = document.createElement("p");
      p.textContent = warning;
      warningsEl.append(p);
    }
    if (!vm.empty) drawGraph(canvas, vm);
    renderSuggestions(suggestionsEl, vm, (edge) => store.select(edge));
    renderDetail(detailEl, vm, {
      onVerify: (edge, observed) => void store.verify(edge, observed),
      onRetract: (edge) => void store.retract(edge),
    });
  };

  const store = new AppStore(render);

  const sizeCanvas = () => {
    const rect = canvas.parentElement!.getBoundingClientRect();
    canvas.width = Math.max(320, Math.floor(rect.width));
    canvas.height = Math.max(320, Math.floor(rect.height));
  };

  canvas.addEventListener("click", (event) => {
    if (!vm) return;
    const rect = canvas.getBoundingClientRect();
    const p = { x: event.clientX - rect.left, y: event.clientY - rect.top };
    let bestEdge: string | null = null;
    let bestDistance = EDGE_PICK_RADIUS_PX;
    for (const edge of vm.edges) {
      const d = pointSegmentDistance(p, edge.from, edge.to);
      if (d < bestDistance) {
        bestDistance = d;
        bestEdge = edge.id;
      }
    }
    store.select(bestEdge);
  });

  window.addEventListener("resize", render);

  const readJsonFile = (input: HTMLInputElement): Promise<unknown> => {
    const file = input.files?.[0];
    if (!file) return Promise.reject(new Error("choose both JSON files first"));
    return file.text().then((text) => JSON.parse(text));
  };

  startButton.addEventListener("click", async () => {
    landingError.textContent = "";
    try {
      const [scene, proposals] = await Promise.all([
        readJsonFile(sceneInput),
        readJsonFile(proposalsInput),
      ]);
      const sid = await store.start(scene, proposals);
      window.location.hash = sid;
    } catch (err) {
      landingError.textContent = err instanceof Error ? err.message : "failed to start";
    }
  });

  attachButton.addEventListener("click", async () => {
    landingError.textContent = "";
    const sid = attachInput.value.trim();
    if (!sid) {
      landingError.textContent = "enter a session id";
      return;
    }
    await store.attach(sid);
    if (store.graph !== null) window.location.hash = sid;
  });

  const fromHash = window.location.hash.replace(/^#/, "");
  if (fromHash) void store.attach(fromHash);
  render();
}

document.addEventListener("DOMContentLoaded", boot);
