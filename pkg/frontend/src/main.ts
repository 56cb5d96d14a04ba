/**
 * Browser entry: wires the pure renderers to the DOM and the service.
 *
 * Layout: tutor interface overlay (top right), skill application window
 * (bottom), behavior graph panel (left) with drag/scroll panning,
 * shift+scroll zoom, and an animation that re-centers the graph whenever
 * the current state changes.
 */

import { ApiError, AuthoringClient, fetchTransport } from "./api.js";
import { centeredViewBox, renderGraph } from "./graphView.js";
import { renderInterface, renderSkillWindow } from "./skillWindow.js";
import type { View } from "./types.js";
import {
  beginDemo,
  finishDemo,
  hoverApplication,
  initialUiState,
  previewedApplication,
  selectApplication,
  toggleArgument,
  UiState,
} from "./viewModel.js";

interface App {
  client: AuthoringClient;
  view: View | null;
  ui: UiState;
  viewBox: { x: number; y: number; w: number; h: number };
  lastCentered: string | null;
}

const app: App = {
  client: new AuthoringClient(fetchTransport("")),
  view: null,
  ui: initialUiState(),
  viewBox: { x: 0, y: 0, w: 900, h: 540 },
  lastCentered: null,
};

function $(selector: string): HTMLElement {
  const el = document.querySelector(selector);
  if (!el) throw new Error(`missing ${selector}`);
  return el as HTMLElement;
}

function render() {
  const view = app.view;
  if (!view) return;
  const preview = previewedApplication(app.ui, view);
  $("#interface").innerHTML = renderInterface(view, preview);
  $("#skill-window").innerHTML = renderSkillWindow(
    view,
    app.ui.selectedAppId ?? undefined,
  );
  const graph = renderGraph(view.graph, view.graph.current);
  const panel = $("#graph-panel");
  panel.innerHTML = graph.svg;
  const svg = panel.querySelector("svg")!;
  if (view.graph.current && view.graph.current !== app.lastCentered) {
    animateCenter(graph.layout, view.graph.current);
    app.lastCentered = view.graph.current;
  }
  svg.setAttribute(
    "viewBox",
    `${app.viewBox.x} ${app.viewBox.y} ${app.viewBox.w} ${app.viewBox.h}`,
  );
}

function animateCenter(layout: ReturnType<typeof renderGraph>["layout"], nodeId: string) {
  const target = centeredViewBox(layout, nodeId, app.viewBox.w, app.viewBox.h);
  const from = { ...app.viewBox };
  const t0 = performance.now();
  const step = (t: number) => {
    const k = Math.min(1, (t - t0) / 250);
    app.viewBox = {
      x: from.x + (target.x - from.x) * k,
      y: from.y + (target.y - from.y) * k,
      w: app.viewBox.w,
      h: app.viewBox.h,
    };
    const svg = document.querySelector("#graph-panel svg");
    svg?.setAttribute(
      "viewBox",
      `${app.viewBox.x} ${app.viewBox.y} ${app.viewBox.w} ${app.viewBox.h}`,
    );
    if (k < 1) requestAnimationFrame(step);
  };
  requestAnimationFrame(step);
}

async function post(payload: Parameters<AuthoringClient["postEvent"]>[0]) {
  try {
    app.view = await app.client.postEvent(payload);
  } catch (error) {
    if (error instanceof ApiError && error.status === 409) {
      // stale application id: refresh and re-prompt
      app.view = await app.client.getView();
    } else {
      throw error;
    }
  }
  render();
}

function onClick(event: Event) {
  const target = event.target as HTMLElement;
  const appId = target.dataset.appId ?? target.closest<HTMLElement>("[data-app-id]")?.dataset.appId;
  if (target.matches(".grade-positive, .yes") && appId) {
    void post({ event: "feedback", app_id: appId, label: "positive" });
    return;
  }
  if (target.matches(".grade-negative, .no") && appId) {
    void post({ event: "feedback", app_id: appId, label: "negative" });
    return;
  }
  if (target.matches(".remove-demo") && appId) {
    void post({ event: "remove_demo", demo_id: appId });
    return;
  }
  if (target.matches(".move-on")) {
    void post({ event: "move_on" });
    return;
  }
  const nodeId = target.dataset.nodeId;
  if (nodeId) {
    void post({ event: "goto_state", node_id: nodeId });
    return;
  }
  if (target.closest(".application") && appId) {
    app.ui = selectApplication(app.ui, appId);
    render();
    return;
  }
  const element = target.closest<HTMLElement>("[data-element]")?.dataset.element;
  if (element && app.ui.argSelection !== null) {
    // multi-colored cross-hair mode: clicks toggle demo arguments
    app.ui = toggleArgument(app.ui, element);
    render();
    return;
  }
  if (element && app.view && !app.view.state.done) {
    const el = app.view.state.layout.find((l) => l.id === element);
    if (!el || el.locked) return;
    if (el.kind === "textfield") {
      const input = window.prompt("Demonstrate a value:") ?? "";
      if (!input) return;
      app.ui = beginDemo(app.ui, element, input);
      document.body.classList.add("arg-select-mode");
      render();
    } else {
      void post({ event: "demo", selection: element, input: "" });
    }
  }
}

function onKey(event: KeyboardEvent) {
  if (event.key === "Enter" && app.ui.pendingDemo) {
    const { ui, demo } = finishDemo(app.ui);
    app.ui = ui;
    document.body.classList.remove("arg-select-mode");
    if (demo) {
      void post({ event: "demo", ...demo });
    }
  }
}

function onChange(event: Event) {
  const target = event.target as HTMLSelectElement;
  if (target.matches(".explanation-dropdown")) {
    void post({
      event: "select_explanation",
      demo_id: target.dataset.demoId ?? "",
      choice: Number(target.value),
    });
  }
}

function onHover(event: Event) {
  const target = event.target as HTMLElement;
  const item = target.closest<HTMLElement>(".application");
  app.ui = hoverApplication(app.ui, item?.dataset.appId ?? null);
  render();
}

function onWheel(event: WheelEvent) {
  if (!(event.target as HTMLElement).closest("#graph-panel")) return;
  event.preventDefault();
  if (event.shiftKey) {
    const factor = event.deltaY > 0 ? 1.1 : 0.9;
    app.viewBox = {
      ...app.viewBox,
      w: app.viewBox.w * factor,
      h: app.viewBox.h * factor,
    };
  } else {
    app.viewBox = {
      ...app.viewBox,
      x: app.viewBox.x + event.deltaX,
      y: app.viewBox.y + event.deltaY,
    };
  }
  render();
}

let dragging: { x: number; y: number } | null = null;

function onPointerDown(event: PointerEvent) {
  if ((event.target as HTMLElement).closest("#graph-panel")) {
    dragging = { x: event.clientX, y: event.clientY };
  }
}

function onPointerMove(event: PointerEvent) {
  if (!dragging) return;
  app.viewBox = {
    ...app.viewBox,
    x: app.viewBox.x - (event.clientX - dragging.x),
    y: app.viewBox.y - (event.clientY - dragging.y),
  };
  dragging = { x: event.clientX, y: event.clientY };
  render();
}

export async function bootstrap() {
  const params = new URLSearchParams(window.location.search);
  const domain = params.get("domain") ?? "fractions";
  const operands = (params.get("operands") ?? "5,6,+,2,3")
    .split(",")
    .map((token) => (/^\d+$/.test(token) ? Number(token) : token));
  await app.client.createSession({
    domain,
    operands,
    config: { learner: "stand", htn: true },
  });
  app.view = await app.client.getView();
  document.addEventListener("click", onClick);
  document.addEventListener("change", onChange);
  document.addEventListener("mouseover", onHover);
  document.addEventListener("keydown", onKey);
  document.addEventListener("wheel", onWheel, { passive: false });
  document.addEventListener("pointerdown", onPointerDown);
  document.addEventListener("pointermove", onPointerMove);
  document.addEventListener("pointerup", () => (dragging = null));
  render();
}

if (typeof window !== "undefined" && document.getElementById("graph-panel")) {
  void bootstrap();
}
