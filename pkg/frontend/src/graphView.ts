/**
 * Behavior-graph panel: pure SVG markup from a view payload.
 *
 * Every visible fact (edge labels, certainty badges, colors, group boxes)
 * comes verbatim from the payload; the DOM glue adds pan/zoom and posts
 * goto_state on node clicks via data attributes.
 */

import { centeredViewBox, layeredLayout, LayoutResult } from "./layout.js";
import { edgeColor } from "./palette.js";
import type { Graph } from "./types.js";

const NODE_R = 14;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface GraphRender {
  svg: string;
  layout: LayoutResult;
}

export function renderGraph(graph: Graph, currentId?: string): GraphRender {
  const layout = layeredLayout(graph);
  const parts: string[] = [];
  const mids = new Map<number, { x: number; y: number }>();

  graph.edges.forEach((edge, index) => {
    const a = layout.positions.get(edge.source);
    const b = layout.positions.get(edge.target);
    if (!a || !b) return;
    const mx = (a.x + b.x) / 2;
    const my = (a.y + b.y) / 2 + (a.y === b.y ? 0 : 6);
    mids.set(index, { x: mx, y: my });
    const color = edgeColor(edge.feedback);
    const dash = edge.feedback === "demonstrated" ? ' stroke-dasharray="6 3"' : "";
    parts.push(
      `<path class="edge" data-app-id="${esc(edge.app_id)}" d="M ${a.x} ${a.y} ` +
        `C ${mx} ${a.y}, ${mx} ${b.y}, ${b.x} ${b.y}" stroke="${color}"` +
        `${dash} fill="none" stroke-width="2.5"/>`,
    );
    const pct = Math.round(edge.certainty * 100);
    parts.push(
      `<text class="edge-label" x="${mx}" y="${my - 14}" text-anchor="middle">` +
        `${esc(edge.input || edge.action_type)}</text>`,
    );
    parts.push(
      `<text class="certainty-badge" data-edge="${index}" x="${mx}" y="${my + 4}"` +
        ` text-anchor="middle">${pct}%</text>`,
    );
  });

  // unordered groups: dashed boxes around their member edges' midpoints
  for (const box of graph.groups) {
    const pts = box.edges.map((i) => mids.get(i)).filter((p) => p) as {
      x: number;
      y: number;
    }[];
    if (pts.length < 2) continue;
    const xs = pts.map((p) => p.x);
    const ys = pts.map((p) => p.y);
    const pad = 26;
    parts.push(
      `<rect class="group-box" data-group="${esc(box.group)}"` +
        ` x="${Math.min(...xs) - pad}" y="${Math.min(...ys) - pad}"` +
        ` width="${Math.max(...xs) - Math.min(...xs) + 2 * pad}"` +
        ` height="${Math.max(...ys) - Math.min(...ys) + 2 * pad}"` +
        ` fill="none" stroke="#777" stroke-dasharray="4 4"/>`,
    );
  }

  for (const node of graph.nodes) {
    const at = layout.positions.get(node.id);
    if (!at) continue;
    const current = node.id === currentId ? " current" : "";
    parts.push(
      `<circle class="node${current}" data-node-id="${esc(node.id)}"` +
        ` cx="${at.x}" cy="${at.y}" r="${NODE_R}"` +
        ` fill="${node.id === currentId ? "#ffd87a" : "#f2f2f2"}" stroke="#444"/>`,
    );
    if (node.done) {
      parts.push(
        `<text class="done-mark" x="${at.x}" y="${at.y + 4}" text-anchor="middle">✓</text>`,
      );
    }
  }

  const svg =
    `<svg xmlns="http://www.w3.org/2000/svg" class="behavior-graph"` +
    ` width="${layout.width}" height="${layout.height}"` +
    ` viewBox="0 0 ${layout.width} ${layout.height}">` +
    parts.join("") +
    "</svg>";
  return { svg, layout };
}

export { centeredViewBox };
