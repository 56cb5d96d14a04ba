/**
 * Deterministic layered DAG layout for behavior graphs.
 *
 * Layers are longest-path depths from the start node; within a layer nodes
 * order by id (a state-content hash), so the same graph always lays out the
 * same way regardless of arrival order.
 */

import type { Graph } from "./types.js";

export interface Point {
  x: number;
  y: number;
}

export interface LayoutResult {
  positions: Map<string, Point>;
  width: number;
  height: number;
}

export const LAYER_DX = 180;
export const NODE_DY = 90;
export const MARGIN = 60;

export function layeredLayout(graph: Graph): LayoutResult {
  const depth = new Map<string, number>();
  depth.set(graph.start, 0);
  const byId = new Map(graph.nodes.map((n) => [n.id, n]));
  // longest-path layering: behavior graphs are acyclic (actions only fill)
  let changed = true;
  let guard = graph.nodes.length + 2;
  while (changed && guard-- > 0) {
    changed = false;
    for (const edge of graph.edges) {
      const d = depth.get(edge.source);
      if (d === undefined) continue;
      const want = d + 1;
      if ((depth.get(edge.target) ?? -1) < want) {
        depth.set(edge.target, want);
        changed = true;
      }
    }
  }
  const layers = new Map<number, string[]>();
  for (const node of graph.nodes) {
    const d = depth.get(node.id) ?? 0;
    const layer = layers.get(d) ?? [];
    layer.push(node.id);
    layers.set(d, layer);
  }
  const positions = new Map<string, Point>();
  let maxRow = 0;
  for (const [d, ids] of layers) {
    ids.sort();
    ids.forEach((id, i) => {
      positions.set(id, { x: MARGIN + d * LAYER_DX, y: MARGIN + i * NODE_DY });
      maxRow = Math.max(maxRow, i);
    });
  }
  const maxDepth = Math.max(0, ...depth.values());
  void byId;
  return {
    positions,
    width: 2 * MARGIN + maxDepth * LAYER_DX,
    height: 2 * MARGIN + maxRow * NODE_DY,
  };
}

/** ViewBox centered on one node, for the auto-centering animation. */
export function centeredViewBox(
  layout: LayoutResult,
  nodeId: string,
  viewWidth: number,
  viewHeight: number,
): { x: number; y: number; w: number; h: number } {
  const at = layout.positions.get(nodeId) ?? { x: 0, y: 0 };
  return {
    x: at.x - viewWidth / 2,
    y: at.y - viewHeight / 2,
    w: viewWidth,
    h: viewHeight,
  };
}
