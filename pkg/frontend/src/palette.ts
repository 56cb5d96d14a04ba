/**
 * Feedback palette: a light green, a dark red, and a blue-tinged grey keep
 * the three states apart under protanopia/deuteranopia/tritanopia (the
 * lightness channel separates where hue folds together); demonstrations use
 * a saturated blue.
 */

import type { Feedback } from "./types.js";

export const PALETTE: Record<Feedback, string> = {
  positive: "#8fd694", // light green
  negative: "#8b1a1a", // dark red
  unset: "#9aa5b1", // blue-tinged grey
  demonstrated: "#2a6fdb", // blue
};

export function edgeColor(feedback: Feedback): string {
  return PALETTE[feedback];
}

/** Certainty badge: sign carried by saturation, magnitude by the number. */
export function certaintyBadgeStyle(certainty: number): {
  text: string;
  color: string;
} {
  const pct = Math.round(certainty * 100);
  const magnitude = Math.min(1, Math.abs(certainty));
  const color =
    certainty >= 0
      ? `hsl(210, ${Math.round(20 + 60 * magnitude)}%, 30%)`
      : `hsl(0, ${Math.round(20 + 60 * magnitude)}%, 35%)`;
  return { text: `${pct}%`, color };
}
