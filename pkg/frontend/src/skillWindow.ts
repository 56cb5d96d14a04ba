/**
 * Skill application window and tutor-interface overlay markup.
 *
 * The window lists the agent's proposed actions in payload order with
 * certainty badges and feedback togglers, walks the author through the
 * Yes/No grading prompt, then asks for further demonstrations before
 * moving on; the overlay shows per-element indicator counts in the
 * feedback color scheme and previews the selected/hovered action's value.
 */

import { certaintyBadgeStyle, PALETTE } from "./palette.js";
import type { Application, View } from "./types.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const MARK = { positive: "✓", negative: "✗", demonstrated: "●", unset: "—" };

export function nextUngraded(view: View): Application | null {
  return view.applications.find((a) => a.feedback === "unset") ?? null;
}

export function promptText(view: View): string {
  const pending = nextUngraded(view);
  if (pending) {
    const index = view.applications.indexOf(pending) + 1;
    return `Action ${index}/${view.applications.length}: Is this action correct?`;
  }
  if (view.applications.length > 0) {
    return "Demonstrate any other actions for this step. Press Move On to apply these actions.";
  }
  return "Demonstrate the first action for this step.";
}

export function renderSkillWindow(view: View, selectedAppId?: string): string {
  const rows = view.applications.map((app, i) => {
    const badge = certaintyBadgeStyle(app.certainty);
    const selected = app.app_id === selectedAppId ? " selected" : "";
    const removable =
      app.feedback === "demonstrated"
        ? `<button class="remove-demo" data-app-id="${esc(app.app_id)}">x</button>`
        : `<span class="toggler">` +
          `<button class="grade-positive" data-app-id="${esc(app.app_id)}">✓</button>` +
          `<button class="grade-negative" data-app-id="${esc(app.app_id)}">✗</button>` +
          `</span>`;
    return (
      `<li class="application ${app.feedback}${selected}"` +
      ` data-app-id="${esc(app.app_id)}" data-selection="${esc(app.selection)}"` +
      ` data-input="${esc(app.input)}" style="border-color:${PALETTE[app.feedback]}">` +
      `<span class="index">${i + 1}</span>` +
      `<span class="mark">${MARK[app.feedback]}</span>` +
      `<span class="label">${esc(app.input)} = ${esc(app.label)}</span>` +
      `<span class="certainty-badge" style="color:${badge.color}">${badge.text}</span>` +
      removable +
      "</li>"
    );
  });

  const dropdown = view.pending_explanations.length
    ? `<select class="explanation-dropdown" data-demo-id="${esc(view.pending_demo_id ?? "")}">` +
      view.pending_explanations
        .map(
          (option) =>
            `<option value="${option.index}" data-args="${esc(option.args.join(","))}">` +
            `${esc(option.display)}</option>`,
        )
        .join("") +
      "</select>"
    : "";

  const pending = nextUngraded(view);
  const yesno = pending
    ? `<span class="yesno" data-app-id="${esc(pending.app_id)}">` +
      `<button class="yes">Yes</button><button class="no">No</button></span>`
    : `<button class="move-on">Move On</button>`;

  return (
    `<div class="skill-window">` +
    `<p class="prompt">${esc(promptText(view))}</p>` +
    `<ol class="applications">${rows.join("")}</ol>` +
    dropdown +
    yesno +
    "</div>"
  );
}

export function renderInterface(view: View, preview?: Application | null): string {
  const counts = new Map(view.indicators.map((i) => [i.element, i]));
  const cells = view.state.layout.map((el) => {
    const value =
      preview && preview.selection === el.id && view.state.values[el.id] === ""
        ? preview.input
        : view.state.values[el.id];
    const indicator = counts.get(el.id);
    const badge = indicator
      ? `<span class="indicator ${indicator.state}"` +
        ` style="border-color:${PALETTE[indicator.state === "grey" ? "unset" : indicator.state === "blue" ? "demonstrated" : indicator.state === "green" ? "positive" : "negative"]}">` +
        `${indicator.count}</span>`
      : "";
    const previewing =
      preview && preview.selection === el.id ? " previewing" : "";
    return (
      `<div class="cell ${el.kind}${el.locked ? " locked" : ""}${previewing}"` +
      ` data-element="${esc(el.id)}" style="grid-column:${el.col + 1};grid-row:${el.row + 1}">` +
      badge +
      `<span class="value">${esc(value)}</span>` +
      "</div>"
    );
  });
  return `<div class="tutor-interface" data-done="${view.state.done}">${cells.join("")}</div>`;
}
