/**
 * Transient UI state: selection, hover preview, and argument-selection
 * mode. Domain data is never mutated here; every change that matters
 * round-trips through post_event and arrives back in the next view.
 */

import type { Application, View } from "./types.js";

export interface UiState {
  selectedAppId: string | null;
  hoverAppId: string | null;
  argSelection: string[] | null; // non-null while picking demo arguments
  pendingDemo: { selection: string; input: string } | null;
}

export function initialUiState(): UiState {
  return { selectedAppId: null, hoverAppId: null, argSelection: null, pendingDemo: null };
}

export function selectApplication(ui: UiState, appId: string): UiState {
  return { ...ui, selectedAppId: appId };
}

export function hoverApplication(ui: UiState, appId: string | null): UiState {
  return { ...ui, hoverAppId: appId };
}

export function beginDemo(ui: UiState, selection: string, input: string): UiState {
  // entering argument-selection mode: the cross-hair cursor collects args
  return { ...ui, pendingDemo: { selection, input }, argSelection: [] };
}

export function toggleArgument(ui: UiState, elementId: string): UiState {
  if (ui.argSelection === null) return ui;
  const args = ui.argSelection.includes(elementId)
    ? ui.argSelection.filter((a) => a !== elementId)
    : [...ui.argSelection, elementId];
  return { ...ui, argSelection: args };
}

export function finishDemo(ui: UiState): {
  ui: UiState;
  demo: { selection: string; input: string; args?: string[] } | null;
} {
  if (!ui.pendingDemo) return { ui, demo: null };
  const demo = {
    ...ui.pendingDemo,
    args: ui.argSelection && ui.argSelection.length ? ui.argSelection : undefined,
  };
  return {
    ui: { ...ui, pendingDemo: null, argSelection: null },
    demo,
  };
}

export function previewedApplication(ui: UiState, view: View): Application | null {
  const id = ui.hoverAppId ?? ui.selectedAppId;
  if (!id) return null;
  return view.applications.find((a) => a.app_id === id) ?? null;
}
