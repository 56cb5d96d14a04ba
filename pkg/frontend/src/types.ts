/** Mirrors of the authoring service's payload schemas (schema_version 1). */

export type Feedback = "unset" | "positive" | "negative" | "demonstrated";

export interface ElementLayout {
  id: string;
  kind: "textfield" | "button" | "checkbox";
  col: number;
  row: number;
  locked: boolean;
}

export interface ViewState {
  values: Record<string, string>;
  done: boolean;
  layout: ElementLayout[];
}

export interface Application {
  app_id: string;
  skill: string | null;
  label: string;
  selection: string;
  args: string[];
  action_type: string;
  input: string;
  certainty_pct: number;
  certainty: number;
  feedback: Feedback;
  group: string | null;
}

export interface Indicator {
  element: string;
  count: number;
  state: "grey" | "green" | "red" | "blue";
}

export interface GraphNode {
  id: string;
  done: boolean;
  values: Record<string, string>;
}

export interface GraphEdge {
  source: string;
  target: string;
  app_id: string;
  skill: string;
  selection: string;
  input: string;
  action_type: string;
  certainty: number;
  group: string | null;
  feedback: Feedback;
  label: string;
}

export interface GraphGroupBox {
  node: string;
  group: string;
  edges: number[];
}

export interface Graph {
  start: string;
  current?: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
  groups: GraphGroupBox[];
}

export interface ExplanationOption {
  index: number;
  display: string;
  formula: string;
  args: string[];
}

export interface View {
  schema_version: number;
  session_id: string;
  state: ViewState;
  applications: Application[];
  indicators: Indicator[];
  pending_explanations: ExplanationOption[];
  pending_demo_id: string | null;
  graph: Graph;
}

export type EventPayload =
  | { event: "demo"; selection: string; input?: string; args?: string[]; explanation_choice?: number }
  | { event: "feedback"; app_id: string; label: "positive" | "negative" }
  | { event: "select_explanation"; demo_id: string; choice: number }
  | { event: "remove_demo"; demo_id: string }
  | { event: "move_on" }
  | { event: "goto_state"; node_id: string }
  | { event: "new_problem"; operands?: unknown[]; values?: Record<string, string> };
