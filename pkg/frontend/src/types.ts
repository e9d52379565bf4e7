// Payload shapes mirrored from the /v1 HTTP API. The client renders
// these verbatim and never derives probabilities of its own.

export type Vec3 = [number, number, number];

export type NodeRow = {
  id: string;
  label: string;
  description: string | null;
  kind: "object" | "part";
  parent: string | null;
  center: Vec3;
  box: { min: Vec3; max: Vec3 };
  confidence: number | null;
};

export type EdgeRow = {
  id: string;
  source: string;
  target: string;
  interaction: string;
  confidence: number | null;
  method: string;
  converged: boolean | null;
  group_id: string;
  component: string | null;
  evidence: boolean | null;
  entropy: number | null;
};

export type ComponentRef = { id: string; edges: string[] };

export type GraphPayload = {
  id: string;
  nodes: NodeRow[];
  edges: EdgeRow[];
  components: ComponentRef[];
  log_partition: number;
  warnings: string[];
};

export type SuggestionRow = { edge: string; confidence: number; entropy: number };

export type SuggestPayload = { suggestions: SuggestionRow[] };

export type ComponentPayload = {
  component: string;
  edges: EdgeRow[];
  log_partition: number;
};
