// Wire types for the gateway's /v1 contract. Kept in sync by hand with
// ../../schema/state_frame.schema.json, which is the authoritative schema.

export type ZoneKind = "sensing" | "communication";
export type RunStatus = "running" | "paused" | "finished" | "stopped" | "failed";
export type Verdict = "accepted" | "skipped_format" | "skipped_constraint";
export type Role = "task" | "action";
export type Category = "performance" | "risk" | "abnormal";

export interface RobotView {
  id: number;
  position: [number, number];
  sensing_attacked: boolean;
  comm_attacked: boolean;
  assigned_targets: number[];
}

export interface TargetView {
  id: number;
  true_position: [number, number];
  belief_mean: [number, number];
  trace: number;
}

export interface ZoneView {
  id: number;
  kind: ZoneKind;
  center: [number, number];
  radius: number;
}

export interface ExchangeSummary {
  step: number;
  role: Role;
  verdict: Verdict;
  reason: string;
  response: string;
  tokens_response: number;
  human_input: boolean;
}

export interface MetricsView {
  steps: number;
  accumulated_trace: number;
  sensing_attacks: number;
  comm_attacks: number;
  trajectory_length: number;
  task_success_rate: number;
  action_success_rate: number;
  [extra: string]: number;
}

export interface StateFrame {
  step: number;
  status: RunStatus;
  robots: RobotView[];
  targets: TargetView[];
  zones: ZoneView[];
  weights: [number, number, number, number];
  tracking_cost: number;
  exchanges: ExchangeSummary[];
  metrics: MetricsView;
}

export interface SupervisorAck {
  queued_at_step: number;
}
