import type { ExchangeSummary, StateFrame } from "../src/types.js";

export function makeFrame(overrides: Partial<StateFrame> = {}): StateFrame {
  return {
    step: 1,
    status: "running",
    robots: [
      {
        id: 1,
        position: [0, 0],
        sensing_attacked: false,
        comm_attacked: false,
        assigned_targets: [101],
      },
      {
        id: 2,
        position: [2, 1],
        sensing_attacked: false,
        comm_attacked: true,
        assigned_targets: [102],
      },
    ],
    targets: [
      { id: 101, true_position: [1, 1], belief_mean: [1.1, 0.9], trace: 4.0 },
      { id: 102, true_position: [3, -1], belief_mean: [2.9, -1.2], trace: 2.0 },
    ],
    zones: [
      { id: 1, kind: "sensing", center: [4, 4], radius: 1.5 },
      { id: 2, kind: "communication", center: [-3, 2], radius: 1.0 },
    ],
    weights: [1, 1, 1, 1],
    tracking_cost: 6.0,
    exchanges: [],
    metrics: {
      steps: 1,
      accumulated_trace: 6.0,
      sensing_attacks: 0,
      comm_attacks: 0,
      trajectory_length: 0.5,
      task_success_rate: 1,
      action_success_rate: 1,
    },
    ...overrides,
  };
}

export function makeExchange(overrides: Partial<ExchangeSummary> = {}): ExchangeSummary {
  return {
    step: 10,
    role: "task",
    verdict: "accepted",
    reason: "",
    response: "Drone 1 will track Target 101",
    tokens_response: 6,
    human_input: false,
    ...overrides,
  };
}
