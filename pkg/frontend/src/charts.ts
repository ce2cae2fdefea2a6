// Metric panels: tracking-cost line series, attack counters, weight bars.
// Transform functions are pure; painting happens in main.ts.

import type { StateFrame } from "./types.js";
import type { TracePoint } from "./viewmodel.js";

export interface LineSeries {
  points: { x: number; y: number }[]; // normalized to [0, 1] x [0, 1]
  maxCost: number;
  minStep: number;
  maxStep: number;
}

export function traceSeries(history: TracePoint[]): LineSeries {
  if (history.length === 0) {
    return { points: [], maxCost: 0, minStep: 0, maxStep: 0 };
  }
  const minStep = history[0].step;
  const maxStep = history[history.length - 1].step;
  const maxCost = Math.max(...history.map((p) => p.cost), 1e-9);
  const span = Math.max(maxStep - minStep, 1);
  return {
    points: history.map((p) => ({
      x: (p.step - minStep) / span,
      y: p.cost / maxCost,
    })),
    maxCost,
    minStep,
    maxStep,
  };
}

export interface WeightBar {
  label: string;
  value: number;
  fraction: number; // of the current maximum, for bar height
}

export const WEIGHT_LABELS = ["tracking", "control", "sensing slack", "comm slack"];

export function weightBars(frame: StateFrame): WeightBar[] {
  const max = Math.max(...frame.weights, 1e-9);
  return frame.weights.map((value, i) => ({
    label: WEIGHT_LABELS[i],
    value,
    fraction: value / max,
  }));
}

export interface Counters {
  sensing: number;
  comm: number;
  step: number;
  accumulatedTrace: number;
  taskRate: number;
  actionRate: number;
}

export function counters(frame: StateFrame): Counters {
  return {
    sensing: frame.metrics.sensing_attacks,
    comm: frame.metrics.comm_attacks,
    step: frame.step,
    accumulatedTrace: frame.metrics.accumulated_trace,
    taskRate: frame.metrics.task_success_rate,
    actionRate: frame.metrics.action_success_rate,
  };
}
