// Scene construction for the arena canvas. Pure data in, shape list out,
// so the geometry and color conventions are testable without a DOM.

import type { StateFrame } from "./types.js";

export const SENSING_COLOR = "#d62728"; // red disks: sensing danger zones
export const COMM_COLOR = "#1f77b4"; // blue disks: communication danger zones
export const ROBOT_COLOR = "#2ca02c";
export const ATTACKED_COLOR = "#ff7f0e";
export const TARGET_COLOR = "#333333";
export const BELIEF_COLOR = "#9467bd";

export type Shape =
  | { kind: "disk"; x: number; y: number; r: number; color: string; alpha: number; zoneKind?: string }
  | { kind: "circle"; x: number; y: number; r: number; color: string }
  | { kind: "marker"; x: number; y: number; color: string; label: string; flagged: boolean }
  | { kind: "cross"; x: number; y: number; color: string; label: string }
  | { kind: "dot"; x: number; y: number; color: string }
  | { kind: "link"; x1: number; y1: number; x2: number; y2: number; color: string };

export interface Scene {
  shapes: Shape[];
  bounds: { xmin: number; ymin: number; xmax: number; ymax: number };
}

const PAD = 1.5;

function grow(b: Scene["bounds"], x: number, y: number, r = 0): void {
  b.xmin = Math.min(b.xmin, x - r);
  b.ymin = Math.min(b.ymin, y - r);
  b.xmax = Math.max(b.xmax, x + r);
  b.ymax = Math.max(b.ymax, y + r);
}

export function buildScene(frame: StateFrame): Scene {
  const bounds = { xmin: -PAD, ymin: -PAD, xmax: PAD, ymax: PAD };
  const shapes: Shape[] = [];

  for (const zone of frame.zones) {
    shapes.push({
      kind: "disk",
      x: zone.center[0],
      y: zone.center[1],
      r: zone.radius,
      color: zone.kind === "sensing" ? SENSING_COLOR : COMM_COLOR,
      alpha: 0.25,
      zoneKind: zone.kind,
    });
    grow(bounds, zone.center[0], zone.center[1], zone.radius);
  }

  const beliefById = new Map(frame.targets.map((t) => [t.id, t.belief_mean]));
  for (const robot of frame.robots) {
    for (const tid of robot.assigned_targets) {
      const mean = beliefById.get(tid);
      if (mean) {
        shapes.push({
          kind: "link",
          x1: robot.position[0],
          y1: robot.position[1],
          x2: mean[0],
          y2: mean[1],
          color: "#bbbbbb",
        });
      }
    }
  }

  for (const target of frame.targets) {
    // isotropic proxy for the covariance ellipse: one positional sigma
    const sigma = Math.sqrt(Math.max(target.trace, 0) / 4);
    shapes.push({
      kind: "circle",
      x: target.belief_mean[0],
      y: target.belief_mean[1],
      r: sigma,
      color: BELIEF_COLOR,
    });
    shapes.push({ kind: "dot", x: target.belief_mean[0], y: target.belief_mean[1], color: BELIEF_COLOR });
    shapes.push({
      kind: "cross",
      x: target.true_position[0],
      y: target.true_position[1],
      color: TARGET_COLOR,
      label: `T${target.id}`,
    });
    grow(bounds, target.true_position[0], target.true_position[1], sigma);
  }

  for (const robot of frame.robots) {
    const flagged = robot.sensing_attacked || robot.comm_attacked;
    shapes.push({
      kind: "marker",
      x: robot.position[0],
      y: robot.position[1],
      color: flagged ? ATTACKED_COLOR : ROBOT_COLOR,
      label: `D${robot.id}`,
      flagged,
    });
    grow(bounds, robot.position[0], robot.position[1]);
  }

  bounds.xmin -= PAD;
  bounds.ymin -= PAD;
  bounds.xmax += PAD;
  bounds.ymax += PAD;
  return { shapes, bounds };
}
