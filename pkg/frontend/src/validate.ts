// Defensive frame validation: a malformed frame must never crash the UI,
// only surface a banner while the last good frame stays on screen.

import type { StateFrame } from "./types.js";

function isPoint(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && v.every((x) => typeof x === "number" && Number.isFinite(x));
}

export function validateFrame(raw: unknown): StateFrame {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("frame is not an object");
  }
  const f = raw as Record<string, unknown>;
  if (typeof f.step !== "number" || f.step < 0) {
    throw new Error("frame.step missing or negative");
  }
  if (typeof f.status !== "string") {
    throw new Error("frame.status missing");
  }
  for (const key of ["robots", "targets", "zones", "exchanges"]) {
    if (!Array.isArray(f[key])) {
      throw new Error(`frame.${key} is not an array`);
    }
  }
  if (!Array.isArray(f.weights) || f.weights.length !== 4) {
    throw new Error("frame.weights must have length 4");
  }
  for (const r of f.robots as unknown[]) {
    const robot = r as Record<string, unknown>;
    if (typeof robot.id !== "number" || !isPoint(robot.position)) {
      throw new Error("malformed robot entry");
    }
  }
  for (const t of f.targets as unknown[]) {
    const target = t as Record<string, unknown>;
    if (!isPoint(target.true_position) || !isPoint(target.belief_mean) || typeof target.trace !== "number") {
      throw new Error("malformed target entry");
    }
  }
  for (const z of f.zones as unknown[]) {
    const zone = z as Record<string, unknown>;
    if (zone.kind !== "sensing" && zone.kind !== "communication") {
      throw new Error("zone kind must be sensing or communication");
    }
    if (!isPoint(zone.center) || typeof zone.radius !== "number" || zone.radius <= 0) {
      throw new Error("malformed zone geometry");
    }
  }
  if (typeof f.metrics !== "object" || f.metrics === null) {
    throw new Error("frame.metrics missing");
  }
  return raw as StateFrame;
}
