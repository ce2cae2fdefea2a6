import { describe, expect, it } from "vitest";

import { buildScene, COMM_COLOR, SENSING_COLOR } from "../src/arena.js";
import { makeFrame } from "./helpers.js";

describe("buildScene", () => {
  it("renders an empty frame without crashing", () => {
    const scene = buildScene(
      makeFrame({ robots: [], targets: [], zones: [], tracking_cost: 0 }),
    );
    expect(scene.shapes).toEqual([]);
    expect(scene.bounds.xmax).toBeGreaterThan(scene.bounds.xmin);
  });

  it("colors sensing zones red and communication zones blue", () => {
    const scene = buildScene(makeFrame());
    const disks = scene.shapes.filter((s) => s.kind === "disk");
    const byKind = new Map(disks.map((d) => [d.zoneKind, d.color]));
    expect(byKind.get("sensing")).toBe(SENSING_COLOR);
    expect(byKind.get("communication")).toBe(COMM_COLOR);
  });

  it("places zone disks at their center and radius", () => {
    const scene = buildScene(makeFrame());
    const sensing = scene.shapes.find(
      (s) => s.kind === "disk" && s.zoneKind === "sensing",
    );
    expect(sensing).toMatchObject({ x: 4, y: 4, r: 1.5 });
  });

  it("flags attacked robots", () => {
    const scene = buildScene(makeFrame());
    const markers = scene.shapes.filter((s) => s.kind === "marker");
    const flagged = markers.filter((m) => m.kind === "marker" && m.flagged);
    expect(flagged).toHaveLength(1);
    expect(flagged[0]).toMatchObject({ label: "D2" });
  });

  it("draws an assignment link from robot to belief mean", () => {
    const scene = buildScene(makeFrame());
    const links = scene.shapes.filter((s) => s.kind === "link");
    expect(links).toHaveLength(2);
    expect(links[0]).toMatchObject({ x1: 0, y1: 0, x2: 1.1, y2: 0.9 });
  });

  it("sizes the uncertainty circle from the trace", () => {
    const scene = buildScene(makeFrame());
    const circles = scene.shapes.filter((s) => s.kind === "circle");
    expect(circles[0]).toMatchObject({ r: Math.sqrt(4.0 / 4) });
  });

  it("shows both true position and belief mean per target", () => {
    const scene = buildScene(makeFrame());
    expect(scene.shapes.filter((s) => s.kind === "cross")).toHaveLength(2);
    expect(scene.shapes.filter((s) => s.kind === "dot")).toHaveLength(2);
  });

  it("bounds cover all content", () => {
    const scene = buildScene(makeFrame());
    expect(scene.bounds.xmin).toBeLessThanOrEqual(-4);
    expect(scene.bounds.xmax).toBeGreaterThanOrEqual(5.5);
  });
});
