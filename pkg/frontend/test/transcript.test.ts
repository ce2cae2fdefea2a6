import { describe, expect, it } from "vitest";

import { describeVerdict, toLines } from "../src/transcript.js";
import { makeExchange } from "./helpers.js";

describe("describeVerdict", () => {
  it("labels accepted outputs", () => {
    expect(describeVerdict(makeExchange())).toBe("accepted");
  });

  it("shows the checker reason for constraint skips", () => {
    const text = describeVerdict(
      makeExchange({
        verdict: "skipped_constraint",
        reason: "constraint score 2 exceeds threshold 0",
      }),
    );
    expect(text).toContain("skipped (constraint)");
    expect(text).toContain("score 2");
  });

  it("shows format skips even without a reason", () => {
    expect(describeVerdict(makeExchange({ verdict: "skipped_format", reason: "" }))).toBe(
      "skipped (format)",
    );
  });
});

describe("toLines", () => {
  it("badges exchanges that carried supervisor input", () => {
    const lines = toLines([
      makeExchange({ human_input: true }),
      makeExchange({ step: 12, human_input: false }),
    ]);
    expect(lines[0].humanInput).toBe(true);
    expect(lines[1].humanInput).toBe(false);
  });

  it("truncates very long responses", () => {
    const lines = toLines([makeExchange({ response: "y".repeat(900) })]);
    expect(lines[0].detail.length).toBeLessThanOrEqual(401);
  });

  it("keeps step and role in the headline", () => {
    const [line] = toLines([makeExchange({ step: 30, role: "action" })]);
    expect(line.headline).toContain("step 30");
    expect(line.headline).toContain("action");
  });
});
