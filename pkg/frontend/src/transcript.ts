// Transcript presentation: the verification layer must stay visible, so
// every entry carries its verdict and the checker's reason when skipped.

import type { ExchangeSummary } from "./types.js";

export interface TranscriptLine {
  step: number;
  role: string;
  headline: string;
  detail: string;
  accepted: boolean;
  humanInput: boolean;
}

export function describeVerdict(e: ExchangeSummary): string {
  if (e.verdict === "accepted") {
    return "accepted";
  }
  const kind = e.verdict === "skipped_format" ? "skipped (format)" : "skipped (constraint)";
  return e.reason ? `${kind}: ${e.reason}` : kind;
}

export function toLines(exchanges: ExchangeSummary[]): TranscriptLine[] {
  return exchanges.map((e) => ({
    step: e.step,
    role: e.role,
    headline: `step ${e.step} · ${e.role} · ${describeVerdict(e)}`,
    detail: e.response.length > 400 ? e.response.slice(0, 400) + "…" : e.response,
    accepted: e.verdict === "accepted",
    humanInput: e.human_input,
  }));
}
