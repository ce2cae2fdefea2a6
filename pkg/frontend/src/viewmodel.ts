// Client-side state: everything rendered comes from frames the gateway
// sent; the console never simulates anything itself.

import type { ExchangeSummary, StateFrame } from "./types.js";
import { validateFrame } from "./validate.js";

export type Connection = "connecting" | "live" | "closed";

export interface TracePoint {
  step: number;
  cost: number;
}

export interface PendingInput {
  text: string;
  ack: string | null;
  error: string | null;
}

export interface ViewModel {
  frame: StateFrame | null;
  traceHistory: TracePoint[];
  transcript: ExchangeSummary[];
  connection: Connection;
  banner: string | null;
  pending: PendingInput;
}

export const TRACE_HISTORY_LIMIT = 600;
export const TRANSCRIPT_LIMIT = 100;

export function emptyViewModel(): ViewModel {
  return {
    frame: null,
    traceHistory: [],
    transcript: [],
    connection: "connecting",
    banner: null,
    pending: { text: "", ack: null, error: null },
  };
}

function exchangeKey(e: ExchangeSummary): string {
  return `${e.step}:${e.role}`;
}

export function applyFrame(vm: ViewModel, raw: unknown): ViewModel {
  let frame: StateFrame;
  try {
    frame = validateFrame(raw);
  } catch (err) {
    return { ...vm, banner: `malformed frame: ${(err as Error).message}` };
  }
  const traceHistory = [...vm.traceHistory];
  const last = traceHistory[traceHistory.length - 1];
  if (!last || frame.step > last.step) {
    traceHistory.push({ step: frame.step, cost: frame.tracking_cost });
  } else if (frame.step === last.step) {
    traceHistory[traceHistory.length - 1] = { step: frame.step, cost: frame.tracking_cost };
  }
  while (traceHistory.length > TRACE_HISTORY_LIMIT) {
    traceHistory.shift();
  }
  const seen = new Map(vm.transcript.map((e) => [exchangeKey(e), e]));
  for (const e of frame.exchanges) {
    seen.set(exchangeKey(e), e);
  }
  const transcript = [...seen.values()]
    .sort((a, b) => a.step - b.step || a.role.localeCompare(b.role))
    .slice(-TRANSCRIPT_LIMIT);
  return { ...vm, frame, traceHistory, transcript, banner: null };
}

export function setConnection(vm: ViewModel, connection: Connection): ViewModel {
  return { ...vm, connection };
}

export function canSubmit(vm: ViewModel): boolean {
  return vm.pending.text.trim().length > 0 && vm.pending.text.length <= 500;
}

export function withDraft(vm: ViewModel, text: string): ViewModel {
  return { ...vm, pending: { ...vm.pending, text } };
}

export function withAck(vm: ViewModel, queuedAtStep: number): ViewModel {
  return {
    ...vm,
    pending: { text: "", ack: `queued at step ${queuedAtStep}`, error: null },
  };
}

export function withSubmitError(vm: ViewModel, message: string): ViewModel {
  return { ...vm, pending: { ...vm.pending, ack: null, error: message } };
}
