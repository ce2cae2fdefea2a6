// DOM wiring: one canvas for the arena, one for the cost curve, a weight
// bar strip, the transcript pane, and the supervisor input box.

import { GatewayClient, ApiError } from "./api.js";
import { buildScene, type Scene } from "./arena.js";
import { counters, traceSeries, weightBars } from "./charts.js";
import { connectStream } from "./stream.js";
import { toLines } from "./transcript.js";
import type { Category } from "./types.js";
import {
  applyFrame,
  canSubmit,
  emptyViewModel,
  setConnection,
  withAck,
  withDraft,
  withSubmitError,
  type ViewModel,
} from "./viewmodel.js";

const api = new GatewayClient();
let vm: ViewModel = emptyViewModel();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const arenaCanvas = el<HTMLCanvasElement>("arena");
const costCanvas = el<HTMLCanvasElement>("cost");
const weightsDiv = el<HTMLDivElement>("weights");
const countersDiv = el<HTMLDivElement>("counters");
const transcriptDiv = el<HTMLDivElement>("transcript");
const bannerDiv = el<HTMLDivElement>("banner");
const statusSpan = el<HTMLSpanElement>("connection");
const inputBox = el<HTMLTextAreaElement>("supervisor-text");
const categorySelect = el<HTMLSelectElement>("supervisor-category");
const sendButton = el<HTMLButtonElement>("supervisor-send");
const ackSpan = el<HTMLSpanElement>("supervisor-ack");

function paintArena(scene: Scene): void {
  const ctx = arenaCanvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const { width, height } = arenaCanvas;
  ctx.clearRect(0, 0, width, height);
  const b = scene.bounds;
  const scale = Math.min(width / (b.xmax - b.xmin), height / (b.ymax - b.ymin));
  const sx = (x: number) => (x - b.xmin) * scale;
  const sy = (y: number) => height - (y - b.ymin) * scale;

  for (const shape of scene.shapes) {
    switch (shape.kind) {
      case "disk": {
        ctx.globalAlpha = shape.alpha;
        ctx.fillStyle = shape.color;
        ctx.beginPath();
        ctx.arc(sx(shape.x), sy(shape.y), shape.r * scale, 0, Math.PI * 2);
        ctx.fill();
        ctx.globalAlpha = 1;
        break;
      }
      case "circle": {
        ctx.strokeStyle = shape.color;
        ctx.setLineDash([3, 3]);
        ctx.beginPath();
        ctx.arc(sx(shape.x), sy(shape.y), shape.r * scale, 0, Math.PI * 2);
        ctx.stroke();
        ctx.setLineDash([]);
        break;
      }
      case "link": {
        ctx.strokeStyle = shape.color;
        ctx.beginPath();
        ctx.moveTo(sx(shape.x1), sy(shape.y1));
        ctx.lineTo(sx(shape.x2), sy(shape.y2));
        ctx.stroke();
        break;
      }
      case "cross": {
        ctx.strokeStyle = shape.color;
        const c = 4;
        ctx.beginPath();
        ctx.moveTo(sx(shape.x) - c, sy(shape.y) - c);
        ctx.lineTo(sx(shape.x) + c, sy(shape.y) + c);
        ctx.moveTo(sx(shape.x) - c, sy(shape.y) + c);
        ctx.lineTo(sx(shape.x) + c, sy(shape.y) - c);
        ctx.stroke();
        ctx.fillStyle = shape.color;
        ctx.fillText(shape.label, sx(shape.x) + 6, sy(shape.y) - 6);
        break;
      }
      case "dot": {
        ctx.fillStyle = shape.color;
        ctx.beginPath();
        ctx.arc(sx(shape.x), sy(shape.y), 2.5, 0, Math.PI * 2);
        ctx.fill();
        break;
      }
      case "marker": {
        ctx.fillStyle = shape.color;
        ctx.fillRect(sx(shape.x) - 5, sy(shape.y) - 5, 10, 10);
        if (shape.flagged) {
          ctx.strokeStyle = "#000";
          ctx.strokeRect(sx(shape.x) - 7, sy(shape.y) - 7, 14, 14);
        }
        ctx.fillStyle = "#000";
        ctx.fillText(shape.label + (shape.flagged ? " ⚠" : ""), sx(shape.x) + 8, sy(shape.y) + 4);
        break;
      }
    }
  }
}

function paintCost(): void {
  const ctx = costCanvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const { width, height } = costCanvas;
  ctx.clearRect(0, 0, width, height);
  const series = traceSeries(vm.traceHistory);
  if (series.points.length < 2) {
    return;
  }
  ctx.strokeStyle = "#4878cf";
  ctx.beginPath();
  series.points.forEach((p, i) => {
    const x = p.x * (width - 10) + 5;
    const y = height - 5 - p.y * (height - 20);
    if (i === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.stroke();
  ctx.fillStyle = "#333";
  ctx.fillText(`cost ${vm.traceHistory[vm.traceHistory.length - 1].cost.toFixed(2)}`, 8, 12);
  ctx.fillText(`max ${series.maxCost.toFixed(2)}`, 8, 24);
}

function render(): void {
  statusSpan.textContent = vm.connection;
  statusSpan.className = vm.connection;
  bannerDiv.textContent = vm.banner ?? "";
  bannerDiv.style.display = vm.banner ? "block" : "none";
  sendButton.disabled = !canSubmit(vm);
  ackSpan.textContent = vm.pending.error ?? vm.pending.ack ?? "";
  ackSpan.className = vm.pending.error ? "error" : "ok";

  if (!vm.frame) {
    return;
  }
  paintArena(buildScene(vm.frame));
  paintCost();

  const bars = weightBars(vm.frame);
  weightsDiv.innerHTML = bars
    .map(
      (b) =>
        `<div class="bar"><div class="fill" style="height:${Math.round(b.fraction * 60)}px"></div>` +
        `<span>${b.label}<br>${b.value.toFixed(2)}</span></div>`,
    )
    .join("");

  const c = counters(vm.frame);
  countersDiv.innerHTML =
    `<span>step ${c.step} (${vm.frame.status})</span>` +
    `<span>sensing attacks ${c.sensing}</span>` +
    `<span>comm attacks ${c.comm}</span>` +
    `<span>accum. trace ${c.accumulatedTrace.toFixed(1)}</span>` +
    `<span>task ok ${(c.taskRate * 100).toFixed(0)}%</span>` +
    `<span>action ok ${(c.actionRate * 100).toFixed(0)}%</span>`;

  transcriptDiv.innerHTML = toLines(vm.transcript)
    .slice()
    .reverse()
    .map(
      (line) =>
        `<div class="entry ${line.accepted ? "accepted" : "skipped"}">` +
        `<div class="headline">${line.headline}${line.humanInput ? " · supervisor input" : ""}</div>` +
        `<pre>${line.detail.replace(/</g, "&lt;")}</pre></div>`,
    )
    .join("");
}

function update(next: ViewModel): void {
  vm = next;
  render();
}

inputBox.addEventListener("input", () => update(withDraft(vm, inputBox.value)));

sendButton.addEventListener("click", async () => {
  if (!canSubmit(vm)) {
    return;
  }
  const category = categorySelect.value as Category;
  try {
    const ack = await api.postSupervisor(category, vm.pending.text.trim());
    inputBox.value = "";
    update(withAck(vm, ack.queued_at_step));
  } catch (err) {
    const e = err as ApiError;
    update(withSubmitError(vm, e.retriable ? `${e.message} — retry?` : e.message));
  }
});

for (const command of ["pause", "resume", "stop"] as const) {
  el<HTMLButtonElement>(`ctl-${command}`).addEventListener("click", () => {
    void api.control(command).catch(() => undefined);
  });
}

async function bootstrap(): Promise<void> {
  try {
    update(applyFrame(vm, await api.state()));
  } catch {
    // no frame yet; the stream will deliver the first one
  }
  const wsUrl = `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}/v1/stream`;
  connectStream(wsUrl, {
    onFrame: (frame) => update(applyFrame(vm, frame)),
    onStatus: (status) => update(setConnection(vm, status)),
  });
}

void bootstrap();
