// Request/response half of the gateway contract.

import type { Category, StateFrame, SupervisorAck } from "./types.js";
import { validateFrame } from "./validate.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly retriable: boolean,
  ) {
    super(message);
  }
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async state(): Promise<StateFrame> {
    const resp = await this.request("GET", "/v1/state");
    return validateFrame(await resp.json());
  }

  async postSupervisor(category: Category, text: string): Promise<SupervisorAck> {
    const resp = await this.request("POST", "/v1/supervisor", { category, text });
    return (await resp.json()) as SupervisorAck;
  }

  async control(command: "pause" | "resume" | "stop"): Promise<void> {
    await this.request("POST", "/v1/control", { command });
  }

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(`gateway unreachable: ${(err as Error).message}`, true);
    }
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const payload = (await resp.json()) as { detail?: string };
        if (payload.detail) {
          detail = payload.detail;
        }
      } catch {
        // keep the status code
      }
      throw new ApiError(detail, resp.status >= 500);
    }
    return resp;
  }
}
