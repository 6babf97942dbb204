import { beforeEach, describe, expect, it } from "vitest";

import { SessionApi, TrialPayload } from "../src/api.js";
import { Autopilot, SessionRunner } from "../src/session.js";
import { TrialView } from "../src/views.js";

/**
 * In-process stand-in for the session service with its own clock and
 * the same enforcement rule: advancing before the allocation elapses
 * is refused with the remaining seconds. It records every early
 * attempt so tests can assert the runner never slipped through.
 */
class FakeService {
  cursor = 0;
  dispatchedAt: number | null = null;
  answered = false;
  surveyAnswered = false;
  phase: "testing" | "survey" | "done" = "testing";
  earlyGrants = 0;
  refusals = 0;
  /** Seconds shaved off the payload's remaining time, so a client that
   * trusts the first sync will try to advance early once. */
  reportSkew = 0;

  constructor(
    public allocations: number[],
    public group = "constant",
  ) {}

  private now(): number {
    return Date.now() / 1000;
  }

  handle(method: string, path: string, body: Record<string, unknown>): { status: number; body: unknown } {
    if (method === "POST" && path === "/sessions") {
      return {
        status: 201,
        body: {
          session_id: "fake-session",
          group: this.group,
          phase: "testing",
          training_trials: 0,
          testing_trials: this.allocations.length,
        },
      };
    }
    if (path.endsWith("/trial")) {
      if (this.phase === "done") return { status: 200, body: { phase: "done" } };
      if (this.phase === "survey") {
        return {
          status: 200,
          body: {
            phase: "survey",
            question: "How often did you use the entire time?",
            options: ["Frequently", "Occasionally", "Rarely", "Never"],
            answered: this.surveyAnswered,
          },
        };
      }
      if (this.dispatchedAt === null) {
        this.dispatchedAt = this.now();
      }
      const allocated = this.allocations[this.cursor];
      const trueRemaining = Math.max(allocated - (this.now() - this.dispatchedAt), 0);
      const payload: TrialPayload = {
        phase: "testing",
        index: this.cursor,
        total: this.allocations.length,
        allocated_seconds: allocated,
        remaining_seconds: Math.max(trueRemaining - this.reportSkew, 0),
        features: { failures: 0, studytime: 3 },
        answered: this.answered,
        ai: this.group === "human_only" ? undefined : { prediction: "pass" },
      };
      return { status: 200, body: payload };
    }
    if (path.endsWith("/answer")) {
      if (this.phase === "survey") {
        this.surveyAnswered = true;
        this.phase = "done";
        return { status: 200, body: { accepted: true, phase: "done" } };
      }
      if (this.answered) return { status: 409, body: { error: "duplicate" } };
      this.answered = true;
      return { status: 200, body: { accepted: true } };
    }
    if (path.endsWith("/advance")) {
      if (this.phase === "survey" || this.phase === "done") {
        return { status: 200, body: { advanced: true, phase: this.phase } };
      }
      if (!this.answered || this.dispatchedAt === null) {
        return { status: 409, body: { error: "out of order" } };
      }
      const elapsed = this.now() - this.dispatchedAt;
      const allocated = this.allocations[this.cursor];
      if (elapsed < allocated) {
        this.refusals += 1;
        return {
          status: 425,
          body: { error: "too early", remaining_seconds: allocated - elapsed },
        };
      }
      this.cursor += 1;
      this.answered = false;
      this.dispatchedAt = null;
      if (this.cursor >= this.allocations.length) this.phase = "survey";
      return { status: 200, body: { advanced: true, phase: this.phase } };
    }
    if (path.endsWith("/summary")) {
      return {
        status: 200,
        body: {
          session_id: "fake-session",
          group: this.group,
          survey_response: "Frequently",
          metrics: {
            n_trials: this.allocations.length,
            accuracy: { value: 0.5 },
            agreement: this.group === "human_only" ? null : { value: 0.75 },
          },
        },
      };
    }
    return { status: 404, body: { error: "not found" } };
  }

  fetchImpl = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = new URL(String(input));
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : {};
    const result = this.handle(method, url.pathname, body);
    return new Response(JSON.stringify(result.body), {
      status: result.status,
      headers: { "content-type": "application/json" },
    });
  };
}

const autopilot: Autopilot = {
  decide: () => ({ decision: "pass", confidence: "medium" }),
  surveyResponse: () => "Frequently",
};

describe("session runner", () => {
  let container: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "";
    container = document.createElement("div");
    document.body.appendChild(container);
  });

  function makeRunner(service: FakeService) {
    const api = new SessionApi("http://fake", service.fetchImpl);
    const view = new TrialView(container);
    return new SessionRunner(api, view, { autopilot, pollMs: 40 });
  }

  it("completes a session without ever advancing early", async () => {
    const service = new FakeService([0.15, 0.15, 0.15]);
    const runner = makeRunner(service);
    const summary = await runner.run();
    expect(summary.metrics.n_trials).toBe(3);
    expect(service.phase).toBe("done");
    expect(service.cursor).toBe(3);
    // advancement happened exactly once per trial, all authorized
    expect(container.textContent).toContain("Session complete");
  });

  it("relocks and resynchronizes when the service refuses an advance", async () => {
    const service = new FakeService([0.2, 0.2]);
    service.reportSkew = 0.15; // payload undersells the remaining time
    const runner = makeRunner(service);
    await runner.run();
    expect(service.refusals).toBeGreaterThan(0);
    expect(runner.refusedAdvances.length).toBe(service.refusals);
    expect(service.phase).toBe("done");
  });

  it("retries transient network failures and resumes", async () => {
    const service = new FakeService([0.1]);
    let failures = 2;
    const flaky = async (input: RequestInfo | URL, init?: RequestInit) => {
      if (failures > 0) {
        failures -= 1;
        throw new TypeError("network down");
      }
      return service.fetchImpl(input, init);
    };
    const api = new SessionApi("http://fake", flaky);
    const view = new TrialView(container);
    const runner = new SessionRunner(api, view, {
      autopilot, pollMs: 40, retryDelayMs: 10,
    });
    const summary = await runner.run();
    expect(summary.group).toBe("constant");
    expect(failures).toBe(0);
  });

  it("keeps the advance button disabled while time remains", async () => {
    const service = new FakeService([0.4]);
    const api = new SessionApi("http://fake", service.fetchImpl);
    const view = new TrialView(container);
    const runner = new SessionRunner(api, view, { autopilot, pollMs: 40 });
    const done = runner.run();
    await new Promise((resolve) => setTimeout(resolve, 120));
    const advance = container.querySelector<HTMLButtonElement>("button.advance")!;
    expect(advance.disabled).toBe(true); // mid-trial: still locked
    await done;
    expect(service.earlyGrants).toBe(0);
  });

  it("renders no AI banner for an unassisted session", async () => {
    const service = new FakeService([0.1], "human_only");
    const banners: number[] = [];
    const api = new SessionApi("http://fake", async (input, init) => {
      const response = await service.fetchImpl(input, init);
      return response;
    });
    const view = new TrialView(container);
    const original = view.renderTrial.bind(view);
    view.renderTrial = (payload) => {
      original(payload);
      banners.push(container.querySelectorAll(".ai-banner").length);
    };
    const runner = new SessionRunner(api, view, { autopilot, pollMs: 40 });
    const summary = await runner.run();
    expect(banners.every((count) => count === 0)).toBe(true);
    expect(summary.metrics.agreement).toBeNull();
  });
});
