/**
 * Typed client for the session service JSON API.
 *
 * All timing truth lives on the server: payloads carry
 * `remaining_seconds` computed there, and advancing before the
 * allocation elapses yields a 425 with the remaining time, which the
 * caller uses to resynchronize its countdown.
 */

export interface SessionInfo {
  session_id: string;
  group: string;
  phase: string;
  training_trials: number;
  testing_trials: number;
}

export interface AiBanner {
  prediction: "pass" | "fail";
  confidence_label?: "low" | "high";
}

export interface TrialPayload {
  phase: "training" | "testing";
  index: number;
  total: number;
  allocated_seconds: number;
  remaining_seconds: number;
  features: Record<string, string | number>;
  answered: boolean;
  ai?: AiBanner;
  feedback?: Feedback;
}

export interface SurveyPayload {
  phase: "survey";
  question: string;
  options: string[];
  answered: boolean;
}

export interface DonePayload {
  phase: "done";
}

export type CurrentPayload = TrialPayload | SurveyPayload | DonePayload;

export interface Feedback {
  correct_answer: "pass" | "fail";
  ai_prediction: "pass" | "fail";
}

export interface AnswerAck {
  accepted: boolean;
  elapsed_seconds?: number;
  feedback?: Feedback;
}

export interface AdvanceResult {
  advanced: boolean;
  phase?: string;
  remaining_seconds?: number;
}

export interface SessionSummary {
  session_id: string;
  group: string;
  survey_response: string | null;
  metrics: {
    n_trials: number;
    accuracy: { value: number };
    agreement: { value: number } | null;
  };
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: Record<string, unknown>,
  ) {
    super(`service returned ${status}: ${body["error"] ?? "unknown error"}`);
  }
}

async function parse(response: Response): Promise<Record<string, unknown>> {
  const body = (await response.json()) as Record<string, unknown>;
  if (!response.ok) {
    throw new ApiError(response.status, body);
  }
  return body;
}

export class SessionApi {
  constructor(
    private baseUrl: string,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async post(path: string, body: unknown): Promise<Record<string, unknown>> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return parse(response);
  }

  private async get(path: string): Promise<Record<string, unknown>> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`);
    return parse(response);
  }

  createSession(group?: string, seed?: number): Promise<SessionInfo> {
    const body: Record<string, unknown> = {};
    if (group) body["group"] = group;
    if (seed !== undefined) body["seed"] = seed;
    return this.post("/sessions", body) as Promise<unknown> as Promise<SessionInfo>;
  }

  currentTrial(sessionId: string): Promise<CurrentPayload> {
    return this.get(`/sessions/${sessionId}/trial`) as Promise<unknown> as Promise<CurrentPayload>;
  }

  submitAnswer(
    sessionId: string,
    answer: { decision?: string; confidence?: string; survey_response?: string; client_elapsed_ms?: number },
  ): Promise<AnswerAck> {
    return this.post(`/sessions/${sessionId}/answer`, answer) as Promise<unknown> as Promise<AnswerAck>;
  }

  /** Never throws on the expected "too early" response. */
  async requestAdvance(sessionId: string): Promise<AdvanceResult> {
    try {
      const body = await this.post(`/sessions/${sessionId}/advance`, {});
      return body as unknown as AdvanceResult;
    } catch (error) {
      if (error instanceof ApiError && error.status === 425) {
        return {
          advanced: false,
          remaining_seconds: error.body["remaining_seconds"] as number,
        };
      }
      throw error;
    }
  }

  summary(sessionId: string): Promise<SessionSummary> {
    return this.get(`/sessions/${sessionId}/summary`) as Promise<unknown> as Promise<SessionSummary>;
  }
}
