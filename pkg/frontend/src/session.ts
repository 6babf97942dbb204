/**
 * Session orchestration: fetch trial, collect the answer, wait out the
 * allocation, advance only when the service authorizes it.
 *
 * The runner never moves past a trial on its own clock; every advance
 * goes through the service, and a 425 response re-synchronizes the
 * countdown from the server's remaining time. Transient network
 * failures retry and then resume from the idempotent trial fetch.
 */

import {
  AdvanceResult,
  AnswerAck,
  SessionApi,
  SessionSummary,
  SurveyPayload,
  TrialPayload,
} from "./api.js";
import { Countdown } from "./timer.js";
import { TrialView } from "./views.js";

export interface Autopilot {
  /** Supply the answer for a trial; the runner clicks the controls. */
  decide(payload: TrialPayload): { decision: "pass" | "fail"; confidence?: "low" | "medium" | "high" };
  surveyResponse(payload: SurveyPayload): string;
}

export interface RunnerOptions {
  group?: string;
  seed?: number;
  autopilot?: Autopilot;
  retryAttempts?: number;
  retryDelayMs?: number;
  pollMs?: number;
  now?: () => number;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class SessionRunner {
  readonly countdown: Countdown;
  sessionId = "";
  group = "";
  /** Advance responses the service refused; kept for auditing. */
  readonly refusedAdvances: AdvanceResult[] = [];

  private submitted: Promise<void>;
  private resolveSubmitted: () => void = () => {};
  private trialShownAt = 0;

  constructor(
    private api: SessionApi,
    private view: TrialView,
    private options: RunnerOptions = {},
  ) {
    this.countdown = new Countdown(options.now);
    this.countdown.onTick = (left) => this.view.setRemaining(left);
    this.countdown.onFinalStretch = (left) => this.view.announceFinalStretch(left);
    this.countdown.onExpired = () => this.view.unlockAdvance();
    this.submitted = new Promise((resolve) => (this.resolveSubmitted = resolve));
    this.view.onSubmit(() => this.handleSubmit());
  }

  private async withRetry<T>(operation: () => Promise<T>): Promise<T> {
    const attempts = this.options.retryAttempts ?? 3;
    let lastError: unknown;
    for (let attempt = 0; attempt < attempts; attempt += 1) {
      try {
        return await operation();
      } catch (error) {
        lastError = error;
        if ((error as { status?: number }).status !== undefined) {
          throw error; // service errors are not transient
        }
        await sleep(this.options.retryDelayMs ?? 250);
      }
    }
    throw lastError;
  }

  private armSubmission(): void {
    this.submitted = new Promise((resolve) => (this.resolveSubmitted = resolve));
  }

  private currentAnswer(): { decision?: string; confidence?: string; survey?: string } {
    return {
      decision: this.view.selected("decision"),
      confidence: this.view.selected("confidence"),
      survey: this.view.selected("survey"),
    };
  }

  private handleSubmit(): void {
    this.resolveSubmitted();
  }

  async run(): Promise<SessionSummary> {
    const info = await this.withRetry(() =>
      this.api.createSession(this.options.group, this.options.seed),
    );
    this.sessionId = info.session_id;
    this.group = info.group;

    for (;;) {
      const payload = await this.withRetry(() => this.api.currentTrial(this.sessionId));
      if (payload.phase === "done") {
        break;
      }
      if (payload.phase === "survey") {
        await this.runSurvey(payload);
        continue;
      }
      await this.runTrial(payload);
    }
    const summary = await this.withRetry(() => this.api.summary(this.sessionId));
    const agreement = summary.metrics.agreement;
    this.view.renderDone(
      `Accuracy ${(summary.metrics.accuracy.value * 100).toFixed(0)}%` +
        (agreement ? `, agreement with the AI ${(agreement.value * 100).toFixed(0)}%` : ""),
    );
    return summary;
  }

  private async runTrial(payload: TrialPayload): Promise<void> {
    this.view.renderTrial(payload);
    this.view.lockAdvance();
    this.countdown.sync(payload.remaining_seconds);
    this.countdown.start();
    this.trialShownAt = (this.options.now ?? Date.now)();
    this.armSubmission();

    let ack: AnswerAck | null = null;
    if (!payload.answered) {
      if (this.options.autopilot) {
        const choice = this.options.autopilot.decide(payload);
        this.view.choose("decision", choice.decision);
        if (payload.phase === "testing" && choice.confidence) {
          this.view.choose("confidence", choice.confidence);
        }
        this.view.clickSubmit();
      }
      await this.submitted;
      const answer = this.currentAnswer();
      ack = await this.withRetry(() =>
        this.api.submitAnswer(this.sessionId, {
          decision: answer.decision,
          confidence: answer.confidence,
          client_elapsed_ms: Math.round(
            ((this.options.now ?? Date.now)() - this.trialShownAt),
          ),
        }),
      );
      this.view.markAnswered(ack.feedback);
    }
    await this.awaitAuthorizedAdvance();
  }

  private async awaitAuthorizedAdvance(): Promise<void> {
    for (;;) {
      const left = this.countdown.secondsLeft();
      if (left > 0) {
        await sleep(Math.min(left * 1000 + 20, this.options.pollMs ?? 300));
        continue;
      }
      this.view.unlockAdvance();
      const result = await this.withRetry(() => this.api.requestAdvance(this.sessionId));
      if (result.advanced) {
        this.countdown.stop();
        return;
      }
      // refused: trust the server's remaining time and relock
      this.refusedAdvances.push(result);
      this.countdown.sync(result.remaining_seconds ?? 0.2);
      this.countdown.start();
      this.view.lockAdvance();
    }
  }

  private async runSurvey(payload: SurveyPayload): Promise<void> {
    this.view.renderSurvey(payload);
    this.armSubmission();
    if (this.options.autopilot) {
      this.view.choose("survey", this.options.autopilot.surveyResponse(payload));
      this.view.clickSubmit();
    }
    await this.submitted;
    const answer = this.currentAnswer();
    await this.withRetry(() =>
      this.api.submitAnswer(this.sessionId, { survey_response: answer.survey }),
    );
    await this.withRetry(() => this.api.requestAdvance(this.sessionId));
  }
}
