/**
 * DOM rendering for the trial runner.
 *
 * Plain elements, no framework: a feature table, an optional AI banner
 * with an optional confidence label, two radio groups (decision and
 * self-confidence), a submit button, and an advance button that stays
 * disabled until the countdown expires. All controls are native
 * buttons/inputs, so they are keyboard-operable by construction; the
 * five-second warning goes through an assertive live region.
 */

import { Feedback, SurveyPayload, TrialPayload } from "./api.js";
import { featureLabel, featureValue } from "./glossary.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function radioGroup(name: string, legend: string, options: string[]): HTMLFieldSetElement {
  const fieldset = el("fieldset", `${name}-group`);
  fieldset.appendChild(el("legend", undefined, legend));
  for (const option of options) {
    const label = el("label", "radio-option");
    const input = el("input");
    input.type = "radio";
    input.name = name;
    input.value = option;
    label.appendChild(input);
    label.appendChild(document.createTextNode(option));
    fieldset.appendChild(label);
  }
  return fieldset;
}

export class TrialView {
  readonly root: HTMLElement;
  private header: HTMLElement;
  private timerText: HTMLElement;
  private announcer: HTMLElement;
  private body: HTMLElement;
  private controls: HTMLElement;
  private submitButton: HTMLButtonElement;
  private advanceButton: HTMLButtonElement;
  private lockedNote: HTMLElement;
  private statusNote: HTMLElement;
  private timerVisible: boolean;

  constructor(container: HTMLElement, options: { showTimer?: boolean } = {}) {
    this.timerVisible = options.showTimer ?? true;
    this.root = el("div", "trial-runner");
    this.header = el("div", "header");
    this.timerText = el("div", "timer");
    this.timerText.setAttribute("role", "timer");
    this.announcer = el("div", "announcer");
    this.announcer.setAttribute("aria-live", "assertive");
    this.body = el("div", "body");
    this.controls = el("div", "controls");
    this.submitButton = el("button", "submit", "Submit answer");
    this.submitButton.type = "button";
    this.advanceButton = el("button", "advance", "Next trial");
    this.advanceButton.type = "button";
    this.advanceButton.disabled = true;
    this.lockedNote = el("div", "locked-note", "Next unlocks when the time runs out.");
    this.statusNote = el("div", "status");
    this.root.append(
      this.header, this.timerText, this.announcer, this.body,
      this.controls, this.statusNote, this.lockedNote, this.advanceButton,
    );
    container.appendChild(this.root);
  }

  renderTrial(payload: TrialPayload): void {
    this.header.textContent =
      `${payload.phase === "training" ? "Practice" : "Trial"} ` +
      `${payload.index + 1} of ${payload.total}`;
    this.body.replaceChildren();
    this.controls.replaceChildren();
    this.statusNote.textContent = "";
    this.announcer.textContent = "";

    if (payload.ai) {
      const banner = el("div", "ai-banner");
      banner.appendChild(
        el("strong", undefined, `AI prediction: ${payload.ai.prediction}`),
      );
      if (payload.ai.confidence_label) {
        banner.appendChild(
          el("span", "confidence-label", ` (${payload.ai.confidence_label} confidence)`),
        );
      }
      this.body.appendChild(banner);
    }

    const table = el("table", "features");
    for (const [feature, value] of Object.entries(payload.features)) {
      const row = el("tr");
      row.appendChild(el("th", undefined, featureLabel(feature)));
      row.appendChild(el("td", undefined, featureValue(feature, value)));
      table.appendChild(row);
    }
    this.body.appendChild(table);

    this.controls.appendChild(
      radioGroup("decision", "Will this student pass the class?", ["pass", "fail"]),
    );
    if (payload.phase === "testing") {
      this.controls.appendChild(
        radioGroup("confidence", "How confident are you?", ["low", "medium", "high"]),
      );
    }
    this.submitButton.disabled = false;
    this.controls.appendChild(this.submitButton);
    this.advanceButton.disabled = true;
    this.lockedNote.hidden = false;
    this.timerText.hidden = !this.timerVisible;
    if (payload.answered) {
      this.markAnswered(payload.feedback);
    }
  }

  renderSurvey(payload: SurveyPayload): void {
    this.header.textContent = "One last question";
    this.timerText.textContent = "";
    this.announcer.textContent = "";
    this.body.replaceChildren();
    this.controls.replaceChildren();
    this.controls.appendChild(radioGroup("survey", payload.question, payload.options));
    this.submitButton.disabled = false;
    this.controls.appendChild(this.submitButton);
    this.advanceButton.disabled = true;
    this.lockedNote.hidden = true;
  }

  renderDone(summaryText: string): void {
    this.header.textContent = "Session complete";
    this.timerText.textContent = "";
    this.body.replaceChildren(el("p", "summary", summaryText));
    this.controls.replaceChildren();
    this.lockedNote.hidden = true;
    this.advanceButton.disabled = true;
  }

  setRemaining(seconds: number): void {
    if (this.timerVisible) {
      this.timerText.textContent = `Time remaining: ${Math.ceil(seconds)}s`;
    }
  }

  announceFinalStretch(seconds: number): void {
    this.announcer.textContent = `${Math.ceil(seconds)} seconds remaining`;
  }

  markAnswered(feedback?: Feedback): void {
    this.submitButton.disabled = true;
    for (const input of this.controls.querySelectorAll("input")) {
      (input as HTMLInputElement).disabled = true;
    }
    this.statusNote.textContent = "Answer recorded.";
    if (feedback) {
      const note = el("div", "feedback");
      note.appendChild(el("div", undefined, `Correct answer: ${feedback.correct_answer}`));
      note.appendChild(el("div", undefined, `AI prediction was: ${feedback.ai_prediction}`));
      this.body.appendChild(note);
    }
  }

  unlockAdvance(): void {
    this.advanceButton.disabled = false;
    this.lockedNote.hidden = true;
  }

  lockAdvance(): void {
    this.advanceButton.disabled = true;
    this.lockedNote.hidden = false;
  }

  get advanceEnabled(): boolean {
    return !this.advanceButton.disabled;
  }

  selected(name: string): string | undefined {
    const checked = this.controls.querySelector<HTMLInputElement>(
      `input[name="${name}"]:checked`,
    );
    return checked?.value;
  }

  /** Check a radio by value, as a user would. */
  choose(name: string, value: string): void {
    const input = this.controls.querySelector<HTMLInputElement>(
      `input[name="${name}"][value="${value}"]`,
    );
    if (!input) throw new Error(`no ${name} option ${value}`);
    input.checked = true;
    input.dispatchEvent(new Event("change", { bubbles: true }));
  }

  onSubmit(handler: () => void): void {
    this.submitButton.addEventListener("click", handler);
  }

  onAdvance(handler: () => void): void {
    this.advanceButton.addEventListener("click", handler);
  }

  clickSubmit(): void {
    this.submitButton.click();
  }

  clickAdvance(): void {
    this.advanceButton.click();
  }
}
