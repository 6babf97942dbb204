/**
 * Browser entry point: start a session against the service that served
 * this bundle (or ?service=URL) and hand control to the runner.
 */

import { SessionApi } from "./api.js";
import { SessionRunner } from "./session.js";
import { TrialView } from "./views.js";

function baseUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("service") ?? window.location.origin;
}

export function boot(container: HTMLElement): SessionRunner {
  const params = new URLSearchParams(window.location.search);
  const view = new TrialView(container, {
    showTimer: params.get("timer") !== "off",
  });
  const api = new SessionApi(baseUrl());
  const runner = new SessionRunner(api, view, {
    group: params.get("group") ?? undefined,
  });
  runner.run().catch((error) => {
    container.appendChild(document.createElement("pre")).textContent =
      `session failed: ${error}`;
  });
  return runner;
}

const mount = document.getElementById("app");
if (mount) {
  boot(mount);
}
