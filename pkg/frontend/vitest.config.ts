import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "happy-dom",
    environmentOptions: {
      // same origin as the e2e service so its fetches are first-party
      happyDOM: { url: "http://127.0.0.1:8747" },
    },
    testTimeout: 180_000,
    hookTimeout: 180_000,
    // e2e spawns one service per file; keep files sequential
    fileParallelism: false,
  },
});
