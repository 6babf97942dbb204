import { describe, expect, it, vi } from "vitest";

import { Countdown } from "../src/timer.js";

describe("countdown", () => {
  it("derives the display from the last server sync", () => {
    let now = 10_000;
    const countdown = new Countdown(() => now);
    countdown.sync(12.0);
    now += 3_000;
    expect(countdown.secondsLeft()).toBeCloseTo(9.0, 6);
    // a fresh server sync overrides local drift entirely
    countdown.sync(4.5);
    expect(countdown.secondsLeft()).toBeCloseTo(4.5, 6);
  });

  it("differs from server time by less than a second at each sync", () => {
    let now = 0;
    const countdown = new Countdown(() => now);
    for (const serverRemaining of [25, 17.2, 9.9, 3.3]) {
      countdown.sync(serverRemaining);
      expect(Math.abs(countdown.secondsLeft() - serverRemaining)).toBeLessThan(1.0);
    }
  });

  it("never goes negative", () => {
    let now = 0;
    const countdown = new Countdown(() => now);
    countdown.sync(1.0);
    now += 5_000;
    expect(countdown.secondsLeft()).toBe(0);
  });

  it("announces the final stretch once at five seconds", () => {
    vi.useFakeTimers();
    let now = 0;
    const countdown = new Countdown(() => now);
    const announcements: number[] = [];
    countdown.onFinalStretch = (left) => announcements.push(left);
    countdown.sync(8.0);
    countdown.start(100);
    for (let i = 0; i < 60; i += 1) {
      now += 100;
      vi.advanceTimersByTime(100);
    }
    expect(announcements.length).toBe(1);
    expect(announcements[0]).toBeLessThanOrEqual(5.0);
    expect(announcements[0]).toBeGreaterThan(4.0);
    vi.useRealTimers();
  });

  it("fires expiry and stops ticking", () => {
    vi.useFakeTimers();
    let now = 0;
    const countdown = new Countdown(() => now);
    let expired = 0;
    countdown.onExpired = () => (expired += 1);
    countdown.sync(0.3);
    countdown.start(100);
    for (let i = 0; i < 10; i += 1) {
      now += 100;
      vi.advanceTimersByTime(100);
    }
    expect(expired).toBe(1);
    vi.useRealTimers();
  });
});
