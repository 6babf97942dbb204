/**
 * Countdown rendered from server time.
 *
 * The display only ever derives from the last server-reported remaining
 * time plus locally elapsed milliseconds, so clock drift is bounded by
 * one sync interval; `sync()` is called with every service response
 * that carries remaining seconds.
 */

export class Countdown {
  private remainingAtSync = 0;
  private syncedAt = 0;
  private handle: ReturnType<typeof setInterval> | null = null;
  private announced = false;

  onTick: (secondsLeft: number) => void = () => {};
  onExpired: () => void = () => {};
  /** Fired once when the countdown first drops to five seconds. */
  onFinalStretch: (secondsLeft: number) => void = () => {};

  constructor(private now: () => number = () => Date.now()) {}

  sync(remainingSeconds: number): void {
    this.remainingAtSync = Math.max(remainingSeconds, 0);
    this.syncedAt = this.now();
    if (this.remainingAtSync > 5) {
      this.announced = false;
    }
  }

  secondsLeft(): number {
    const elapsed = (this.now() - this.syncedAt) / 1000;
    return Math.max(this.remainingAtSync - elapsed, 0);
  }

  start(intervalMs = 100): void {
    this.stop();
    this.handle = setInterval(() => this.tick(), intervalMs);
    this.tick();
  }

  stop(): void {
    if (this.handle !== null) {
      clearInterval(this.handle);
      this.handle = null;
    }
  }

  private tick(): void {
    const left = this.secondsLeft();
    this.onTick(left);
    if (left <= 5 && !this.announced) {
      this.announced = true;
      this.onFinalStretch(left);
    }
    if (left <= 0) {
      this.stop();
      this.onExpired();
    }
  }
}
