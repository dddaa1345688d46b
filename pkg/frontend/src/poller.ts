/** Fixed-cadence frame polling with a single in-flight request.
 *
 * A timer tick always schedules the next tick, then either starts a fetch
 * or, if one is still pending, drops the tick (never queues). Completion
 * handlers never schedule, so exactly one timer exists at a time and
 * responses can never arrive out of order. Failures stretch the cadence
 * exponentially (capped); the next success snaps it back.
 */

export interface PollerOptions {
  intervalMs?: number;
  maxBackoffMs?: number;
  setTimer?: (fn: () => void, ms: number) => ReturnType<typeof setTimeout>;
  clearTimer?: (id: ReturnType<typeof setTimeout>) => void;
}

export class Poller<T> {
  private readonly intervalMs: number;
  private readonly maxBackoffMs: number;
  private readonly setTimer: (fn: () => void, ms: number) => ReturnType<typeof setTimeout>;
  private readonly clearTimer: (id: ReturnType<typeof setTimeout>) => void;

  private timer: ReturnType<typeof setTimeout> | null = null;
  private inFlight = false;
  private failures = 0;
  private running = false;

  constructor(
    private readonly fetchOnce: () => Promise<T>,
    private readonly onResult: (value: T) => void,
    private readonly onError: (err: unknown) => void = () => undefined,
    options: PollerOptions = {},
  ) {
    this.intervalMs = options.intervalMs ?? 100;
    this.maxBackoffMs = options.maxBackoffMs ?? 5000;
    this.setTimer = options.setTimer ?? ((fn, ms) => setTimeout(fn, ms));
    this.clearTimer = options.clearTimer ?? ((id) => clearTimeout(id));
  }

  get isRunning(): boolean {
    return this.running;
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    this.failures = 0;
    this.tick();
  }

  stop(): void {
    this.running = false;
    if (this.timer !== null) {
      this.clearTimer(this.timer);
      this.timer = null;
    }
  }

  private tick(): void {
    if (!this.running) return;
    const delay =
      this.failures === 0
        ? this.intervalMs
        : Math.min(this.intervalMs * 2 ** this.failures, this.maxBackoffMs);
    this.timer = this.setTimer(() => this.tick(), delay);
    if (this.inFlight) return; // drop, don't queue
    this.inFlight = true;
    this.fetchOnce().then(
      (value) => {
        this.inFlight = false;
        this.failures = 0;
        if (this.running) this.onResult(value);
      },
      (err) => {
        this.inFlight = false;
        this.failures += 1;
        if (this.running) this.onError(err);
      },
    );
  }
}
