import { describe, expect, it } from "vitest";

import { Poller } from "../src/poller";

function deferred<T>() {
  let resolve!: (v: T) => void;
  let reject!: (e: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Manual timer queue so tests control the cadence deterministically. */
function timerHarness() {
  const pending: { id: number; fn: () => void; ms: number }[] = [];
  let nextId = 1;
  return {
    pending,
    delays: [] as number[],
    setTimer(fn: () => void, ms: number) {
      const id = nextId++;
      pending.push({ id, fn, ms });
      this.delays.push(ms);
      return id as unknown as ReturnType<typeof setTimeout>;
    },
    clearTimer(id: ReturnType<typeof setTimeout>) {
      const idx = pending.findIndex((p) => p.id === (id as unknown as number));
      if (idx >= 0) pending.splice(idx, 1);
    },
    fire() {
      const next = pending.shift();
      if (!next) throw new Error("no timer scheduled");
      next.fn();
    },
  };
}

const flush = () => new Promise<void>((res) => res());

describe("Poller", () => {
  it("drops ticks while a request is in flight instead of queueing", async () => {
    const timers = timerHarness();
    const requests: ReturnType<typeof deferred<number>>[] = [];
    const results: number[] = [];
    const poller = new Poller<number>(
      () => {
        const d = deferred<number>();
        requests.push(d);
        return d.promise;
      },
      (v) => results.push(v),
      () => undefined,
      { intervalMs: 100, setTimer: (fn, ms) => timers.setTimer(fn, ms), clearTimer: (id) => timers.clearTimer(id) },
    );

    poller.start();
    expect(requests).toHaveLength(1);

    timers.fire(); // request 1 still pending: tick dropped
    timers.fire();
    expect(requests).toHaveLength(1);

    requests[0].resolve(7);
    await flush();
    expect(results).toEqual([7]);

    timers.fire(); // now a new request may start
    expect(requests).toHaveLength(2);
    poller.stop();
  });

  it("backs off exponentially on failures and recovers on success", async () => {
    const timers = timerHarness();
    let failTimes = 3;
    const poller = new Poller<string>(
      () => (failTimes-- > 0 ? Promise.reject(new Error("down")) : Promise.resolve("up")),
      () => undefined,
      () => undefined,
      { intervalMs: 100, maxBackoffMs: 5000, setTimer: (fn, ms) => timers.setTimer(fn, ms), clearTimer: (id) => timers.clearTimer(id) },
    );

    poller.start();
    await flush(); // failure 1 lands
    timers.fire();
    await flush(); // failure 2
    timers.fire();
    await flush(); // failure 3
    timers.fire();
    await flush(); // success
    timers.fire();
    await flush(); // success again at base cadence

    // Each tick schedules using the failure count at that moment.
    expect(timers.delays).toEqual([100, 200, 400, 800, 100]);
    poller.stop();
  });

  it("caps the backoff delay", async () => {
    const timers = timerHarness();
    const poller = new Poller<string>(
      () => Promise.reject(new Error("down")),
      () => undefined,
      () => undefined,
      { intervalMs: 100, maxBackoffMs: 300, setTimer: (fn, ms) => timers.setTimer(fn, ms), clearTimer: (id) => timers.clearTimer(id) },
    );
    poller.start();
    for (let i = 0; i < 4; i++) {
      await flush();
      timers.fire();
    }
    expect(timers.delays).toEqual([100, 200, 300, 300, 300]);
    poller.stop();
  });

  it("reports failures and suppresses callbacks after stop", async () => {
    const timers = timerHarness();
    const errors: unknown[] = [];
    const results: string[] = [];
    const d = deferred<string>();
    let first = true;
    const poller = new Poller<string>(
      () => {
        if (first) {
          first = false;
          return Promise.reject(new Error("boom"));
        }
        return d.promise;
      },
      (v) => results.push(v),
      (e) => errors.push(e),
      { intervalMs: 100, setTimer: (fn, ms) => timers.setTimer(fn, ms), clearTimer: (id) => timers.clearTimer(id) },
    );

    poller.start();
    await flush();
    expect(errors).toHaveLength(1);

    timers.fire(); // second request starts (pending)
    poller.stop();
    expect(timers.pending).toHaveLength(0); // stop cleared the scheduled tick

    d.resolve("late");
    await flush();
    expect(results).toEqual([]); // late response dropped after stop
  });

  it("start is idempotent while running", () => {
    const timers = timerHarness();
    let calls = 0;
    const poller = new Poller<null>(
      () => {
        calls++;
        return new Promise<null>(() => undefined); // never settles
      },
      () => undefined,
      () => undefined,
      { intervalMs: 50, setTimer: (fn, ms) => timers.setTimer(fn, ms), clearTimer: (id) => timers.clearTimer(id) },
    );
    poller.start();
    poller.start();
    expect(calls).toBe(1);
    expect(poller.isRunning).toBe(true);
    poller.stop();
    expect(poller.isRunning).toBe(false);
  });
});
