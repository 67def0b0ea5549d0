// Snapshot replacement: stale responses (older generated_at_us) are
// dropped, errors go to the error handler without stopping the loop.

import { describe, expect, it, vi } from "vitest";
import { startPolling } from "../src/poll.js";

function deferred<T>() {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => (resolve = r));
  return { promise, resolve };
}

describe("startPolling", () => {
  it("applies snapshots in watermark order, dropping stale ones", async () => {
    vi.useFakeTimers();
    const first = deferred<{ generated_at_us: number; tag: string }>();
    const second = deferred<{ generated_at_us: number; tag: string }>();
    const fetcher = vi
      .fn()
      .mockReturnValueOnce(first.promise)
      .mockReturnValueOnce(second.promise)
      .mockResolvedValue({ generated_at_us: 300, tag: "c" });
    const applied: string[] = [];
    const loop = startPolling(fetcher, (p) => applied.push(p.tag),
                              () => undefined, 1000);
    await vi.advanceTimersByTimeAsync(1000);
    // the second poll answers first with a NEWER watermark; the slow
    // first response must then be discarded
    second.resolve({ generated_at_us: 200, tag: "b" });
    await vi.advanceTimersByTimeAsync(0);
    first.resolve({ generated_at_us: 100, tag: "a" });
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(1000);
    loop.stop();
    vi.useRealTimers();
    expect(applied).toEqual(["b", "c"]);
  });

  it("reports errors and keeps polling", async () => {
    vi.useFakeTimers();
    const fetcher = vi
      .fn()
      .mockRejectedValueOnce(new Error("down"))
      .mockResolvedValue({ generated_at_us: 1 });
    const errors: unknown[] = [];
    let applied = 0;
    const loop = startPolling(fetcher, () => (applied += 1),
                              (e) => errors.push(e), 500);
    await vi.advanceTimersByTimeAsync(0);
    await vi.advanceTimersByTimeAsync(500);
    loop.stop();
    vi.useRealTimers();
    expect(errors).toHaveLength(1);
    expect(applied).toBe(1);
  });
});
