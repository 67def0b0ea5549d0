// Polling loop with last-write-wins snapshot replacement: a response
// older than what is already on screen (by generated_at_us) is dropped,
// so slow responses never roll the view backwards.

export interface Stamped {
  generated_at_us: number;
}

export function startPolling<T extends Stamped>(
  fetcher: () => Promise<T>,
  apply: (payload: T) => void,
  onError: (error: unknown) => void,
  periodMs = 2000,
): { stop: () => void } {
  let latest = -1;
  let stopped = false;

  async function tick(): Promise<void> {
    try {
      const payload = await fetcher();
      if (!stopped && payload.generated_at_us >= latest) {
        latest = payload.generated_at_us;
        apply(payload);
      }
    } catch (error) {
      if (!stopped) onError(error);
    }
  }

  void tick();
  const timer = setInterval(() => void tick(), periodMs);
  return {
    stop: () => {
      stopped = true;
      clearInterval(timer);
    },
  };
}
