// Consumes the gateway's line-delimited JSON transition stream.
// A dropped or unreachable stream calls onDrop once and stays quiet:
// the station keeps working from its polling loop alone, no dialogs.

import type { Transition } from "./types.js";

export function consumeEventStream(
  base: string,
  since: number,
  onTransition: (t: Transition) => void,
  onDrop: () => void,
  follow = true,
): { stop: () => void } {
  const controller = new AbortController();
  let active = true;

  async function pump(): Promise<void> {
    try {
      const url = `${base}/api/events?since=${since}&follow=${follow ? 1 : 0}`;
      const response = await fetch(url, {
        signal: controller.signal,
        headers: { Accept: "application/x-ndjson" },
      });
      if (!response.ok || !response.body) {
        if (active) onDrop();
        return;
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      while (active) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        const lines = buffer.split("\n");
        buffer = lines.pop() ?? "";
        for (const line of lines) {
          if (!line.trim()) continue;
          try {
            const transition = JSON.parse(line) as Transition;
            since += 1;
            onTransition(transition);
          } catch {
            // malformed line: skip, the stream framing is line-based
          }
        }
      }
      if (active) onDrop();
    } catch {
      if (active) onDrop();
    }
  }

  void pump();
  return {
    stop: () => {
      active = false;
      controller.abort();
    },
  };
}
