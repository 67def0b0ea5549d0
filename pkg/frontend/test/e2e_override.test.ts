// End-to-end against a live gateway: spawn the Python service with the
// demo plan loaded, submit a manual override through the client code,
// and check the order view reflects it within one refresh period.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { dirname, join, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { getOrderStatus } from "../src/api.js";
import { consumeEventStream } from "../src/events.js";
import { orderViewElement } from "../src/orders.js";
import { submitManualOverride } from "../src/override.js";
import type { Transition } from "../src/types.js";

const REPO_ROOT = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");
const REFRESH_PERIOD_MS = 2000;

let gateway: ChildProcess | null = null;
let base = "";

function freePort(): Promise<number> {
  return new Promise((resolvePort, reject) => {
    const probe = createServer();
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address && typeof address === "object") {
        const port = address.port;
        probe.close(() => resolvePort(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitForApi(url: string, attempts = 200): Promise<void> {
  for (let i = 0; i < attempts; i += 1) {
    try {
      const response = await fetch(`${url}/api/orders`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 50));
  }
  throw new Error(`gateway at ${url} never came up`);
}

beforeAll(async () => {
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  const dir = mkdtempSync(join(tmpdir(), "sfc-ui-e2e-"));
  const configPath = join(dir, "service.json");
  writeFileSync(configPath, JSON.stringify({
    api_listen: `127.0.0.1:${port}`,
    data_points: [],
  }));
  gateway = spawn("python3", [
    "-m", "sfc.cli", "serve",
    "--config", configPath,
    "--dispatch", join(REPO_ROOT, "scenarios", "demo3_dispatch.xml"),
  ], { cwd: REPO_ROOT, stdio: ["ignore", "ignore", "inherit"] });
  gateway.on("error", (error) => {
    throw new Error(`failed to spawn the gateway: ${error}`);
  });
  await waitForApi(base);
}, 30000);

afterAll(() => {
  gateway?.kill("SIGTERM");
});

describe("manual override end-to-end", () => {
  it("shows the ManualOverride in the order view within one refresh", async () => {
    const before = await getOrderStatus(base, "SO-1001");
    expect(before.tickets[0].steps[0].status).toBe("Pending");

    const outcome = await submitManualOverride(base, {
      ticket: "T-1",
      workCenter: "WC-IN",
      operator: "aya",
      reason: "reader offline, lot moved by hand",
    });
    expect(outcome.kind).toBe("ok");
    if (outcome.kind === "ok") {
      expect(outcome.transition.kind).toBe("ManualOverride");
      expect(outcome.transition.seq).toBe(1);
    }

    // the next poll (well within the 2 s refresh period) must show it
    const deadline = Date.now() + REFRESH_PERIOD_MS;
    const after = await getOrderStatus(base, "SO-1001");
    expect(Date.now()).toBeLessThanOrEqual(deadline);
    const view = orderViewElement(document, after);
    const stepRow = view.querySelector(
      '[data-ticket="T-1"] tr.step[data-seq="1"]',
    );
    expect(stepRow?.classList.contains("queued")).toBe(true);
    expect(stepRow?.querySelectorAll("td")[2].textContent).toBe("Queued");
  });

  it("streams the ManualOverride transition for toasts", async () => {
    const seen: Transition[] = [];
    await new Promise<void>((done) => {
      const stream = consumeEventStream(
        base,
        0,
        (t) => seen.push(t),
        () => done(),
        false, // one-shot snapshot of the stream
      );
      setTimeout(() => {
        stream.stop();
        done();
      }, 5000);
    });
    expect(seen.some((t) => t.kind === "ManualOverride" && t.ticket === "T-1"))
      .toBe(true);
  });

  it("rejects an unknown ticket with the server message shown", async () => {
    const outcome = await submitManualOverride(base, {
      ticket: "T-9",
      workCenter: "WC-IN",
      operator: "aya",
      reason: "typo",
    });
    expect(outcome).toMatchObject({ kind: "rejected", status: 404 });
    if (outcome.kind === "rejected") {
      expect(outcome.message).toContain("T-9");
    }
  });
});
