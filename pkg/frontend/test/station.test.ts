// Station queue rendering against payloads captured from the gateway.

import { describe, expect, it } from "vitest";
import {
  renderStationQueue,
  stationQueueElement,
  updateStationContainer,
} from "../src/station.js";
import type { BufferPayload } from "../src/types.js";
import midrun from "./fixtures/buffer_midrun.json";
import empty from "./fixtures/buffer_empty.json";
import delayed from "./fixtures/buffer_delayed.json";

const midrunPayload = midrun as BufferPayload;
const emptyPayload = empty as BufferPayload;
const delayedPayload = delayed as BufferPayload;

describe("renderStationQueue", () => {
  it("mirrors the midrun fixture row-for-row", () => {
    const view = renderStationQueue(midrunPayload);
    expect(view.data_point_id).toBe(midrunPayload.data_point);
    expect(view.rows).toEqual(midrunPayload.rows);
    expect(view.rows).toHaveLength(1);
    expect(view.rows[0].ticket).toBe("T-2");
    expect(view.rows[0].delayed).toBe(false);
    expect(view.last_refresh_us).toBe(midrunPayload.generated_at_us);
  });

  it("rejects malformed payloads", () => {
    expect(() =>
      renderStationQueue({ nope: true } as unknown as BufferPayload),
    ).toThrow(/malformed/);
    const badRow = structuredClone(midrunPayload);
    (badRow.rows[0] as Record<string, unknown>).delayed = "yes";
    expect(() => renderStationQueue(badRow)).toThrow(/malformed/);
  });
});

describe("stationQueueElement", () => {
  it("renders one row per entry with ticket ids", () => {
    const view = renderStationQueue(midrunPayload);
    const element = stationQueueElement(document, view, "WC-PACK");
    const rows = element.querySelectorAll(".buffer-row");
    expect(rows).toHaveLength(midrunPayload.rows.length);
    expect(rows[0].querySelector(".ticket")?.textContent).toBe("T-2");
    expect(element.querySelector("h1")?.textContent).toContain("WC-PACK");
  });

  it("shows an explicit empty state", () => {
    const view = renderStationQueue(emptyPayload);
    const element = stationQueueElement(document, view, "WC-PAINT");
    expect(element.querySelector(".buffer-empty")?.textContent).toBe(
      "buffer empty",
    );
    expect(element.querySelectorAll(".buffer-row")).toHaveLength(0);
  });

  it("flags delayed rows distinctly", () => {
    const view = renderStationQueue(delayedPayload);
    const element = stationQueueElement(document, view, "WC-CUT");
    const row = element.querySelector(".buffer-row");
    expect(row?.classList.contains("delayed")).toBe(true);
    expect(row?.querySelector(".delay-badge")?.textContent).toBe("DELAYED");

    const calm = stationQueueElement(
      document,
      renderStationQueue(midrunPayload),
      "WC-PACK",
    );
    expect(calm.querySelector(".buffer-row.delayed")).toBeNull();
    expect(calm.querySelector(".delay-badge")).toBeNull();
  });
});

describe("updateStationContainer", () => {
  it("replaces the view on good payloads", () => {
    const container = document.createElement("div");
    updateStationContainer(container, emptyPayload, "WC-PAINT");
    expect(container.querySelector(".buffer-empty")).not.toBeNull();
    updateStationContainer(container, delayedPayload, "WC-CUT");
    expect(container.querySelectorAll(".station-queue")).toHaveLength(1);
    expect(container.querySelector(".buffer-row.delayed")).not.toBeNull();
  });

  it("keeps the previous view and shows a banner on malformed payloads", () => {
    const container = document.createElement("div");
    updateStationContainer(container, midrunPayload, "WC-PACK");
    updateStationContainer(
      container,
      { garbage: 1 } as unknown as BufferPayload,
      "WC-PACK",
    );
    expect(container.querySelector(".error-banner")).not.toBeNull();
    const rows = container.querySelectorAll(".buffer-row");
    expect(rows).toHaveLength(1);
    expect(rows[0].querySelector(".ticket")?.textContent).toBe("T-2");
  });
});
