// Station touch screen: the input-buffer queue for one data point.
// Every displayed fact comes from one field of the buffer payload; the
// client never reorders or recomputes.

import type { BufferPayload, BufferRow } from "./types.js";

export interface StationView {
  data_point_id: string;
  rows: BufferRow[];
  last_refresh_us: number;
}

export function renderStationQueue(payload: BufferPayload): StationView {
  if (
    typeof payload.data_point !== "string" ||
    !Array.isArray(payload.rows) ||
    typeof payload.generated_at_us !== "number"
  ) {
    throw new Error("malformed buffer payload");
  }
  for (const row of payload.rows) {
    if (typeof row.ticket !== "string" || typeof row.delayed !== "boolean") {
      throw new Error("malformed buffer row");
    }
  }
  return {
    data_point_id: payload.data_point,
    rows: payload.rows,
    last_refresh_us: payload.generated_at_us,
  };
}

function formatClockUs(us: number): string {
  return new Date(us / 1000).toISOString().slice(11, 19);
}

export function stationQueueElement(
  doc: Document,
  view: StationView,
  workCenter: string | null,
): HTMLElement {
  const root = doc.createElement("section");
  root.className = "station-queue";
  const heading = doc.createElement("h1");
  heading.textContent = workCenter
    ? `${view.data_point_id} — ${workCenter}`
    : view.data_point_id;
  root.appendChild(heading);

  const refresh = doc.createElement("p");
  refresh.className = "refresh-stamp";
  refresh.textContent = `as of ${formatClockUs(view.last_refresh_us)}`;
  root.appendChild(refresh);

  if (view.rows.length === 0) {
    const empty = doc.createElement("p");
    empty.className = "buffer-empty";
    empty.textContent = "buffer empty";
    root.appendChild(empty);
    return root;
  }

  const list = doc.createElement("ol");
  list.className = "buffer-rows";
  for (const row of view.rows) {
    const item = doc.createElement("li");
    item.className = row.delayed ? "buffer-row delayed" : "buffer-row";
    item.dataset.ticket = row.ticket;

    const ticket = doc.createElement("span");
    ticket.className = "ticket";
    ticket.textContent = row.ticket;
    const detail = doc.createElement("span");
    detail.className = "detail";
    detail.textContent =
      `${row.order} · ${row.product} · step ${row.seq} · ` +
      `queued ${formatClockUs(row.queued_since_us)}`;
    item.append(ticket, detail);

    if (row.delayed) {
      const badge = doc.createElement("span");
      badge.className = "delay-badge";
      badge.textContent = "DELAYED";
      item.appendChild(badge);
    }
    list.appendChild(item);
  }
  root.appendChild(list);
  return root;
}

export function errorBanner(doc: Document, message: string): HTMLElement {
  const banner = doc.createElement("div");
  banner.className = "error-banner";
  banner.textContent = message;
  return banner;
}

/**
 * Swap the station container's content for a fresh render. On a
 * malformed payload the previous view stays; only a banner is added.
 */
export function updateStationContainer(
  container: HTMLElement,
  payload: BufferPayload,
  workCenter: string | null,
): void {
  const doc = container.ownerDocument;
  let view: StationView;
  try {
    view = renderStationQueue(payload);
  } catch (error) {
    container.querySelector(".error-banner")?.remove();
    container.prepend(
      errorBanner(doc, `bad payload from gateway: ${String(error)}`),
    );
    return;
  }
  container.querySelector(".error-banner")?.remove();
  container.querySelector(".station-queue")?.remove();
  container.appendChild(stationQueueElement(doc, view, workCenter));
}
